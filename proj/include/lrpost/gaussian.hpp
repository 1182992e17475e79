#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "lrpost/linalg.hpp"

namespace lrpost {

/// Which divergence to evaluate, and its order where one is needed.
///
/// All divergences are written D(nu2 || nu1) with nu2 the target and nu1 the
/// approximation. `kl_forward` is KL(nu2 || nu1), `kl_reverse` is
/// KL(nu1 || nu2), and `renyi`, `amari` are the order-rho (alpha) divergences
/// of nu2 from nu1. `hellinger` is the Hellinger distance, not its square.
struct DivergenceSpec {
  enum class Family { kl_forward, kl_reverse, renyi, amari, hellinger };

  Family family = Family::kl_reverse;
  std::optional<double> order;

  static DivergenceSpec kl_forward() { return {Family::kl_forward, std::nullopt}; }
  static DivergenceSpec kl_reverse() { return {Family::kl_reverse, std::nullopt}; }
  static DivergenceSpec renyi(double rho) { return {Family::renyi, rho}; }
  static DivergenceSpec amari(double alpha) { return {Family::amari, alpha}; }
  static DivergenceSpec hellinger() { return {Family::hellinger, std::nullopt}; }

  /// Parses "kl_forward", "kl_reverse", "renyi", "amari", "hellinger".
  static DivergenceSpec parse(std::string_view family, std::optional<double> order);

  /// Throws InputError unless the order is present exactly when required and
  /// lies in (0, 1).
  void validate() const;

  /// Canonical label, e.g. "kl_reverse" or "renyi(0.5)".
  std::string name() const;

  friend bool operator==(const DivergenceSpec&, const DivergenceSpec&) = default;
};

/// N(mean, L L^T). The factor need not be symmetric or triangular.
class GaussianMeasure {
 public:
  GaussianMeasure(Vec mean, Mat cov_factor);

  /// Builds the measure from a covariance, factoring it by Cholesky.
  static GaussianMeasure from_covariance(Vec mean, const Mat& covariance);

  const Vec& mean() const { return mean_; }
  const Mat& cov_factor() const { return cov_factor_; }
  Mat covariance() const;
  Index dim() const { return mean_.size(); }

 private:
  Vec mean_;
  Mat cov_factor_;
};

/// R(C2 || C1) = C1^{-1/2} C2 C1^{-1/2} - I in eigen form (ascending).
struct FeldmanHajekOperator {
  Vec eigenvalues;
  Mat eigenvectors;

  Mat matrix() const;
};

/// Eigenvalues at or below -1 + kSingularityTol mark singular measures.
inline constexpr double kSingularityTol = 1e-12;

FeldmanHajekOperator fh_operator(const Mat& c2, const Mat& c1);

/// log det_2(I + R) = sum_i [log(1 + r_i) - r_i].
double logdet2(const FeldmanHajekOperator& r);
double logdet2(const Vec& eigenvalues);

/// x - log(1 + x), accurate for small |x|.
double x_minus_log1p(double x);

/// Per-eigenvalue reverse-KL covariance loss, (x - log(1 + x)) / 2.
double f_kl(double x);

double divergence(const GaussianMeasure& nu2, const GaussianMeasure& nu1,
                  const DivergenceSpec& spec);

/// D(N(0, C2) || N(0, C1)) from the eigenvalues of R(C2 || C1).
double covariance_divergence(const Vec& r_eigenvalues, const DivergenceSpec& spec);

/// Amari alpha-divergence and Hellinger distance from a Renyi value.
double amari_from_renyi(double alpha, double renyi_value);
double hellinger_from_renyi(double renyi_half_value);

/// Evaluates D(N(m2, C2) || N(m1, C1)) for fixed covariances and many mean
/// pairs. The eigendecomposition of the Feldman-Hajek operator is done once.
class DivergenceEvaluator {
 public:
  DivergenceEvaluator(const Mat& c2, const Mat& c1, DivergenceSpec spec);

  /// Divergence for the mean difference m2 - m1.
  double operator()(const Vec& mean_shift) const;

  /// Value at zero mean shift.
  double covariance_term() const { return finish(0.0); }

  /// Matrix B with mean-dependent term equal to 0.5 * ||B x||^2 for a mean
  /// shift D x. Only meaningful for the KL and Renyi families, where the
  /// mean term is quadratic before any outer transform.
  Mat whitened_map(const Mat& shift_map) const;

  /// Combines a quadratic mean term q = 0.5 ||B x||^2 with the covariance
  /// term into the divergence value.
  double finish(double mean_term) const;

  const DivergenceSpec& spec() const { return spec_; }
  const FeldmanHajekOperator& operator_r() const { return r_; }

 private:
  DivergenceSpec spec_;
  FeldmanHajekOperator r_;
  Mat whitener_;        // Q^T C_base^{-1/2}, rows scaled by the mean weights
  double base_term_ = 0.0;   // KL or Renyi value at zero mean shift
  double renyi_order_ = 0.0;
};

/// (m - m_pos)^T C^{-1} (m - m_pos).
double mean_shift_loss(const Vec& m, const Vec& m_pos, const Mat& cov);

}  // namespace lrpost
