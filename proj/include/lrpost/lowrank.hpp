#pragma once

#include <string>
#include <string_view>

#include "lrpost/bayes_linear.hpp"
#include "lrpost/gaussian.hpp"

namespace lrpost {

/// Rank-r covariance C_pr - sum_{i<=r} (-lambda_i) (C_pr^{1/2} w_i)(C_pr^{1/2} w_i)^T.
struct OptimalCovariance {
  Index rank = 0;
  Mat covariance;
  /// m x r; column i is sqrt(-lambda_i) C_pr^{1/2} w_i, so that
  /// covariance = C_pr - update_vectors update_vectors^T.
  Mat update_vectors;
  bool unique = true;
};

OptimalCovariance optimal_covariance(const PosteriorSpectrum& spec, const SpectralPrior& prior,
                                     Index r);

/// Inverse of C_r^opt, C_pr^{-1} + sum_{i<=r} d_i (C_pr^{-1/2} w_i)(C_pr^{-1/2} w_i)^T.
Mat optimal_precision(const PosteriorSpectrum& spec, const SpectralPrior& prior, Index r);

/// D(N(m, C_pos) || N(m, C_r^opt)) in closed form. With `kl_reverse` this is
/// KL(N(m, C_r^opt) || N(m, C_pos)) = sum_{i>r} f_kl(d_i).
double covariance_loss(const PosteriorSpectrum& spec, Index r,
                       const DivergenceSpec& div = DivergenceSpec::kl_reverse());

enum class MeanFamily { structure_preserving = 1, structure_ignoring = 2 };

/// Exponent of d_i in the minimal mean loss: 3 for structure-preserving
/// approximations, 1 for structure-ignoring ones.
int loss_exponent(MeanFamily family);

std::string_view family_name(MeanFamily family);  // "mean1" / "mean2"
MeanFamily parse_mean_family(std::string_view name);

struct OptimalMean {
  MeanFamily family = MeanFamily::structure_ignoring;
  Index rank = 0;
  /// m x n map from data to the approximate posterior mean.
  Mat a_opt;
  /// Minimal E_Y ||A Y - m_pos(Y)||^2_{C_pos^{-1}}, i.e. sum_{i>r} d_i^gamma.
  double closed_form_loss = 0.0;
  bool unique = true;
};

/// Throws InputError for r < 0 or r > n.
OptimalMean optimal_mean(const PosteriorSpectrum& spec, const InverseProblem& p, MeanFamily family,
                         Index r);

/// sum_{i>r} d_i^gamma for the given family.
double mean_tail_sum(const PosteriorSpectrum& spec, MeanFamily family, Index r);

/// ||S_pos^{-1} A S_y - C_pr^{1/2} G^T C_obs^{-1/2}||_F^2, the exact expected
/// loss E_Y ||A Y - m_pos(Y)||^2_{C_pos^{-1}}. Throws RangeError when S_pos^{-1} A
/// is not finite.
double mean_loss_hs_oracle(const Mat& a, const PosteriorSpectrum& spec, const InverseProblem& p);

/// Minimal data-averaged mean loss measured in `div`. KL and Renyi return the
/// tail sum itself; Amari and Hellinger apply their transform to it.
double mean_divergence_loss(Index r, MeanFamily family, const PosteriorSpectrum& spec,
                            const DivergenceSpec& div);

struct JointApproximation {
  OptimalMean mean;
  OptimalCovariance covariance;
  /// E_Y KL(N(A Y, C_r^opt) || N(m_pos(Y), C_pos)): the covariance loss plus
  /// half the mean tail sum.
  double loss = 0.0;
  bool unique = true;
};

JointApproximation joint_approximation(const PosteriorSpectrum& spec, const InverseProblem& p,
                                       MeanFamily family, Index r);

/// P = sum_{i<=r} (C_pr^{1/2} w_i)(C_pr^{-1/2} w_i)^T and the problem Y = G P X + noise.
struct ProjectedProblem {
  Mat projector;
  InverseProblem problem;
};

/// Throws InputError for r < 0 or r > n.
ProjectedProblem optimal_projector(const PosteriorSpectrum& spec, const InverseProblem& p, Index r);

/// Euclidean-orthogonal projectors onto W_r = span(C_pr^{-1/2} w_i, i <= r)
/// and W_{-r} = span(C_pr^{-1/2} w_i, i > r).
struct SubspaceProjectors {
  Mat w_r;
  Mat w_minus_r;
};

SubspaceProjectors subspace_projectors(const PosteriorSpectrum& spec, const SpectralPrior& prior,
                                       Index r);

/// Both sides of P_{W_r} A y = P_{W_r} m_pos(y) and of the W_{-r} identity:
/// P_{W_{-r}} A y = 0 for the structure-ignoring family and
/// P_{W_{-r}} A y = P_{W_{-r}} C_pr G^T C_obs^{-1} y for the structure-preserving one.
struct ProjectionReport {
  Vec approx_on_w_r;
  Vec exact_on_w_r;
  Vec approx_on_w_minus_r;
  Vec reference_on_w_minus_r;
  double residual_w_r = 0.0;
  double residual_w_minus_r = 0.0;
};

ProjectionReport projection_interpretation(const PosteriorSpectrum& spec, const InverseProblem& p,
                                           MeanFamily family, Index r, const Vec& y);

}  // namespace lrpost
