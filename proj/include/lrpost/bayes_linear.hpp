#pragma once

#include <string>

#include <json.hpp>

#include "lrpost/linalg.hpp"

namespace lrpost {

/// Default cap on the parameter truncation dimension m. The environment
/// variable LOWRANK_BAYES_MAX_DIM overrides it.
inline constexpr Index kDefaultMaxDim = 4096;

Index max_dimension();

/// Centered Gaussian prior, diagonal in its Karhunen-Loeve basis.
struct SpectralPrior {
  Vec variances;
  /// Name of the basis the coordinates refer to, e.g. "dirichlet_sine".
  std::string basis = "identity";

  Index dim() const { return variances.size(); }
  Vec std_devs() const { return variances.cwiseSqrt(); }
  Mat covariance() const { return variances.asDiagonal(); }

  /// Throws InputError unless every variance is finite and positive.
  void validate() const;
};

/// Y = G X + noise, noise ~ N(0, C_obs), X ~ N(0, C_pr), in prior coordinates.
/// Immutable once constructed.
class InverseProblem {
 public:
  InverseProblem(Mat g, Mat noise_cov, SpectralPrior prior, nlohmann::json meta = {});

  const Mat& g() const { return g_; }
  const Mat& noise_cov() const { return noise_cov_; }
  const SpectralPrior& prior() const { return prior_; }
  const nlohmann::json& meta() const { return meta_; }

  /// Parameter dimension m.
  Index param_dim() const { return g_.cols(); }
  /// Data dimension n.
  Index data_dim() const { return g_.rows(); }

  /// Same prior and noise, forward map replaced.
  InverseProblem with_forward(Mat g) const;

 private:
  Mat g_;
  Mat noise_cov_;
  SpectralPrior prior_;
  nlohmann::json meta_;
};

struct Posterior {
  Vec mean;
  Mat covariance;
  Vec data;
};

/// Eigen-information of R(C_pos || C_pr) and the square roots built from it.
///
/// `lambdas` has length m, is nondecreasing and has exactly `rank` nonzero
/// entries; `ratios` holds the matching eigenvalues -lambda / (1 + lambda) of
/// the prior-preconditioned Hessian, which are the numerically primary
/// quantities. Columns of `w` (m x m) and `phi` (n x n) are the singular
/// vectors of C_pr^{1/2} G^T C_obs^{-1/2}.
struct PosteriorSpectrum {
  Vec lambdas;
  Vec ratios;
  Mat w;
  Mat phi;
  Mat v;
  Mat s_pos;
  Mat s_y;
  Index rank = 0;

  Index param_dim() const { return w.rows(); }
  Index data_dim() const { return phi.rows(); }
  /// Posterior-to-prior variance ratio 1 + lambda_i, computed as 1 / (1 + d_i).
  double variance_ratio(Index i) const { return 1.0 / (1.0 + ratios(i)); }
};

struct PosteriorOptions {
  /// Checks C_pos (C_pr^{-1} + H) = I to `verify_tol` (max-norm).
  bool verify_precision = true;
  double verify_tol = 1e-8;
};

Mat hessian(const InverseProblem& p);

/// G C_pr G^T + C_obs.
Mat data_covariance(const InverseProblem& p);

Mat posterior_covariance(const InverseProblem& p);

/// The exact posterior-mean operator C_pos G^T C_obs^{-1} (m x n).
Mat posterior_mean_operator(const InverseProblem& p);

Posterior posterior(const InverseProblem& p, const Vec& y, const PosteriorOptions& opts = {});

/// C_pr^{1/2} G^T C_obs^{-1/2}.
Mat preconditioned_forward_root(const InverseProblem& p);

PosteriorSpectrum spectrum(const InverseProblem& p, double rank_tol = kDefaultRankTol);

/// Var_pos(<X, z>) / Var_pr(<X, z>) evaluated from the two covariances.
double variance_ratio(const Mat& c_pos, const Vec& prior_variances, const Vec& z);

/// Variance ratio along C_pr^{-1/2} w_i (0-based i) from the dense posterior
/// covariance; equals 1 + lambda_i.
double variance_reduction(const PosteriorSpectrum& spec, const InverseProblem& p, Index i);
double variance_reduction(const PosteriorSpectrum& spec, const SpectralPrior& prior,
                          const Mat& c_pos, Index i);

}  // namespace lrpost
