#include "lrpost/bayes_linear.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "lrpost/errors.hpp"

namespace lrpost {

namespace {

constexpr double kLambdaFloor = -1.0 + 1e-14;

Eigen::LLT<Mat> factor_spd(const Mat& a, const char* what) {
  Eigen::LLT<Mat> llt(0.5 * (a + a.transpose()));
  if (llt.info() != Eigen::Success) {
    throw DegeneracyError(std::string(what) + " is not positive definite");
  }
  return llt;
}

}  // namespace

Index max_dimension() {
  if (const char* env = std::getenv("LOWRANK_BAYES_MAX_DIM")) {
    char* end = nullptr;
    const long long value = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<Index>(value);
    throw InputError("LOWRANK_BAYES_MAX_DIM must be a positive integer");
  }
  return kDefaultMaxDim;
}

void SpectralPrior::validate() const {
  if (variances.size() == 0) throw InputError("prior: empty variance vector");
  if (!variances.allFinite() || !(variances.minCoeff() > 0.0)) {
    throw InputError("prior: variances must be finite and positive");
  }
}

InverseProblem::InverseProblem(Mat g, Mat noise_cov, SpectralPrior prior, nlohmann::json meta)
    : g_(std::move(g)),
      noise_cov_(std::move(noise_cov)),
      prior_(std::move(prior)),
      meta_(std::move(meta)) {
  prior_.validate();
  if (g_.cols() != prior_.dim()) {
    throw InputError("problem: forward map has " + std::to_string(g_.cols()) +
                     " columns but the prior has dimension " + std::to_string(prior_.dim()));
  }
  if (noise_cov_.rows() != g_.rows() || noise_cov_.cols() != g_.rows()) {
    throw InputError("problem: noise covariance must be n x n");
  }
  if (g_.rows() == 0) throw InputError("problem: no observations");
  if (prior_.dim() > max_dimension()) {
    throw InputError("problem: parameter dimension " + std::to_string(prior_.dim()) +
                     " exceeds the cap " + std::to_string(max_dimension()) +
                     " (set LOWRANK_BAYES_MAX_DIM to raise it)");
  }
  require_finite(g_, "problem(g)");
  require_finite(noise_cov_, "problem(noise_cov)");
  if ((noise_cov_ - noise_cov_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * noise_cov_.cwiseAbs().maxCoeff()) {
    throw InputError("problem: noise covariance is not symmetric");
  }
  noise_cov_ = 0.5 * (noise_cov_ + noise_cov_.transpose());
  factor_spd(noise_cov_, "noise covariance");
}

InverseProblem InverseProblem::with_forward(Mat g) const {
  return InverseProblem(std::move(g), noise_cov_, prior_, meta_);
}

Mat hessian(const InverseProblem& p) {
  const auto llt = factor_spd(p.noise_cov(), "noise covariance");
  const Mat white = llt.matrixL().solve(p.g());
  return white.transpose() * white;
}

Mat data_covariance(const InverseProblem& p) {
  const Mat gs = p.g() * p.prior().std_devs().asDiagonal();
  const Mat c = gs * gs.transpose() + p.noise_cov();
  return 0.5 * (c + c.transpose());
}

namespace {

// X = L^{-1} G C_pr with L L^T = C_y, so that C_pos = C_pr - X^T X and
// C_pr G^T C_y^{-1} = X^T L^{-1}.
struct GainFactors {
  Eigen::LLT<Mat> cy;
  Mat x;
};

GainFactors gain_factors(const InverseProblem& p) {
  auto cy = factor_spd(data_covariance(p), "data covariance G C_pr G^T + C_obs");
  Mat x = cy.matrixL().solve(p.g() * p.prior().variances.asDiagonal());
  return {std::move(cy), std::move(x)};
}

}  // namespace

Mat posterior_covariance(const InverseProblem& p) {
  const GainFactors f = gain_factors(p);
  Mat c = -(f.x.transpose() * f.x);
  c.diagonal() += p.prior().variances;
  return 0.5 * (c + c.transpose());
}

Mat posterior_mean_operator(const InverseProblem& p) {
  const GainFactors f = gain_factors(p);
  const Mat lower_inv = f.cy.matrixL().solve(Mat::Identity(p.data_dim(), p.data_dim()));
  return f.x.transpose() * lower_inv;
}

Posterior posterior(const InverseProblem& p, const Vec& y, const PosteriorOptions& opts) {
  if (y.size() != p.data_dim()) {
    throw InputError("posterior: data has length " + std::to_string(y.size()) + ", expected " +
                     std::to_string(p.data_dim()));
  }
  require_finite(y, "posterior(y)");
  const GainFactors f = gain_factors(p);
  Posterior out;
  out.data = y;
  out.covariance = -(f.x.transpose() * f.x);
  out.covariance.diagonal() += p.prior().variances;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.mean = f.x.transpose() * f.cy.matrixL().solve(y);

  if (opts.verify_precision) {
    Mat precision = hessian(p);
    precision.diagonal() += p.prior().variances.cwiseInverse();
    const Mat residual = out.covariance * precision - Mat::Identity(p.param_dim(), p.param_dim());
    const double err = residual.cwiseAbs().maxCoeff();
    if (!(err <= opts.verify_tol)) {
      throw NumericalError("posterior: precision identity violated (residual " +
                           std::to_string(err) + ")");
    }
  }
  return out;
}

Mat preconditioned_forward_root(const InverseProblem& p) {
  const Mat obs_inv_sqrt = spd_inv_sqrt(p.noise_cov());
  return p.prior().std_devs().asDiagonal() * p.g().transpose() * obs_inv_sqrt;
}

PosteriorSpectrum spectrum(const InverseProblem& p, double rank_tol) {
  const Index m = p.param_dim();
  const Svd dec = svd(preconditioned_forward_root(p));

  PosteriorSpectrum out;
  out.w = dec.left_vectors;
  out.phi = dec.right_vectors;
  out.ratios = Vec::Zero(m);
  out.lambdas = Vec::Zero(m);

  // rank(H) = rank(C_pr^{1/2} G^T C_obs^{-1/2}), decided on the singular values
  // with the same relative threshold used for rank(G).
  const Vec squared = dec.singular_values.array().square();
  out.rank = numerical_rank(dec.singular_values, rank_tol);
  // Directions whose d_i underflows carry no update.
  while (out.rank > 0 && squared(out.rank - 1) == 0.0) --out.rank;
  for (Index i = 0; i < out.rank; ++i) {
    out.ratios(i) = squared(i);
    out.lambdas(i) = std::max(-squared(i) / (1.0 + squared(i)), kLambdaFloor);
  }

  // S_pos = C_pr^{1/2} (I + sum d_i w_i w_i^T)^{-1/2}
  // S_y   = C_obs^{1/2} (I + sum d_i phi_i phi_i^T)^{1/2}
  const auto wk = out.w.leftCols(out.rank);
  const auto phik = out.phi.leftCols(out.rank);
  Vec shrink(out.rank);
  Vec grow(out.rank);
  for (Index i = 0; i < out.rank; ++i) {
    const double half_log = 0.5 * std::log1p(out.ratios(i));
    shrink(i) = std::expm1(-half_log);
    grow(i) = std::expm1(half_log);
  }
  Mat inner_pos = wk * shrink.asDiagonal() * wk.transpose();
  inner_pos.diagonal().array() += 1.0;
  out.s_pos = p.prior().std_devs().asDiagonal() * inner_pos;

  Mat inner_y = phik * grow.asDiagonal() * phik.transpose();
  inner_y.diagonal().array() += 1.0;
  out.s_y = spd_sqrt(p.noise_cov()) * inner_y;

  // S_pos = C_pos^{1/2} Q with Q orthogonal, and v_i = Q w_i.
  Eigen::JacobiSVD<Mat> polar(out.s_pos, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat q = polar.matrixU() * polar.matrixV().transpose();
  out.v = q * out.w;
  return out;
}

double variance_ratio(const Mat& c_pos, const Vec& prior_variances, const Vec& z) {
  if (c_pos.rows() != z.size() || prior_variances.size() != z.size()) {
    throw InputError("variance_ratio: dimension mismatch");
  }
  const double prior_var = z.dot(prior_variances.asDiagonal() * z);
  if (!(prior_var > 0.0)) throw InputError("variance_ratio: zero direction");
  return z.dot(c_pos * z) / prior_var;
}

double variance_reduction(const PosteriorSpectrum& spec, const SpectralPrior& prior,
                          const Mat& c_pos, Index i) {
  if (i < 0 || i >= spec.param_dim()) throw InputError("variance_reduction: index out of range");
  const Vec z = prior.std_devs().cwiseInverse().asDiagonal() * spec.w.col(i);
  return variance_ratio(c_pos, prior.variances, z);
}

double variance_reduction(const PosteriorSpectrum& spec, const InverseProblem& p, Index i) {
  return variance_reduction(spec, p.prior(), posterior_covariance(p), i);
}

}  // namespace lrpost
