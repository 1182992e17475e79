#include "lrpost/lowrank.hpp"

#include <cmath>
#include <string>

#include "lrpost/errors.hpp"

namespace lrpost {

namespace {

void require_rank(Index r, const char* what) {
  if (r < 0) throw InputError(std::string(what) + ": rank must be nonnegative");
}

void require_data_rank(Index r, Index n, const char* what) {
  require_rank(r, what);
  if (r > n) {
    throw InputError(std::string(what) + ": rank " + std::to_string(r) +
                     " exceeds the data dimension " + std::to_string(n));
  }
}

void require_matching(const PosteriorSpectrum& spec, const SpectralPrior& prior) {
  if (spec.param_dim() != prior.dim()) {
    throw InputError("spectrum and prior differ in dimension");
  }
}

void require_matching(const PosteriorSpectrum& spec, const InverseProblem& p) {
  if (spec.param_dim() != p.param_dim() || spec.data_dim() != p.data_dim()) {
    throw InputError("spectrum and problem differ in dimension");
  }
}

Mat orthogonal_projector(const Mat& spanning, Index dim) {
  if (spanning.cols() == 0) return Mat::Zero(dim, dim);
  return range_projector(spanning);
}

}  // namespace

OptimalCovariance optimal_covariance(const PosteriorSpectrum& spec, const SpectralPrior& prior,
                                     Index r) {
  require_rank(r, "optimal_covariance");
  require_matching(spec, prior);
  const Index k = std::min(r, spec.param_dim());
  Vec scale(k);
  for (Index i = 0; i < k; ++i) {
    scale(i) = std::sqrt(spec.ratios(i) / (1.0 + spec.ratios(i)));
  }
  OptimalCovariance out;
  out.rank = r;
  out.update_vectors = prior.std_devs().asDiagonal() * spec.w.leftCols(k) * scale.asDiagonal();
  out.covariance = -(out.update_vectors * out.update_vectors.transpose());
  out.covariance.diagonal() += prior.variances;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.unique = truncation_is_unique(spec.ratios, r);
  return out;
}

Mat optimal_precision(const PosteriorSpectrum& spec, const SpectralPrior& prior, Index r) {
  require_rank(r, "optimal_precision");
  require_matching(spec, prior);
  const Index k = std::min(r, spec.param_dim());
  const Mat v = prior.std_devs().cwiseInverse().asDiagonal() * spec.w.leftCols(k);
  Mat out = v * spec.ratios.head(k).asDiagonal() * v.transpose();
  out.diagonal() += prior.variances.cwiseInverse();
  return 0.5 * (out + out.transpose());
}

double covariance_loss(const PosteriorSpectrum& spec, Index r, const DivergenceSpec& div) {
  require_rank(r, "covariance_loss");
  div.validate();
  const Index m = spec.param_dim();
  const Index k = std::min(r, m);
  if (div.family == DivergenceSpec::Family::kl_reverse) {
    double acc = 0.0;
    for (Index i = k; i < m; ++i) acc += f_kl(spec.ratios(i));
    return acc;
  }
  // R(C_pos || C_r^opt) has eigenvalues lambda_i for i > r and 0 otherwise.
  return covariance_divergence(spec.lambdas.tail(m - k), div);
}

int loss_exponent(MeanFamily family) {
  return family == MeanFamily::structure_preserving ? 3 : 1;
}

std::string_view family_name(MeanFamily family) {
  return family == MeanFamily::structure_preserving ? "mean1" : "mean2";
}

MeanFamily parse_mean_family(std::string_view name) {
  if (name == "mean1" || name == "1" || name == "structure_preserving") {
    return MeanFamily::structure_preserving;
  }
  if (name == "mean2" || name == "2" || name == "structure_ignoring") {
    return MeanFamily::structure_ignoring;
  }
  throw InputError("unknown mean family '" + std::string(name) + "'");
}

double mean_tail_sum(const PosteriorSpectrum& spec, MeanFamily family, Index r) {
  require_rank(r, "mean_tail_sum");
  const int gamma = loss_exponent(family);
  double acc = 0.0;
  for (Index i = std::min(r, spec.param_dim()); i < spec.param_dim(); ++i) {
    acc += std::pow(spec.ratios(i), gamma);
  }
  return acc;
}

OptimalMean optimal_mean(const PosteriorSpectrum& spec, const InverseProblem& p, MeanFamily family,
                         Index r) {
  require_data_rank(r, p.data_dim(), "optimal_mean");
  require_matching(spec, p);
  OptimalMean out;
  out.family = family;
  out.rank = r;
  out.closed_form_loss = mean_tail_sum(spec, family, r);
  out.unique = truncation_is_unique(spec.ratios, r);

  // Past rank(H) the optimum is the posterior mean operator itself.
  if (r >= spec.rank) {
    out.a_opt = posterior_mean_operator(p);
  } else if (family == MeanFamily::structure_ignoring) {
    // C_pr^{1/2} (sum_{i<=r} sqrt(d_i) / (1 + d_i) w_i phi_i^T) C_obs^{-1/2}
    Vec scale(r);
    for (Index i = 0; i < r; ++i) {
      scale(i) = std::sqrt(spec.ratios(i)) / (1.0 + spec.ratios(i));
    }
    const Mat obs_inv_sqrt = spd_inv_sqrt(p.noise_cov());
    out.a_opt = p.prior().std_devs().asDiagonal() * spec.w.leftCols(r) * scale.asDiagonal() *
                (spec.phi.leftCols(r).transpose() * obs_inv_sqrt);
  } else {
    const Mat cov = optimal_covariance(spec, p.prior(), r).covariance;
    Eigen::LLT<Mat> obs(p.noise_cov());
    const Mat whitened = obs.solve(p.g());
    out.a_opt = cov * whitened.transpose();
  }
  return out;
}

double mean_loss_hs_oracle(const Mat& a, const PosteriorSpectrum& spec, const InverseProblem& p) {
  require_matching(spec, p);
  if (a.rows() != p.param_dim() || a.cols() != p.data_dim()) {
    throw InputError("mean_loss_hs_oracle: A must be m x n");
  }
  const Vec inv_std = p.prior().std_devs().cwiseInverse();
  // S_pos = C_pr^{1/2} B, so S_pos^{-1} A = B^{-1} C_pr^{-1/2} A.
  const Mat b = inv_std.asDiagonal() * spec.s_pos;
  const Mat x = b.partialPivLu().solve(inv_std.asDiagonal() * a);
  if (!x.allFinite()) {
    throw RangeError("mean_loss_hs_oracle: S_pos^{-1} A is unbounded");
  }
  return (x * spec.s_y - preconditioned_forward_root(p)).squaredNorm();
}

double mean_divergence_loss(Index r, MeanFamily family, const PosteriorSpectrum& spec,
                            const DivergenceSpec& div) {
  div.validate();
  const double tail = mean_tail_sum(spec, family, r);
  using F = DivergenceSpec::Family;
  switch (div.family) {
    case F::amari: return amari_from_renyi(*div.order, tail);
    case F::hellinger: return hellinger_from_renyi(tail);
    default: return tail;
  }
}

JointApproximation joint_approximation(const PosteriorSpectrum& spec, const InverseProblem& p,
                                       MeanFamily family, Index r) {
  JointApproximation out;
  out.mean = optimal_mean(spec, p, family, r);
  out.covariance = optimal_covariance(spec, p.prior(), r);
  if (r >= spec.rank) out.covariance.covariance = posterior_covariance(p);
  out.loss = covariance_loss(spec, r) + 0.5 * out.mean.closed_form_loss;
  out.unique = out.mean.unique;
  return out;
}

ProjectedProblem optimal_projector(const PosteriorSpectrum& spec, const InverseProblem& p,
                                   Index r) {
  require_data_rank(r, p.data_dim(), "optimal_projector");
  require_matching(spec, p);
  const Vec sd = p.prior().std_devs();
  const auto wr = spec.w.leftCols(r);
  Mat projector = sd.asDiagonal() * (wr * wr.transpose()) * sd.cwiseInverse().asDiagonal();
  InverseProblem projected = p.with_forward(p.g() * projector);
  return {std::move(projector), std::move(projected)};
}

SubspaceProjectors subspace_projectors(const PosteriorSpectrum& spec, const SpectralPrior& prior,
                                       Index r) {
  require_rank(r, "subspace_projectors");
  require_matching(spec, prior);
  const Index m = spec.param_dim();
  const Index k = std::min(r, m);
  const Mat span = prior.std_devs().cwiseInverse().asDiagonal() * spec.w;
  return {orthogonal_projector(span.leftCols(k), m),
          orthogonal_projector(span.rightCols(m - k), m)};
}

ProjectionReport projection_interpretation(const PosteriorSpectrum& spec, const InverseProblem& p,
                                           MeanFamily family, Index r, const Vec& y) {
  if (y.size() != p.data_dim()) throw InputError("projection_interpretation: y has wrong length");
  const OptimalMean mean = optimal_mean(spec, p, family, r);
  const SubspaceProjectors proj = subspace_projectors(spec, p.prior(), r);
  const Vec approx = mean.a_opt * y;
  const Vec exact = posterior_mean_operator(p) * y;

  ProjectionReport out;
  out.approx_on_w_r = proj.w_r * approx;
  out.exact_on_w_r = proj.w_r * exact;
  out.approx_on_w_minus_r = proj.w_minus_r * approx;
  if (family == MeanFamily::structure_ignoring) {
    out.reference_on_w_minus_r = Vec::Zero(p.param_dim());
  } else {
    Eigen::LLT<Mat> obs(p.noise_cov());
    const Vec prior_update = p.prior().variances.asDiagonal() * (p.g().transpose() * obs.solve(y));
    out.reference_on_w_minus_r = proj.w_minus_r * prior_update;
  }
  out.residual_w_r = (out.approx_on_w_r - out.exact_on_w_r).cwiseAbs().maxCoeff();
  out.residual_w_minus_r =
      (out.approx_on_w_minus_r - out.reference_on_w_minus_r).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace lrpost
