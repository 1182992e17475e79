#include "lrpost/gaussian.hpp"

#include <cmath>
#include <sstream>

#include "lrpost/errors.hpp"

namespace lrpost {

DivergenceSpec DivergenceSpec::parse(std::string_view family, std::optional<double> order) {
  DivergenceSpec spec;
  if (family == "kl_forward") {
    spec.family = Family::kl_forward;
  } else if (family == "kl_reverse" || family == "kl") {
    spec.family = Family::kl_reverse;
  } else if (family == "renyi") {
    spec.family = Family::renyi;
  } else if (family == "amari") {
    spec.family = Family::amari;
  } else if (family == "hellinger") {
    spec.family = Family::hellinger;
  } else {
    throw InputError("unknown divergence family '" + std::string(family) + "'");
  }
  spec.order = order;
  spec.validate();
  return spec;
}

void DivergenceSpec::validate() const {
  const bool needs_order = family == Family::renyi || family == Family::amari;
  if (needs_order) {
    if (!order) throw InputError(name() + ": an order in (0, 1) is required");
    if (!(*order > 0.0 && *order < 1.0)) {
      throw InputError(name() + ": order must lie in (0, 1)");
    }
  } else if (order) {
    throw InputError(name() + ": this divergence takes no order");
  }
}

std::string DivergenceSpec::name() const {
  std::string base;
  switch (family) {
    case Family::kl_forward: base = "kl_forward"; break;
    case Family::kl_reverse: base = "kl_reverse"; break;
    case Family::renyi: base = "renyi"; break;
    case Family::amari: base = "amari"; break;
    case Family::hellinger: base = "hellinger"; break;
  }
  if (order && (family == Family::renyi || family == Family::amari)) {
    std::ostringstream os;
    os.precision(17);
    os << base << '(' << *order << ')';
    return os.str();
  }
  return base;
}

GaussianMeasure::GaussianMeasure(Vec mean, Mat cov_factor)
    : mean_(std::move(mean)), cov_factor_(std::move(cov_factor)) {
  if (cov_factor_.rows() != mean_.size()) {
    throw InputError("GaussianMeasure: factor rows must match the mean dimension");
  }
  require_finite(mean_, "GaussianMeasure(mean)");
  require_finite(cov_factor_, "GaussianMeasure(cov_factor)");
  if (mean_.size() == 0) return;
  const Vec eig = symmetric_eigen(covariance()).values;
  const double top = eig.cwiseAbs().maxCoeff();
  if (!(top > 0.0) || !(eig.minCoeff() > 1e-12 * top)) {
    throw DegeneracyError("GaussianMeasure: covariance is not positive definite");
  }
}

GaussianMeasure GaussianMeasure::from_covariance(Vec mean, const Mat& covariance) {
  require_finite(covariance, "GaussianMeasure::from_covariance");
  Eigen::LLT<Mat> llt(0.5 * (covariance + covariance.transpose()));
  if (llt.info() != Eigen::Success) {
    throw DegeneracyError("GaussianMeasure: covariance is not positive definite");
  }
  return GaussianMeasure(std::move(mean), llt.matrixL().toDenseMatrix());
}

Mat GaussianMeasure::covariance() const {
  const Mat c = cov_factor_ * cov_factor_.transpose();
  return 0.5 * (c + c.transpose());
}

Mat FeldmanHajekOperator::matrix() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

FeldmanHajekOperator fh_operator(const Mat& c2, const Mat& c1) {
  if (c1.rows() != c1.cols() || c2.rows() != c2.cols() || c1.rows() != c2.rows()) {
    throw InputError("fh_operator: covariances must be square and of equal size");
  }
  const Mat c1_inv_sqrt = spd_inv_sqrt(c1);
  if (c1 == c2) {
    const Index n = c1.rows();
    return {Vec::Zero(n), Mat::Identity(n, n)};
  }
  // Only checks c2; the product below inherits definiteness from it.
  Eigen::LLT<Mat> llt(0.5 * (c2 + c2.transpose()));
  if (llt.info() != Eigen::Success) {
    throw DegeneracyError("fh_operator: C2 is not positive definite");
  }
  const SymmetricEigen dec = symmetric_eigen(c1_inv_sqrt * c2 * c1_inv_sqrt);
  FeldmanHajekOperator r{dec.values.array() - 1.0, dec.vectors};
  if (r.eigenvalues.size() > 0 && r.eigenvalues.minCoeff() <= -1.0 + kSingularityTol) {
    throw SingularityError("fh_operator: eigenvalue at or below -1, measures are singular");
  }
  return r;
}

double x_minus_log1p(double x) {
  if (!(x > -1.0)) throw DomainError("x - log(1 + x) requires x > -1");
  if (std::abs(x) < 0.125) {
    // x - log(1 + x) = sum_{k >= 2} (-1)^k x^k / k
    double sum = 0.0;
    double power = x;
    for (int k = 2; k < 60; ++k) {
      power *= -x;
      const double term = -power / k;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return x - std::log1p(x);
}

double f_kl(double x) { return 0.5 * x_minus_log1p(x); }

double logdet2(const Vec& eigenvalues) {
  double acc = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues(i) > -1.0 + kSingularityTol)) {
      throw SingularityError("logdet2: eigenvalue at or below -1");
    }
    acc -= x_minus_log1p(eigenvalues(i));
  }
  return acc;
}

double logdet2(const FeldmanHajekOperator& r) { return logdet2(r.eigenvalues); }

double amari_from_renyi(double alpha, double renyi_value) {
  const double k = alpha * (1.0 - alpha);
  return -std::expm1(-k * renyi_value) / k;
}

double hellinger_from_renyi(double renyi_half_value) {
  return std::sqrt(std::max(0.0, -2.0 * std::expm1(-renyi_half_value)));
}

namespace {

// Same-mean Renyi divergence of order rho from the eigenvalues of R(C2 || C1).
double renyi_covariance_term(const Vec& r, double rho) {
  double acc = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    if (!(1.0 + (1.0 - rho) * r(i) > 0.0)) {
      throw DomainError("divergence: rho I + (1 - rho)(I + R) is not positive");
    }
    // log[(1 + r)^{rho - 1} (1 + (1 - rho) r)] without first-order cancellation
    acc += (1.0 - rho) * x_minus_log1p(r(i)) - x_minus_log1p((1.0 - rho) * r(i));
  }
  return acc / (2.0 * rho * (1.0 - rho));
}

}  // namespace

double covariance_divergence(const Vec& r, const DivergenceSpec& spec) {
  spec.validate();
  using F = DivergenceSpec::Family;
  for (Index i = 0; i < r.size(); ++i) {
    if (!(r(i) > -1.0 + kSingularityTol)) {
      throw SingularityError("divergence: operator eigenvalue at or below -1");
    }
  }
  switch (spec.family) {
    case F::kl_forward: return -0.5 * logdet2(r);
    case F::kl_reverse: {
      double acc = 0.0;
      for (Index i = 0; i < r.size(); ++i) acc += f_kl(-r(i) / (1.0 + r(i)));
      return acc;
    }
    case F::renyi: return renyi_covariance_term(r, *spec.order);
    case F::amari: return amari_from_renyi(*spec.order, renyi_covariance_term(r, *spec.order));
    case F::hellinger: return hellinger_from_renyi(renyi_covariance_term(r, 0.5));
  }
  return 0.0;
}

DivergenceEvaluator::DivergenceEvaluator(const Mat& c2, const Mat& c1, DivergenceSpec spec)
    : spec_(std::move(spec)) {
  spec_.validate();
  using F = DivergenceSpec::Family;
  const bool reverse = spec_.family == F::kl_reverse;
  // KL(nu1 || nu2) is the forward formula with the roles swapped.
  const Mat& top = reverse ? c1 : c2;
  const Mat& base = reverse ? c2 : c1;
  r_ = fh_operator(top, base);
  const Mat base_inv_sqrt = spd_inv_sqrt(base);
  whitener_ = r_.eigenvectors.transpose() * base_inv_sqrt;

  const Vec& r = r_.eigenvalues;
  if (spec_.family == F::kl_forward || spec_.family == F::kl_reverse) {
    base_term_ = -0.5 * logdet2(r);
    return;
  }
  renyi_order_ = spec_.family == F::hellinger ? 0.5 : *spec_.order;
  base_term_ = renyi_covariance_term(r, renyi_order_);
  for (Index i = 0; i < r.size(); ++i) {
    whitener_.row(i) /= std::sqrt(1.0 + (1.0 - renyi_order_) * r(i));
  }
}

Mat DivergenceEvaluator::whitened_map(const Mat& shift_map) const {
  return whitener_ * shift_map;
}

double DivergenceEvaluator::finish(double mean_term) const {
  using F = DivergenceSpec::Family;
  const double inner = mean_term + base_term_;
  switch (spec_.family) {
    case F::amari: return amari_from_renyi(renyi_order_, inner);
    case F::hellinger: return hellinger_from_renyi(inner);
    default: return inner;
  }
}

double DivergenceEvaluator::operator()(const Vec& mean_shift) const {
  if (mean_shift.size() != whitener_.cols()) {
    throw InputError("divergence: mean dimension mismatch");
  }
  const double q = 0.5 * (whitener_ * mean_shift).squaredNorm();
  return finish(q);
}

double divergence(const GaussianMeasure& nu2, const GaussianMeasure& nu1,
                  const DivergenceSpec& spec) {
  if (nu2.dim() != nu1.dim()) throw InputError("divergence: measures differ in dimension");
  const DivergenceEvaluator eval(nu2.covariance(), nu1.covariance(), spec);
  return eval(nu2.mean() - nu1.mean());
}

double mean_shift_loss(const Vec& m, const Vec& m_pos, const Mat& cov) {
  if (m.size() != m_pos.size() || cov.rows() != m.size() || cov.cols() != m.size()) {
    throw InputError("mean_shift_loss: dimension mismatch");
  }
  Eigen::LLT<Mat> llt(0.5 * (cov + cov.transpose()));
  if (llt.info() != Eigen::Success) {
    throw DegeneracyError("mean_shift_loss: covariance is not positive definite");
  }
  const Vec white = llt.matrixL().solve(m - m_pos);
  return white.squaredNorm();
}

}  // namespace lrpost
