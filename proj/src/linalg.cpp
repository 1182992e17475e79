#include "lrpost/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrpost/errors.hpp"

namespace lrpost {

namespace {

constexpr double kSignThreshold = 1e-10;

// Index of the first coordinate that is nonzero above roundoff, or -1.
Index first_significant(const Eigen::Ref<const Vec>& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return -1;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignThreshold * scale) return i;
  }
  return -1;
}

bool needs_flip(const Eigen::Ref<const Vec>& v) {
  const Index k = first_significant(v);
  return k >= 0 && v(k) < 0.0;
}

}  // namespace

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entries");
  }
}

double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError("max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

Svd svd(const Mat& m) {
  require_finite(m, "svd");
  Svd out;
  if (m.size() == 0) {
    out.left_vectors = Mat::Identity(m.rows(), m.rows());
    out.right_vectors = Mat::Identity(m.cols(), m.cols());
    out.singular_values = Vec::Zero(0);
    return out;
  }
  Eigen::BDCSVD<Mat> dec(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.left_vectors = dec.matrixU();
  out.right_vectors = dec.matrixV();
  out.singular_values = dec.singularValues();

  const Index k = out.singular_values.size();
  for (Index j = 0; j < out.right_vectors.cols(); ++j) {
    if (needs_flip(out.right_vectors.col(j))) {
      out.right_vectors.col(j) *= -1.0;
      if (j < k) out.left_vectors.col(j) *= -1.0;
    }
  }
  for (Index j = k; j < out.left_vectors.cols(); ++j) {
    if (needs_flip(out.left_vectors.col(j))) out.left_vectors.col(j) *= -1.0;
  }
  return out;
}

SymmetricEigen symmetric_eigen(const Mat& a) {
  require_finite(a, "symmetric_eigen");
  if (a.rows() != a.cols()) throw InputError("symmetric_eigen: matrix is not square");
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> dec(sym);
  if (dec.info() != Eigen::Success) {
    throw NumericalError("symmetric_eigen: eigensolver did not converge");
  }
  SymmetricEigen out{dec.eigenvalues(), dec.eigenvectors()};
  for (Index j = 0; j < out.vectors.cols(); ++j) {
    if (needs_flip(out.vectors.col(j))) out.vectors.col(j) *= -1.0;
  }
  return out;
}

Index numerical_rank(const Vec& singular_values, double rank_tol) {
  if (singular_values.size() == 0) return 0;
  const double smax = singular_values.maxCoeff();
  if (smax <= 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > rank_tol * smax) ++rank;
  }
  return rank;
}

Index numerical_rank(const Mat& m, double rank_tol) {
  return numerical_rank(svd(m).singular_values, rank_tol);
}

Mat pinv(const Mat& m, double rank_tol) {
  if (!(rank_tol > 0.0)) throw InputError("pinv: rank_tol must be positive");
  const Svd dec = svd(m);
  const Index rank = numerical_rank(dec.singular_values, rank_tol);
  Mat out = Mat::Zero(m.cols(), m.rows());
  for (Index i = 0; i < rank; ++i) {
    out.noalias() += (dec.right_vectors.col(i) / dec.singular_values(i)) *
                     dec.left_vectors.col(i).transpose();
  }
  return out;
}

Mat truncated_svd(const Mat& m, Index r) {
  if (r < 0) throw InputError("truncated_svd: negative rank");
  const Svd dec = svd(m);
  const Index rank = numerical_rank(dec.singular_values);
  if (rank <= r) return m;
  Mat out = Mat::Zero(m.rows(), m.cols());
  for (Index i = 0; i < r; ++i) {
    out.noalias() += (dec.singular_values(i) * dec.left_vectors.col(i)) *
                     dec.right_vectors.col(i).transpose();
  }
  return out;
}

Mat range_projector(const Mat& m, double rank_tol) {
  const Svd dec = svd(m);
  const Index rank = numerical_rank(dec.singular_values, rank_tol);
  const auto basis = dec.left_vectors.leftCols(rank);
  return basis * basis.transpose();
}

bool truncation_is_unique(const Vec& sigma, Index r, double rank_tol, double tie_tol) {
  if (r <= 0 || r >= sigma.size()) return true;
  const double smax = sigma.maxCoeff();
  if (smax <= 0.0) return true;
  if (sigma(r) <= rank_tol * smax) return true;
  return sigma(r - 1) - sigma(r) > tie_tol * smax;
}

ReducedRankSolution generalized_reduced_rank(const Mat& m, const Mat& t, const Mat& s,
                                             Index r, double rank_tol) {
  if (r < 0) throw InputError("generalized_reduced_rank: negative rank");
  if (t.rows() != m.rows()) {
    throw InputError("generalized_reduced_rank: T must have as many rows as M");
  }
  if (s.cols() != m.cols()) {
    throw InputError("generalized_reduced_rank: S must have as many columns as M");
  }
  require_finite(m, "generalized_reduced_rank(M)");
  require_finite(t, "generalized_reduced_rank(T)");
  require_finite(s, "generalized_reduced_rank(S)");

  const Mat t_pinv = pinv(t, rank_tol);
  const Mat s_pinv = pinv(s, rank_tol);
  // P_ran(T) = T T^+ and P_ker(S)^perp = S^+ S.
  const Mat target = (t * t_pinv) * m * (s_pinv * s);

  const Svd dec = svd(target);
  const Index rank = numerical_rank(dec.singular_values, rank_tol);
  const Index keep = std::min(r, rank);
  Mat truncated = Mat::Zero(target.rows(), target.cols());
  for (Index i = 0; i < keep; ++i) {
    truncated.noalias() += (dec.singular_values(i) * dec.left_vectors.col(i)) *
                           dec.right_vectors.col(i).transpose();
  }

  ReducedRankSolution out;
  out.n_hat = t_pinv * truncated * s_pinv;
  out.achieved_loss = (m - t * out.n_hat * s).norm();
  out.singular_values = dec.singular_values;
  out.unique = truncation_is_unique(dec.singular_values, r, rank_tol);
  const Index tail = std::max<Index>(0, dec.singular_values.size() - r);
  out.tail_singular_values = dec.singular_values.tail(tail);
  return out;
}

double minimality_residual(const Mat& n, const Mat& t, const Mat& s, double rank_tol) {
  const Mat ker_t_perp = pinv(t, rank_tol) * t;
  const Mat ran_s = s * pinv(s, rank_tol);
  return (n - ker_t_perp * n * ran_s).norm();
}

namespace {

Mat spd_power(const Mat& a, double power, const char* what) {
  if (a.rows() != a.cols()) throw InputError(std::string(what) + ": matrix is not square");
  if (a.size() == 0) return a;
  const SymmetricEigen dec = symmetric_eigen(a);
  const double vmax = dec.values.cwiseAbs().maxCoeff();
  if (!(dec.values.minCoeff() > 1e-14 * vmax) || vmax == 0.0) {
    throw DegeneracyError(std::string(what) + ": matrix is not positive definite");
  }
  const Vec scaled = dec.values.array().pow(power).matrix();
  return dec.vectors * scaled.asDiagonal() * dec.vectors.transpose();
}

}  // namespace

Mat spd_sqrt(const Mat& a) { return spd_power(a, 0.5, "spd_sqrt"); }

Mat spd_inv_sqrt(const Mat& a) { return spd_power(a, -0.5, "spd_inv_sqrt"); }

}  // namespace lrpost
