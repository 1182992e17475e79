#pragma once

#include <cmath>
#include <random>

#include "lrpost/bayes_linear.hpp"
#include "lrpost/linalg.hpp"

namespace testing_support {

using lrpost::Index;
using lrpost::Mat;
using lrpost::Vec;

inline Mat random_matrix(std::mt19937_64& gen, Index rows, Index cols) {
  std::normal_distribution<double> nd;
  Mat out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = nd(gen);
  return out;
}

inline Vec random_vector(std::mt19937_64& gen, Index n) { return random_matrix(gen, n, 1); }

inline Mat random_spd(std::mt19937_64& gen, Index n, double shift = 0.5) {
  const Mat a = random_matrix(gen, n, n);
  Mat out = a * a.transpose() / static_cast<double>(n);
  out.diagonal().array() += shift;
  return out;
}

inline Mat random_orthogonal(std::mt19937_64& gen, Index n) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(gen, n, n));
  return qr.householderQ() * Mat::Identity(n, n);
}

/// Orthonormal basis of the orthogonal complement of span(u).
inline Mat complement_basis(const Mat& u) {
  Eigen::HouseholderQR<Mat> qr(u);
  const Mat q = qr.householderQ() * Mat::Identity(u.rows(), u.rows());
  return q.rightCols(u.rows() - u.cols());
}

/// Random problem with decaying prior variances and a random SPD noise.
inline lrpost::InverseProblem random_problem(std::mt19937_64& gen, Index n, Index m,
                                             bool identity_noise = false) {
  lrpost::SpectralPrior prior;
  prior.variances.resize(m);
  for (Index k = 0; k < m; ++k) prior.variances(k) = std::pow(static_cast<double>(k + 1), -1.5);
  Mat noise = identity_noise ? Mat(Mat::Identity(n, n)) : random_spd(gen, n, 0.3);
  return lrpost::InverseProblem(random_matrix(gen, n, m), noise, prior);
}

inline lrpost::InverseProblem scalar_problem(double c2 = 1.0, double g = 1.0, double obs = 1.0) {
  lrpost::SpectralPrior prior;
  prior.variances = Vec::Constant(1, c2);
  return lrpost::InverseProblem(Mat::Constant(1, 1, g), Mat::Constant(1, 1, obs), prior);
}

/// Problem whose preconditioned Hessian has exactly the eigenvalues `d`
/// (identity prior and noise, G = diag(sqrt(d)) Q^T for an orthogonal Q).
inline lrpost::InverseProblem problem_with_ratios(std::mt19937_64& gen, const Vec& d, Index m) {
  const Index n = d.size();
  const Mat q = random_orthogonal(gen, m);
  Mat g = d.cwiseSqrt().asDiagonal() * q.leftCols(n).transpose();
  lrpost::SpectralPrior prior;
  prior.variances = Vec::Ones(m);
  return lrpost::InverseProblem(g, Mat::Identity(n, n), prior);
}

/// Smallest generalized eigenvalue of (N^T A N, N^T B N): min of the ratio
/// x^T A x / x^T B x over span(N).
inline double min_ratio(const Mat& basis, const Mat& a, const Mat& b) {
  const Mat an = basis.transpose() * a * basis;
  const Mat bn = basis.transpose() * b * basis;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (an + an.transpose()),
                                                   0.5 * (bn + bn.transpose()));
  return es.eigenvalues()(0);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace testing_support
