#include "lrcs/kernels.hpp"

#include <cmath>

#include "lrcs/errors.hpp"

namespace lrcs {
namespace kernels {

namespace {

void check_same_shape(Eigen::Index r1, Eigen::Index c1, Eigen::Index r2, Eigen::Index c2, const char* what) {
  if (r1 != r2 || c1 != c2) throw ShapeMismatch(std::string(what) + ": operand shapes differ");
}

}  // namespace

namespace serial {

CMat entrywise_shrink(const CMat& X, double tau) {
  CMat Y(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const Complex x = X(i, j);
      const double a = std::abs(x);
      Y(i, j) = (a <= tau) ? Complex(0.0, 0.0) : x * ((a - tau) / a);
    }
  }
  return Y;
}

CMat group_shrink(const CMat& C, double tau) {
  CMat Y(C.rows(), C.cols());
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    const double nrm = C.col(j).norm();
    if (nrm <= tau) {
      Y.col(j).setZero();
    } else {
      Y.col(j) = C.col(j) * ((nrm - tau) / nrm);
    }
  }
  return Y;
}

double masked_diff_sqnorm(const CMat& A, const CMat& B, const Mask& omega) {
  check_same_shape(A.rows(), A.cols(), B.rows(), B.cols(), "masked_diff_sqnorm");
  check_same_shape(A.rows(), A.cols(), omega.rows(), omega.cols(), "masked_diff_sqnorm");
  double s = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (!omega(i, j)) continue;
      const Complex d = A(i, j) - B(i, j);
      s += std::norm(d);
    }
  }
  return s;
}

CMat project_residual_ball(const CMat& R, const Mask& omega, double radius) {
  check_same_shape(R.rows(), R.cols(), omega.rows(), omega.cols(), "project_residual_ball");
  double s = 0.0;
  for (Eigen::Index j = 0; j < R.cols(); ++j)
    for (Eigen::Index i = 0; i < R.rows(); ++i)
      if (omega(i, j)) s += std::norm(R(i, j));
  const double nrm = std::sqrt(s);
  if (nrm <= radius) return R;
  const double scale = (nrm > 0.0) ? radius / nrm : 0.0;
  CMat Y = R;
  for (Eigen::Index j = 0; j < R.cols(); ++j)
    for (Eigen::Index i = 0; i < R.rows(); ++i)
      if (omega(i, j)) Y(i, j) = R(i, j) * scale;
  return Y;
}

CMat ball_step(const CMat& X, const CMat& M, const Mask& omega, double radius) {
  check_same_shape(X.rows(), X.cols(), M.rows(), M.cols(), "ball_step");
  check_same_shape(X.rows(), X.cols(), omega.rows(), omega.cols(), "ball_step");
  double s = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      if (omega(i, j)) s += std::norm(X(i, j) - M(i, j));
  const double nrm = std::sqrt(s);
  const double scale = (nrm <= radius) ? 1.0 : ((nrm > 0.0) ? radius / nrm : 0.0);
  CMat Z = X;
  if (scale < 1.0) {
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (omega(i, j)) Z(i, j) = M(i, j) + (X(i, j) - M(i, j)) * scale;
  }
  return Z;
}

CMat masked_fill(const CMat& M, const Mask& omega) {
  check_same_shape(M.rows(), M.cols(), omega.rows(), omega.cols(), "masked_fill");
  CMat Y = CMat::Zero(M.rows(), M.cols());
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      if (omega(i, j)) Y(i, j) = M(i, j);
  return Y;
}

RVec column_sqnorms(const CMat& C) {
  RVec v(C.cols());
  for (Eigen::Index j = 0; j < C.cols(); ++j) v(j) = C.col(j).squaredNorm();
  return v;
}

}  // namespace serial

CMat entrywise_shrink(const CMat& X, double tau) {
  CMat Y(X.rows(), X.cols());
  const Eigen::Index n = X.size();
  const Complex* src = X.data();
  Complex* dst = Y.data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex x = src[k];
    const double a = std::abs(x);
    dst[k] = (a <= tau) ? Complex(0.0, 0.0) : x * ((a - tau) / a);
  }
  return Y;
}

CMat group_shrink(const CMat& C, double tau) {
  CMat Y(C.rows(), C.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    const double nrm = C.col(j).norm();
    if (nrm <= tau) {
      Y.col(j).setZero();
    } else {
      Y.col(j) = C.col(j) * ((nrm - tau) / nrm);
    }
  }
  return Y;
}

double masked_diff_sqnorm(const CMat& A, const CMat& B, const Mask& omega) {
  check_same_shape(A.rows(), A.cols(), B.rows(), B.cols(), "masked_diff_sqnorm");
  check_same_shape(A.rows(), A.cols(), omega.rows(), omega.cols(), "masked_diff_sqnorm");
  const Eigen::Index n = A.size();
  const Complex* a = A.data();
  const Complex* b = B.data();
  const bool* m = omega.data();
  double s = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : s)
  for (Eigen::Index k = 0; k < n; ++k) {
    if (m[k]) s += std::norm(a[k] - b[k]);
  }
  return s;
}

CMat project_residual_ball(const CMat& R, const Mask& omega, double radius) {
  check_same_shape(R.rows(), R.cols(), omega.rows(), omega.cols(), "project_residual_ball");
  double s = 0.0;
  const Eigen::Index n = R.size();
  const Complex* r = R.data();
  const bool* m = omega.data();
#pragma omp parallel for schedule(static) reduction(+ : s)
  for (Eigen::Index k = 0; k < n; ++k) {
    if (m[k]) s += std::norm(r[k]);
  }
  const double nrm = std::sqrt(s);
  if (nrm <= radius) return R;
  const double scale = (nrm > 0.0) ? radius / nrm : 0.0;
  CMat Y = R;
  Complex* y = Y.data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) {
    if (m[k]) y[k] = r[k] * scale;
  }
  return Y;
}

CMat ball_step(const CMat& X, const CMat& M, const Mask& omega, double radius) {
  check_same_shape(X.rows(), X.cols(), M.rows(), M.cols(), "ball_step");
  check_same_shape(X.rows(), X.cols(), omega.rows(), omega.cols(), "ball_step");
  const Eigen::Index n = X.size();
  const Complex* x = X.data();
  const Complex* mm = M.data();
  const bool* m = omega.data();
  double s = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : s)
  for (Eigen::Index k = 0; k < n; ++k) {
    if (m[k]) s += std::norm(x[k] - mm[k]);
  }
  const double nrm = std::sqrt(s);
  const double scale = (nrm <= radius) ? 1.0 : ((nrm > 0.0) ? radius / nrm : 0.0);
  CMat Z = X;
  if (scale < 1.0) {
    Complex* z = Z.data();
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) {
      if (m[k]) z[k] = mm[k] + (x[k] - mm[k]) * scale;
    }
  }
  return Z;
}

CMat masked_fill(const CMat& M, const Mask& omega) {
  check_same_shape(M.rows(), M.cols(), omega.rows(), omega.cols(), "masked_fill");
  CMat Y = CMat::Zero(M.rows(), M.cols());
  const Eigen::Index n = M.size();
  const Complex* src = M.data();
  const bool* m = omega.data();
  Complex* dst = Y.data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) {
    if (m[k]) dst[k] = src[k];
  }
  return Y;
}

RVec column_sqnorms(const CMat& C) {
  RVec v(C.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < C.cols(); ++j) v(j) = C.col(j).squaredNorm();
  return v;
}

}  // namespace kernels
}  // namespace lrcs
