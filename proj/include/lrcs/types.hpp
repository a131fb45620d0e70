#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace lrcs {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Observation mask, true = entry observed. Same shape as the measurement matrix.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline Mask full_mask(Eigen::Index t, Eigen::Index p) { return Mask::Constant(t, p, true); }

inline Eigen::Index mask_count(const Mask& m) {
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j)) ++c;
  return c;
}

}  // namespace lrcs
