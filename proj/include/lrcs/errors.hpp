#pragma once

#include <stdexcept>
#include <string>

namespace lrcs {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A line was given zero series impedance.
struct ZeroImpedanceLine : Error { using Error::Error; };

/// A size or index argument is out of its admissible range.
struct InvalidSize : Error { using Error::Error; };

/// Requested rank exceeds min(t, p).
struct RankTooLarge : Error { using Error::Error; };

/// Attack resampling exhausted its retry budget without a non-degenerate draw.
struct DegenerateAttack : Error { using Error::Error; };

/// An operation that needs a nonempty support got an empty one.
struct EmptySupport : Error { using Error::Error; };

/// keep_fraction so small that no entry stays observed.
struct EmptyMask : Error { using Error::Error; };

/// Matrix arguments have inconsistent shapes.
struct ShapeMismatch : Error { using Error::Error; };

/// Eigen's SVD did not converge.
struct SvdFailure : Error { using Error::Error; };

/// Singular values straddle the rank tolerance band; the numerical rank is not well defined.
struct RankDeficiencyAmbiguous : Error { using Error::Error; };

/// Gershgorin-style bound requested outside its validity region (k*mu >= 1).
struct BoundInapplicable : Error { using Error::Error; };

/// (psi_tilde, c) pair fails the admissibility inequality.
struct InvalidPsiC : Error { using Error::Error; };

/// A column-subset Gram matrix is numerically singular.
struct SingularGram : Error { using Error::Error; };

}  // namespace lrcs
