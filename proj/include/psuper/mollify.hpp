#pragma once

#include <vector>

#include "psuper/field.hpp"

namespace psuper {

/// Result of an infimal convolution. The envelope is a supersolution only
/// where the distance to the cylinder boundary exceeds sqrt(2 L eps); the
/// mask records that shrunken domain, nodes outside are kept but flagged.
template <typename FieldT>
struct EnvelopeResult {
  FieldT field;
  double epsilon = 0.0;
  double shrink_margin = 0.0;  // sqrt(2 L eps), L = sup of the input
  std::vector<std::uint8_t> valid_mask;
};

/// Discrete Moreau envelope  v_eps(x) = min_y { v(y) + |x-y|^2 / (2 eps) },
/// minimized over grid nodes (space-time inputs add |t-tau|^2 to the
/// quadratic). Computed axis-by-axis with the lower-envelope-of-parabolas
/// pass, linear per axis, and equal to the O(N^2) brute-force node minimum
/// in exact arithmetic and bitwise on the same expression tree.
EnvelopeResult<ScalarField> inf_convolution(const ScalarField& f, double epsilon);
EnvelopeResult<SpaceTimeField> inf_convolution(const SpaceTimeField& f, double epsilon);

/// Exponential-in-time averaging u*(x,t) = (1/sigma) int_0^t e^{(s-t)/sigma}
/// u(x,s) ds, computed by the exact recurrence with trapezoidal within-step
/// integration (O(dt^2) local error); u*(.,t0) = 0. It solves
/// sigma du*/dt + u* = u and is a sup-norm contraction.
SpaceTimeField time_mollify(const SpaceTimeField& u, double sigma);

/// Lower-semicontinuous representative with an explicit "measure zero"
/// mask: flagged nodes are treated as corrupted. Non-null nodes keep their
/// value (the neighborhood shrinks to the singleton); null nodes take the
/// minimum over non-null nodes within the smallest Chebyshev radius >= 1
/// cell that contains any. With past_only every node instead takes the
/// minimum over strictly earlier slices (nodes on the initial slice keep
/// their own value if non-null).
ScalarField ess_liminf_representative(const ScalarField& f,
                                      const std::vector<std::uint8_t>& null_mask);
SpaceTimeField ess_liminf_representative(const SpaceTimeField& f,
                                         const std::vector<std::uint8_t>& null_mask,
                                         bool past_only);

}  // namespace psuper
