#ifndef FWRNN_LMO_HPP_
#define FWRNN_LMO_HPP_

#include "fwrnn/matrix.hpp"

namespace fwrnn {

/// Result of a linear minimization over an ell-p ball of radius delta:
/// direction = argmin_{||s||_p <= delta} <s, g>, attained_value = <direction, g>.
/// The attained value equals -delta * ||g||_q with 1/p + 1/q = 1.
struct LmoResult {
    Vector direction;
    double attained_value = 0.0;
};

/// Closed-form LMO over the ell-p ball, p in (1, inf].
/// s_i = -alpha * sgn(g_i) * |g_i|^{q/p}, alpha scaled so ||s||_p = delta.
/// p=2 reduces to -delta * g / ||g||_2, p=inf to -delta * sgn(g) with
/// sgn(0) = 0. A zero gradient returns the zero vector.
LmoResult lmo_lp_ball(const Vector& g, double p, double delta);

/// LMO over the ell-1 ball: a signed vertex of the cross-polytope at the
/// largest-magnitude coordinate (lowest index on ties).
LmoResult lmo_l1_ball(const Vector& g, double delta);

}  // namespace fwrnn

#endif  // FWRNN_LMO_HPP_
