#ifndef FWRNN_DIAGNOSTICS_HPP_
#define FWRNN_DIAGNOSTICS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fwrnn/matrix.hpp"
#include "fwrnn/rng.hpp"

namespace fwrnn {

/// Angle between the descent direction -gradient and the applied update,
/// in degrees. Empty when either vector is zero (undefined angle, excluded
/// from aggregates).
struct AngleRecord {
    std::size_t outer_step = 0;
    std::optional<double> angle_deg;
};

/// Angle between -gradient and delta_omega via
/// arccos(<-g, dw> / (||g|| ||dw||)); both vectors point downhill, so a
/// perfect update gives 0 degrees.
AngleRecord angle_probe(std::size_t outer_step, const Vector& full_gradient,
                        const Vector& delta_omega);

struct CurvatureEstimate {
    double value = 0.0;     // running max of the scaled Bregman divergence
    std::size_t samples = 0;
    std::size_t skipped = 0;  // non-finite evaluations
    std::string set_description;
};

/// Value and gradient of a scalar function over a flat vector.
struct ScalarFn {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
};

/// Monte-Carlo lower bound on the curvature constant: the maximum of
/// (2/gamma^2) * (f(y) - f(x) - <grad f(x), y - x>) over random x, s in the
/// ell-p ball of the given radius around center, y = (1-gamma)x + gamma*s.
CurvatureEstimate estimate_curvature(const ScalarFn& f, const Vector& center,
                                     double radius, double p,
                                     std::size_t samples, Rng& rng);

/// Inexactness parameter of the approximate-oracle bound:
/// max over k of 2*delta*(k+1)/M_F * ||grad at inner step k||_2, where k is
/// the 1-based index into gradient_norms.
double lambda_bound(double delta, double curvature,
                    const std::vector<double>& gradient_norms);

/// Summary of the per-epoch angle records: mean over defined angles and the
/// fraction within 45 degrees.
struct AngleSummary {
    double mean_deg = 0.0;
    double frac_within_45 = 0.0;
    std::size_t counted = 0;
};
AngleSummary summarize_angles(const std::vector<AngleRecord>& records);

}  // namespace fwrnn

#endif  // FWRNN_DIAGNOSTICS_HPP_
