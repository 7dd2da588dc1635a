#include "fwrnn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fwrnn {

AngleRecord angle_probe(std::size_t outer_step, const Vector& full_gradient,
                        const Vector& delta_omega) {
    AngleRecord rec;
    rec.outer_step = outer_step;
    const double gn = lp_norm(full_gradient, 2.0);
    const double dn = lp_norm(delta_omega, 2.0);
    if (gn == 0.0 || dn == 0.0) return rec;  // undefined angle
    const double cosine =
        std::clamp(-dot(full_gradient, delta_omega) / (gn * dn), -1.0, 1.0);
    rec.angle_deg = std::acos(cosine) * 180.0 / std::numbers::pi;
    return rec;
}

CurvatureEstimate estimate_curvature(const ScalarFn& f, const Vector& center,
                                     double radius, double p,
                                     std::size_t samples, Rng& rng) {
    if (samples < 1)
        throw std::invalid_argument("estimate_curvature: need samples >= 1");
    if (!(radius > 0.0))
        throw std::invalid_argument("estimate_curvature: radius must be positive");
    const std::size_t dim = center.size();

    // The ell-p ball sits inside the cube [-radius, radius]^dim, so cube
    // rejection sampling covers every p >= 1.
    auto sample_in_ball = [&]() {
        Vector x(dim);
        for (;;) {
            for (double& v : x) v = rng.uniform(-radius, radius);
            if (lp_norm(x, p) <= radius) break;
        }
        for (std::size_t i = 0; i < dim; ++i) x[i] += center[i];
        return x;
    };

    CurvatureEstimate est;
    {
        std::ostringstream os;
        os << "ball p=" << p << " radius=" << radius << " dim=" << dim;
        est.set_description = os.str();
    }
    for (std::size_t i = 0; i < samples; ++i) {
        const Vector x = sample_in_ball();
        const Vector s = sample_in_ball();
        double gamma = rng.uniform();
        while (gamma == 0.0) gamma = rng.uniform();
        Vector y(dim);
        for (std::size_t j = 0; j < dim; ++j)
            y[j] = (1.0 - gamma) * x[j] + gamma * s[j];
        const double fy = f.value(y);
        const double fx = f.value(x);
        const Vector gx = f.gradient(x);
        double lin = 0.0;
        for (std::size_t j = 0; j < dim; ++j) lin += gx[j] * (y[j] - x[j]);
        const double q = 2.0 / (gamma * gamma) * (fy - fx - lin);
        if (!std::isfinite(q)) {
            ++est.skipped;
            continue;
        }
        est.value = std::max(est.value, q);
        ++est.samples;
    }
    return est;
}

double lambda_bound(double delta, double curvature,
                    const std::vector<double>& gradient_norms) {
    if (!(curvature > 0.0))
        throw std::invalid_argument("lambda_bound: curvature must be positive");
    if (gradient_norms.empty())
        throw std::invalid_argument("lambda_bound: no recorded gradient norms");
    double best = 0.0;
    for (std::size_t k = 1; k <= gradient_norms.size(); ++k)
        best = std::max(best, 2.0 * delta * static_cast<double>(k + 1) /
                                  curvature * gradient_norms[k - 1]);
    return best;
}

AngleSummary summarize_angles(const std::vector<AngleRecord>& records) {
    AngleSummary s;
    for (const auto& r : records) {
        if (!r.angle_deg) continue;
        s.mean_deg += *r.angle_deg;
        if (*r.angle_deg <= 45.0) s.frac_within_45 += 1.0;
        ++s.counted;
    }
    if (s.counted > 0) {
        s.mean_deg /= static_cast<double>(s.counted);
        s.frac_within_45 /= static_cast<double>(s.counted);
    }
    return s;
}

}  // namespace fwrnn
