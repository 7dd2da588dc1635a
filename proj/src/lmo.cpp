#include "fwrnn/lmo.hpp"

#include <cmath>
#include <stdexcept>

namespace fwrnn {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

void check_inputs(const Vector& g, double p, double delta) {
    if (p < 1.0 || std::isnan(p))
        throw std::invalid_argument("lmo: p = " + std::to_string(p) +
                                    " is not a norm exponent (need p >= 1)");
    if (!(delta > 0.0))
        throw std::invalid_argument("lmo: radius delta must be positive");
    if (!all_finite(g)) throw std::invalid_argument("lmo: non-finite gradient");
}

}  // namespace

LmoResult lmo_lp_ball(const Vector& g, double p, double delta) {
    check_inputs(g, p, delta);
    if (p == 1.0) return lmo_l1_ball(g, delta);

    LmoResult r;
    r.direction.assign(g.size(), 0.0);

    if (std::isinf(p)) {
        // sign-gradient vertex; sgn(0) = 0 keeps zero coordinates untouched
        double value = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.direction[i] = -delta * sgn(g[i]);
            value += r.direction[i] * g[i];
        }
        r.attained_value = value;
        return r;
    }

    if (p == 2.0) {
        const double n2 = lp_norm(g, 2.0);
        if (n2 == 0.0) return r;
        for (std::size_t i = 0; i < g.size(); ++i)
            r.direction[i] = -delta * g[i] / n2;
        r.attained_value = -delta * n2;
        return r;
    }

    // General p in (1, inf): |s_i| proportional to |g_i|^{q/p}, normalized so
    // ||s||_p = delta. Magnitudes are scaled by max|g_i| before the pow to
    // avoid overflow.
    const double q = dual_exponent(p);
    double gmax = 0.0;
    for (double x : g) gmax = std::max(gmax, std::fabs(x));
    if (gmax == 0.0) return r;

    double sum_q = 0.0;  // sum (|g_i|/gmax)^q
    for (double x : g) sum_q += std::pow(std::fabs(x) / gmax, q);
    // alpha for the scaled magnitudes: ||s||_p = alpha * sum_q^{1/p} = delta
    const double alpha = delta / std::pow(sum_q, 1.0 / p);
    for (std::size_t i = 0; i < g.size(); ++i)
        r.direction[i] = -alpha * sgn(g[i]) * std::pow(std::fabs(g[i]) / gmax, q / p);
    // <s, g> = -delta * ||g||_q
    r.attained_value = -delta * gmax * std::pow(sum_q, 1.0 / q);
    return r;
}

LmoResult lmo_l1_ball(const Vector& g, double delta) {
    check_inputs(g, 1.0, delta);
    LmoResult r;
    r.direction.assign(g.size(), 0.0);
    if (g.empty()) return r;
    std::size_t best = 0;
    double best_mag = std::fabs(g[0]);
    for (std::size_t i = 1; i < g.size(); ++i) {
        const double m = std::fabs(g[i]);
        if (m > best_mag) {  // strict: lowest index wins ties
            best_mag = m;
            best = i;
        }
    }
    if (best_mag == 0.0) return r;
    r.direction[best] = -delta * sgn(g[best]);
    r.attained_value = -delta * best_mag;
    return r;
}

}  // namespace fwrnn
