#include "fwrnn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace fwrnn {

void FwConfig::validate() const {
    if (p < 1.0 || std::isnan(p))
        throw std::invalid_argument("FwConfig: p must be in [1, inf]");
    if (!(delta0 > 0.0))
        throw std::invalid_argument("FwConfig: delta0 must be positive");
    if (inner_steps < 1)
        throw std::invalid_argument("FwConfig: inner_steps (K) must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("FwConfig: eta must be positive");
}

Vector fw_inner_loop(const Vector& flat_params, const GradFn& grad_at,
                     const FwConfig& cfg, double delta, std::size_t outer_step,
                     StepReport* report) {
    cfg.validate();
    if (!(delta > 0.0))
        throw std::invalid_argument("fw_inner_loop: delta must be positive");
    if (report) {
        *report = StepReport{};
        report->outer_step = outer_step;
        report->delta = delta;
    }
    Vector dw(flat_params.size(), 0.0);
    Vector point = flat_params;
    for (std::size_t k = 1; k <= cfg.inner_steps; ++k) {
        for (std::size_t i = 0; i < point.size(); ++i)
            point[i] = flat_params[i] + dw[i];
        const Vector grad = grad_at(point, k);
        if (grad.size() != dw.size())
            throw std::invalid_argument("fw_inner_loop: gradient dimension mismatch");
        if (!all_finite(grad))
            throw NumericAbort("fw_inner_loop: non-finite gradient at outer step " +
                               std::to_string(outer_step) + ", inner step " +
                               std::to_string(k));
        if (report) report->gradient_norms.push_back(lp_norm(grad, 2.0));
        const LmoResult s = lmo_lp_ball(grad, cfg.p, delta);
        const double gamma = cfg.gamma == GammaRule::kOneOverK
                                 ? 1.0 / static_cast<double>(k)
                                 : 2.0 / static_cast<double>(k + 1);
        for (std::size_t i = 0; i < dw.size(); ++i)
            dw[i] = (1.0 - gamma) * dw[i] + gamma * s.direction[i];
        if (report) report->trajectory_norms.push_back(lp_norm(dw, cfg.p));
    }
    return dw;
}

void fw_outer_step(Vector& flat_params, const Vector& delta_omega,
                   const FwConfig& cfg, AdamState* adam,
                   const AdamConfig& adam_cfg) {
    if (delta_omega.size() != flat_params.size())
        throw std::invalid_argument("fw_outer_step: dimension mismatch");
    if (cfg.outer_mode == OuterMode::kPlain) {
        axpy(cfg.eta, delta_omega, flat_params);
        return;
    }
    if (adam == nullptr)
        throw std::invalid_argument("fw_outer_step: adam-fed mode needs AdamState");
    // Adam descends along its input; dw already points downhill, so -dw is
    // fed as the pseudo-gradient.
    Vector pseudo(delta_omega.size());
    for (std::size_t i = 0; i < pseudo.size(); ++i) pseudo[i] = -delta_omega[i];
    adam_step(flat_params, pseudo, *adam, adam_cfg);
}

void sgd_step(Vector& params, const Vector& grad, double lr) {
    if (!all_finite(grad)) throw NumericAbort("sgd_step: non-finite gradient");
    axpy(-lr, grad, params);
}

void clip_step(Vector& params, const Vector& grad, double lr, double threshold) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("clip_step: threshold must be positive");
    if (!all_finite(grad)) throw NumericAbort("clip_step: non-finite gradient");
    const double norm = lp_norm(grad, 2.0);
    const double scale = norm > threshold ? threshold / norm : 1.0;
    axpy(-lr * scale, grad, params);
}

void adam_step(Vector& params, const Vector& grad, AdamState& state,
               const AdamConfig& cfg) {
    if (grad.size() != params.size() || state.m.size() != params.size())
        throw std::invalid_argument("adam_step: dimension mismatch");
    if (!all_finite(grad)) throw NumericAbort("adam_step: non-finite gradient");
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

}  // namespace fwrnn
