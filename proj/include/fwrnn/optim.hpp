#ifndef FWRNN_OPTIM_HPP_
#define FWRNN_OPTIM_HPP_

#include <functional>
#include <vector>

#include "fwrnn/errors.hpp"
#include "fwrnn/lmo.hpp"
#include "fwrnn/matrix.hpp"
#include "fwrnn/params.hpp"

namespace fwrnn {

enum class OuterMode { kPlain, kAdamFed };
enum class BatchMode { kFreshPerInnerStep, kFixedPerOuterStep };
enum class GammaRule { kOneOverK, kTwoOverKPlusOne };

/// Hyperparameters of the two-loop Frank-Wolfe optimizer.
struct FwConfig {
    double p = 2.0;               // ball norm exponent, [1, inf]
    double delta0 = 1.0;          // initial ball radius
    std::size_t inner_steps = 1;  // K
    double eta = 1.0;             // outer step size
    OuterMode outer_mode = OuterMode::kAdamFed;
    BatchMode batch_mode = BatchMode::kFreshPerInnerStep;
    GammaRule gamma = GammaRule::kOneOverK;

    void validate() const;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}
    Vector m, v;
    std::size_t step = 0;
};

/// Per-outer-step trace: the inner trajectory norms (each must stay inside
/// the ball) and the gradient norms the lambda bound needs.
struct StepReport {
    std::size_t outer_step = 0;
    double delta = 0.0;
    std::vector<double> trajectory_norms;  // ||dw_{t,k}||_p, k = 1..K
    std::vector<double> gradient_norms;    // ||grad at w + dw_{t,k-1}||_2
};

/// Gradient of the minibatch objective at a flat parameter point; the inner
/// iteration index k (1-based) lets the caller decide batch reuse.
using GradFn = std::function<Vector(const Vector& flat_point, std::size_t k)>;

/// Inner Frank-Wolfe loop: starting from dw = 0, repeatedly take the ell-p
/// ball LMO of the minibatch gradient at w + dw and blend with gamma_k.
/// Returns dw after K steps together with the step report.
Vector fw_inner_loop(const Vector& flat_params, const GradFn& grad_at,
                     const FwConfig& cfg, double delta, std::size_t outer_step,
                     StepReport* report = nullptr);

/// Outer update. Plain: w += eta * dw. Adam-fed: -dw is passed through the
/// Adam recursion as a pseudo-gradient, so the step moves along +dw with
/// Adam's per-coordinate scaling.
void fw_outer_step(Vector& flat_params, const Vector& delta_omega,
                   const FwConfig& cfg, AdamState* adam,
                   const AdamConfig& adam_cfg);

/// w -= lr * g.
void sgd_step(Vector& params, const Vector& grad, double lr);

/// Global ell-2 clipping then an SGD step: if ||g||_2 > threshold the
/// gradient is rescaled to norm threshold first.
void clip_step(Vector& params, const Vector& grad, double lr, double threshold);

/// Standard Adam update with bias correction.
void adam_step(Vector& params, const Vector& grad, AdamState& state,
               const AdamConfig& cfg);

}  // namespace fwrnn

#endif  // FWRNN_OPTIM_HPP_
