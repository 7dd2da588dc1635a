#ifndef FWRNN_TRAINER_HPP_
#define FWRNN_TRAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fwrnn/data.hpp"
#include "fwrnn/diagnostics.hpp"
#include "fwrnn/model.hpp"
#include "fwrnn/optim.hpp"

namespace fwrnn {

enum class OptimizerChoice { kSgd, kSgdClip, kTbptt, kAdam, kFw, kFwTbptt };

std::string optimizer_name(OptimizerChoice c);
OptimizerChoice optimizer_from_name(const std::string& name);

struct TrainConfig {
    OptimizerChoice optimizer = OptimizerChoice::kFw;
    FwConfig fw;
    AdamConfig adam;
    double lr = 1e-3;           // sgd/clip step size; also Adam's lr
    double lr_decay = 1.0;      // multiplicative step decay factor
    std::size_t lr_decay_every = 0;  // epochs between decays; 0 disables
    double clip_threshold = 5.0;
    std::size_t epochs = 1;
    std::size_t batch_size = 128;
    std::size_t tbptt_segment_len = 0;  // required for the tbptt variants
    std::uint64_t seed = 0;
    bool probe_angles = true;
    std::size_t angle_subsample = 2048;  // gradient sample for the probe

    void validate() const;
};

/// One metrics row per epoch. Wall time is the only nondeterministic column.
struct TrainRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;   // mean minibatch loss over the epoch
    double test_metric = 0.0;  // accuracy, or test MSE for regression
    double lr = 0.0;
    double delta = 0.0;
    std::size_t grad_updates = 0;  // cumulative parameter updates
    std::size_t grad_evals = 0;    // cumulative gradient computations
    double angle_mean_deg = 0.0;   // NaN when no probe this epoch
    double angle_frac45 = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    ParamSet params;
    std::vector<TrainRecord> records;
};

/// Deterministic stream of minibatch row-index sets: a seeded shuffle of
/// the dataset, reshuffled whenever exhausted. Inner Frank-Wolfe iterations
/// draw from the same stream as outer steps.
class BatchStream {
public:
    BatchStream(std::size_t dataset_size, std::size_t batch_size,
                std::uint64_t seed);
    std::vector<std::size_t> next();

private:
    std::size_t n_, batch_;
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_;
};

/// Seed-derivation roles used by the trainer (documented so external code
/// can reproduce its streams exactly).
inline constexpr std::uint64_t kSeedRoleInit = 10;
inline constexpr std::uint64_t kSeedRoleBatches = 11;
inline constexpr std::uint64_t kSeedRoleProbe = 12;

/// Runs the configured optimizer for cfg.epochs passes over dataset.train,
/// one outer update per minibatch (per segment for the tbptt variants), and
/// evaluates on dataset.test after each epoch. Fully deterministic given
/// (cfg, seed) apart from wall_seconds.
TrainResult train(const SequenceModel& model, const Dataset& dataset,
                  const TrainConfig& cfg);

/// As train(), but starts from the given parameters (used by the K=1
/// equivalence test and by eval tooling).
TrainResult train_from(const SequenceModel& model, const Dataset& dataset,
                       const TrainConfig& cfg, ParamSet params);

}  // namespace fwrnn

#endif  // FWRNN_TRAINER_HPP_
