#include "fwrnn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fwrnn {

namespace {

double schedule_lr(const TrainConfig& cfg, std::size_t epoch) {
    if (cfg.lr_decay_every == 0 || cfg.lr_decay == 1.0) return cfg.lr;
    const auto decays = epoch / cfg.lr_decay_every;
    return cfg.lr * std::pow(cfg.lr_decay, static_cast<double>(decays));
}

}  // namespace

std::string optimizer_name(OptimizerChoice c) {
    switch (c) {
        case OptimizerChoice::kSgd: return "sgd";
        case OptimizerChoice::kSgdClip: return "sgd-clip";
        case OptimizerChoice::kTbptt: return "tbptt";
        case OptimizerChoice::kAdam: return "adam";
        case OptimizerChoice::kFw: return "fw";
        case OptimizerChoice::kFwTbptt: return "fw-tbptt";
    }
    throw std::invalid_argument("optimizer_name: unknown choice");
}

OptimizerChoice optimizer_from_name(const std::string& name) {
    if (name == "sgd") return OptimizerChoice::kSgd;
    if (name == "sgd-clip") return OptimizerChoice::kSgdClip;
    if (name == "tbptt") return OptimizerChoice::kTbptt;
    if (name == "adam") return OptimizerChoice::kAdam;
    if (name == "fw") return OptimizerChoice::kFw;
    if (name == "fw-tbptt" || name == "fw+tbptt") return OptimizerChoice::kFwTbptt;
    throw std::invalid_argument("unknown optimizer: " + name);
}

void TrainConfig::validate() const {
    fw.validate();
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (!(lr_decay > 0.0) || lr_decay > 1.0)
        throw std::invalid_argument("TrainConfig: lr_decay must be in (0, 1]");
    if (batch_size < 1)
        throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if ((optimizer == OptimizerChoice::kTbptt ||
         optimizer == OptimizerChoice::kFwTbptt) &&
        tbptt_segment_len < 1)
        throw std::invalid_argument(
            "TrainConfig: tbptt variants need tbptt_segment_len >= 1");
}

BatchStream::BatchStream(std::size_t dataset_size, std::size_t batch_size,
                         std::uint64_t seed)
    : n_(dataset_size), batch_(batch_size), rng_(seed), cursor_(0) {
    if (n_ == 0) throw std::invalid_argument("BatchStream: empty dataset");
    order_ = rng_.permutation(n_);
}

std::vector<std::size_t> BatchStream::next() {
    std::vector<std::size_t> rows;
    rows.reserve(batch_);
    while (rows.size() < std::min(batch_, n_)) {
        if (cursor_ == n_) {
            order_ = rng_.permutation(n_);
            cursor_ = 0;
            if (!rows.empty()) break;  // keep batches within one shuffle pass
        }
        rows.push_back(order_[cursor_++]);
    }
    return rows;
}

TrainResult train(const SequenceModel& model, const Dataset& dataset,
                  const TrainConfig& cfg) {
    Rng init_rng(Rng::split_seed(cfg.seed, kSeedRoleInit));
    return train_from(model, dataset, cfg, model.init_params(init_rng));
}

TrainResult train_from(const SequenceModel& model, const Dataset& dataset,
                       const TrainConfig& cfg, ParamSet params) {
    cfg.validate();
    const std::size_t n_train = dataset.train.batch_size();
    const std::size_t outer_per_epoch =
        (n_train + cfg.batch_size - 1) / cfg.batch_size;

    BatchStream stream(n_train, cfg.batch_size,
                       Rng::split_seed(cfg.seed, kSeedRoleBatches));
    Rng probe_rng(Rng::split_seed(cfg.seed, kSeedRoleProbe));

    // Fixed subsample standing in for the full-batch gradient in the probe.
    std::vector<std::size_t> probe_rows;
    if (cfg.probe_angles) {
        const std::size_t want = std::min(cfg.angle_subsample, n_train);
        const auto perm = probe_rng.permutation(n_train);
        probe_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(want));
    }

    ParamSet scratch = params.zeros_like();
    auto flat_grad = [&](const Vector& flat_point, const SequenceBatch& batch,
                         const HiddenState* z0, double* loss_out,
                         HiddenState* state_out) {
        scratch.set_from_flat(flat_point);
        auto res = model.bptt(scratch, batch, z0);
        if (loss_out) *loss_out = res.loss;
        if (state_out) *state_out = std::move(res.final_state);
        return res.grad.flatten();
    };

    Vector flat = params.flatten();
    AdamState adam(flat.size());
    std::size_t grad_updates = 0, grad_evals = 0;

    TrainResult result;
    const auto t0 = std::chrono::steady_clock::now();
    const bool fw_mode = cfg.optimizer == OptimizerChoice::kFw ||
                         cfg.optimizer == OptimizerChoice::kFwTbptt;
    const bool tbptt_mode = cfg.optimizer == OptimizerChoice::kTbptt ||
                            cfg.optimizer == OptimizerChoice::kFwTbptt;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = schedule_lr(cfg, epoch);
        // delta decreases with the learning rate
        const double delta = cfg.fw.delta0 * lr / cfg.lr;
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        Vector last_direction;  // FW: last applied delta-omega this epoch
        Vector pre_step_flat;   // parameter point that direction was built at

        try {
            for (std::size_t step = 0; step < outer_per_epoch; ++step) {
                const auto rows = stream.next();
                const SequenceBatch batch = dataset.train.select(rows);

                auto run_update = [&](const SequenceBatch& seg,
                                      const HiddenState* z0,
                                      HiddenState* carried) {
                    if (fw_mode) {
                        SequenceBatch fresh;  // owns inner-step batches
                        GradFn grad_at = [&](const Vector& point, std::size_t k) {
                            ++grad_evals;
                            const SequenceBatch* b = &seg;
                            // tbptt segments carry hidden state, so their
                            // inner loop always reuses the segment batch
                            if (cfg.fw.batch_mode == BatchMode::kFreshPerInnerStep &&
                                !tbptt_mode && k > 1) {
                                fresh = dataset.train.select(stream.next());
                                b = &fresh;
                            }
                            double loss;
                            Vector g = flat_grad(point, *b, z0, &loss,
                                                 k == 1 ? carried : nullptr);
                            if (k == 1) {
                                loss_sum += loss;
                                ++loss_count;
                            }
                            return g;
                        };
                        const FwConfig& fwc = cfg.fw;
                        if (cfg.probe_angles) pre_step_flat = flat;
                        last_direction = fw_inner_loop(flat, grad_at, fwc, delta,
                                                       grad_updates + 1, nullptr);
                        AdamConfig ac = cfg.adam;
                        ac.lr = lr;
                        fw_outer_step(flat, last_direction, fwc,
                                      cfg.fw.outer_mode == OuterMode::kAdamFed
                                          ? &adam
                                          : nullptr,
                                      ac);
                    } else {
                        double loss;
                        Vector g = flat_grad(flat, seg, z0, &loss, carried);
                        ++grad_evals;
                        loss_sum += loss;
                        ++loss_count;
                        switch (cfg.optimizer) {
                            case OptimizerChoice::kSgd:
                                sgd_step(flat, g, lr);
                                break;
                            case OptimizerChoice::kSgdClip:
                                clip_step(flat, g, lr, cfg.clip_threshold);
                                break;
                            case OptimizerChoice::kTbptt:
                            case OptimizerChoice::kAdam: {
                                AdamConfig ac = cfg.adam;
                                ac.lr = lr;
                                adam_step(flat, g, adam, ac);
                                break;
                            }
                            default:
                                throw std::logic_error("unhandled optimizer");
                        }
                    }
                    ++grad_updates;
                };

                if (tbptt_mode) {
                    const auto segments = tbptt_segments(batch.time_steps(),
                                                         cfg.tbptt_segment_len);
                    HiddenState carried;
                    for (std::size_t s = 0; s < segments.size(); ++s) {
                        const SequenceBatch seg =
                            batch.time_slice(segments[s].first, segments[s].len);
                        HiddenState next_state;
                        run_update(seg, s == 0 ? nullptr : &carried, &next_state);
                        carried = std::move(next_state);
                    }
                } else {
                    run_update(batch, nullptr, nullptr);
                }
            }
        } catch (const NumericAbort& e) {
            throw NumericAbort("epoch " + std::to_string(epoch + 1) + ": " +
                               e.what());
        }

        params.set_from_flat(flat);

        TrainRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count)
                                    : 0.0;
        rec.lr = lr;
        rec.delta = delta;
        rec.grad_updates = grad_updates;
        rec.grad_evals = grad_evals;
        rec.test_metric = dataset.test.task == TaskKind::kRegression
                              ? model.mean_loss(params, dataset.test)
                              : model.accuracy(params, dataset.test);

        rec.angle_mean_deg = std::numeric_limits<double>::quiet_NaN();
        rec.angle_frac45 = std::numeric_limits<double>::quiet_NaN();
        if (cfg.probe_angles && fw_mode && !last_direction.empty()) {
            const SequenceBatch probe_batch = dataset.train.select(probe_rows);
            // gradient at the point the last direction was built at
            Vector g =
                flat_grad(pre_step_flat, probe_batch, nullptr, nullptr, nullptr);
            const AngleRecord ar = angle_probe(grad_updates, g, last_direction);
            if (ar.angle_deg) {
                rec.angle_mean_deg = *ar.angle_deg;
                rec.angle_frac45 = *ar.angle_deg <= 45.0 ? 1.0 : 0.0;
            }
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        result.records.push_back(rec);
    }

    params.set_from_flat(flat);
    result.params = std::move(params);
    return result;
}

}  // namespace fwrnn
