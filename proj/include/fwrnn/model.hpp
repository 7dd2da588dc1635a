#ifndef FWRNN_MODEL_HPP_
#define FWRNN_MODEL_HPP_

#include <memory>
#include <string>
#include <vector>

#include "fwrnn/batch.hpp"
#include "fwrnn/errors.hpp"
#include "fwrnn/params.hpp"
#include "fwrnn/rng.hpp"

namespace fwrnn {

enum class CellType { kVanilla, kIndRnn };

struct ModelSpec {
    CellType cell = CellType::kVanilla;
    std::size_t input_dim = 1;
    std::size_t hidden_dim = 128;
    std::size_t output_dim = 1;
    std::size_t layers = 1;  // > 1 only for IndRNN
    TaskKind task = TaskKind::kRegression;
};

/// Per-layer hidden states at one point in time (batch x hidden each);
/// the carried state between TBPTT segments.
using HiddenState = std::vector<Matrix>;

struct ForwardTrace {
    /// states[layer][m] for m = 0..M; states[layer][0] is the initial state
    /// (all zeros unless a carried state was supplied).
    std::vector<std::vector<Matrix>> states;
    Matrix output;  // batch x output_dim
    double loss = 0.0;

    HiddenState final_state() const {
        HiddenState h;
        for (const auto& layer : states) h.push_back(layer.back());
        return h;
    }
};

class SequenceModel {
public:
    explicit SequenceModel(ModelSpec spec);

    const ModelSpec& spec() const { return spec_; }

    /// Seeded initialization: input/readout weights U(-1/sqrt(h), 1/sqrt(h)),
    /// vanilla recurrent matrix likewise, IndRNN recurrent vectors U(0, 1).
    ParamSet init_params(Rng& rng) const;

    /// z0 = nullptr means the zero initial state.
    ForwardTrace forward(const ParamSet& params, const SequenceBatch& batch,
                         const HiddenState* z0 = nullptr) const;

    struct BpttResult {
        double loss = 0.0;
        ParamSet grad;
        HiddenState final_state;  // detached, for TBPTT carrying
    };

    /// Exact batch-averaged loss gradient via BPTT.
    BpttResult bptt(const ParamSet& params, const SequenceBatch& batch,
                    const HiddenState* z0 = nullptr) const;

    /// Fraction of samples classified correctly (binary threshold 0.5,
    /// multi-class argmax). Throws for regression tasks.
    double accuracy(const ParamSet& params, const SequenceBatch& batch) const;

    /// Batch-averaged loss evaluated in fixed-size chunks, so large
    /// evaluation sets do not hold every hidden state at once.
    double mean_loss(const ParamSet& params, const SequenceBatch& batch) const;

private:
    ForwardTrace forward_vanilla(const ParamSet&, const SequenceBatch&,
                                 const HiddenState*) const;
    ForwardTrace forward_indrnn(const ParamSet&, const SequenceBatch&,
                                const HiddenState*) const;
    BpttResult bptt_vanilla(const ParamSet&, const SequenceBatch&,
                            const HiddenState*) const;
    BpttResult bptt_indrnn(const ParamSet&, const SequenceBatch&,
                           const HiddenState*) const;

    ModelSpec spec_;
};

/// Batch-averaged loss for the task kind, plus its gradient in the output.
/// d_output may be null when only the value is needed.
double output_loss(const Matrix& output, const SequenceBatch& batch,
                   Matrix* d_output);

}  // namespace fwrnn

#endif  // FWRNN_MODEL_HPP_
