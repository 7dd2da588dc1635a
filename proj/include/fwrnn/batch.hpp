#ifndef FWRNN_BATCH_HPP_
#define FWRNN_BATCH_HPP_

#include <cstddef>
#include <vector>

#include "fwrnn/matrix.hpp"

namespace fwrnn {

/// What the readout predicts and which loss applies.
enum class TaskKind {
    kRegression,  // 1-dim output, MSE against real targets
    kBinary,      // 1-dim output, MSE against {0,1} targets
    kMultiClass,  // C-dim output, softmax cross-entropy
};

/// A minibatch of sequences. Inputs are stored one matrix per time step
/// (batch x input_dim) so the whole batch advances through the recurrence
/// with dense matrix products.
struct SequenceBatch {
    std::vector<Matrix> steps;          // length M
    std::vector<double> real_targets;   // regression tasks
    std::vector<int> label_targets;     // binary / multi-class tasks
    TaskKind task = TaskKind::kRegression;

    std::size_t time_steps() const { return steps.size(); }
    std::size_t batch_size() const { return steps.empty() ? 0 : steps[0].rows(); }
    std::size_t input_dim() const { return steps.empty() ? 0 : steps[0].cols(); }

    /// Sub-batch with the given sample rows, same time span.
    SequenceBatch select(const std::vector<std::size_t>& rows) const;
    /// Sub-batch with the time steps [first, first+len), same samples.
    SequenceBatch time_slice(std::size_t first, std::size_t len) const;
};

/// Time ranges for truncated BPTT: the sequence split into in-order
/// segments of at most segment_len steps (a segment_len >= M gives one
/// segment covering everything).
struct Segment {
    std::size_t first;
    std::size_t len;
};
std::vector<Segment> tbptt_segments(std::size_t time_steps,
                                    std::size_t segment_len);

}  // namespace fwrnn

#endif  // FWRNN_BATCH_HPP_
