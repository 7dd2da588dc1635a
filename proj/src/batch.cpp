#include "fwrnn/batch.hpp"

#include <stdexcept>

namespace fwrnn {

SequenceBatch SequenceBatch::select(const std::vector<std::size_t>& rows) const {
    SequenceBatch out;
    out.task = task;
    out.steps.reserve(steps.size());
    for (const Matrix& x : steps) {
        Matrix m(rows.size(), x.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r] >= x.rows())
                throw std::out_of_range("SequenceBatch::select: row index");
            for (std::size_t c = 0; c < x.cols(); ++c) m(r, c) = x(rows[r], c);
        }
        out.steps.push_back(std::move(m));
    }
    if (!real_targets.empty())
        for (std::size_t r : rows) out.real_targets.push_back(real_targets.at(r));
    if (!label_targets.empty())
        for (std::size_t r : rows) out.label_targets.push_back(label_targets.at(r));
    return out;
}

SequenceBatch SequenceBatch::time_slice(std::size_t first, std::size_t len) const {
    if (first + len > steps.size())
        throw std::out_of_range("SequenceBatch::time_slice: range past M");
    SequenceBatch out;
    out.task = task;
    out.real_targets = real_targets;
    out.label_targets = label_targets;
    out.steps.assign(steps.begin() + static_cast<std::ptrdiff_t>(first),
                     steps.begin() + static_cast<std::ptrdiff_t>(first + len));
    return out;
}

std::vector<Segment> tbptt_segments(std::size_t time_steps,
                                    std::size_t segment_len) {
    if (segment_len < 1)
        throw std::invalid_argument("tbptt_segments: segment_len must be >= 1");
    std::vector<Segment> segs;
    for (std::size_t first = 0; first < time_steps; first += segment_len)
        segs.push_back({first, std::min(segment_len, time_steps - first)});
    return segs;
}

}  // namespace fwrnn
