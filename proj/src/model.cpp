#include "fwrnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fwrnn {

namespace {

void add_row_broadcast(Matrix& m, const Matrix& row) {
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) += row(0, c);
}

Matrix colsum(const Matrix& m) {
    Matrix s(1, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) s(0, c) += m(r, c);
    return s;
}

void check_finite(const Matrix& m, std::size_t step) {
    if (!m.all_finite())
        throw NumericOverflow("non-finite activation at time step " +
                              std::to_string(step));
}

void check_batch(const ModelSpec& spec, const SequenceBatch& batch) {
    if (batch.time_steps() == 0)
        throw std::invalid_argument("model: empty batch (M = 0)");
    if (batch.input_dim() != spec.input_dim)
        throw std::invalid_argument(
            "model: batch input_dim " + std::to_string(batch.input_dim()) +
            " != model input_dim " + std::to_string(spec.input_dim));
    for (const Matrix& x : batch.steps)
        if (x.rows() != batch.batch_size() || x.cols() != batch.input_dim())
            throw std::invalid_argument("model: ragged batch");
}

Matrix initial_state(const HiddenState* z0, std::size_t layer,
                     std::size_t batch, std::size_t hidden) {
    if (z0 == nullptr) return Matrix(batch, hidden);
    if (layer >= z0->size())
        throw std::invalid_argument("model: carried state has too few layers");
    const Matrix& m = (*z0)[layer];
    if (m.rows() != batch || m.cols() != hidden)
        throw std::invalid_argument("model: carried state shape mismatch");
    return m;
}

}  // namespace

double output_loss(const Matrix& output, const SequenceBatch& batch,
                   Matrix* d_output) {
    const std::size_t n = output.rows();
    if (n == 0) throw std::invalid_argument("output_loss: empty batch");
    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    if (d_output) *d_output = Matrix(output.rows(), output.cols());

    switch (batch.task) {
        case TaskKind::kRegression:
        case TaskKind::kBinary: {
            if (output.cols() != 1)
                throw std::invalid_argument("output_loss: MSE needs 1-dim output");
            for (std::size_t i = 0; i < n; ++i) {
                const double target = batch.task == TaskKind::kRegression
                                          ? batch.real_targets.at(i)
                                          : static_cast<double>(batch.label_targets.at(i));
                const double r = output(i, 0) - target;
                loss += r * r * inv_n;
                if (d_output) (*d_output)(i, 0) = 2.0 * r * inv_n;
            }
            break;
        }
        case TaskKind::kMultiClass: {
            const std::size_t classes = output.cols();
            for (std::size_t i = 0; i < n; ++i) {
                double mx = output(i, 0);
                for (std::size_t c = 1; c < classes; ++c)
                    mx = std::max(mx, output(i, c));
                double z = 0.0;
                for (std::size_t c = 0; c < classes; ++c)
                    z += std::exp(output(i, c) - mx);
                const int y = batch.label_targets.at(i);
                if (y < 0 || static_cast<std::size_t>(y) >= classes)
                    throw std::invalid_argument("output_loss: label out of range");
                loss += (std::log(z) - (output(i, y) - mx)) * inv_n;
                if (d_output)
                    for (std::size_t c = 0; c < classes; ++c) {
                        const double p = std::exp(output(i, c) - mx) / z;
                        (*d_output)(i, c) =
                            (p - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) * inv_n;
                    }
            }
            break;
        }
    }
    if (!std::isfinite(loss)) throw NumericOverflow("non-finite loss");
    return loss;
}

SequenceModel::SequenceModel(ModelSpec spec) : spec_(spec) {
    if (spec_.cell == CellType::kVanilla && spec_.layers != 1)
        throw std::invalid_argument("vanilla RNN supports a single layer");
    if (spec_.layers < 1) throw std::invalid_argument("model: layers must be >= 1");
}

ParamSet SequenceModel::init_params(Rng& rng) const {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec_.hidden_dim));
    auto uniform_matrix = [&](std::size_t r, std::size_t c) {
        Matrix m(r, c);
        for (double& v : m.raw()) v = rng.uniform(-bound, bound);
        return m;
    };
    ParamSet ps;
    if (spec_.cell == CellType::kVanilla) {
        ps.add("W", uniform_matrix(spec_.hidden_dim, spec_.input_dim));
        ps.add("U", uniform_matrix(spec_.hidden_dim, spec_.hidden_dim));
        ps.add("b", Matrix(1, spec_.hidden_dim));
    } else {
        for (std::size_t l = 0; l < spec_.layers; ++l) {
            const std::size_t in = l == 0 ? spec_.input_dim : spec_.hidden_dim;
            const std::string suffix = std::to_string(l + 1);
            ps.add("W" + suffix, uniform_matrix(spec_.hidden_dim, in));
            Matrix u(1, spec_.hidden_dim);
            for (double& v : u.raw()) v = rng.uniform(0.0, 1.0);
            ps.add("u" + suffix, std::move(u));
            ps.add("b" + suffix, Matrix(1, spec_.hidden_dim));
        }
    }
    ps.add("V", uniform_matrix(spec_.output_dim, spec_.hidden_dim));
    ps.add("c", Matrix(1, spec_.output_dim));
    return ps;
}

ForwardTrace SequenceModel::forward(const ParamSet& params,
                                    const SequenceBatch& batch,
                                    const HiddenState* z0) const {
    check_batch(spec_, batch);
    return spec_.cell == CellType::kVanilla ? forward_vanilla(params, batch, z0)
                                            : forward_indrnn(params, batch, z0);
}

ForwardTrace SequenceModel::forward_vanilla(const ParamSet& params,
                                            const SequenceBatch& batch,
                                            const HiddenState* z0) const {
    const Matrix& w = params.get("W");
    const Matrix& u = params.get("U");
    const Matrix& b = params.get("b");
    const std::size_t n = batch.batch_size();

    ForwardTrace trace;
    trace.states.resize(1);
    trace.states[0].push_back(initial_state(z0, 0, n, spec_.hidden_dim));
    for (std::size_t m = 0; m < batch.time_steps(); ++m) {
        Matrix pre = matmul(batch.steps[m], w, false, true);
        const Matrix rec = matmul(trace.states[0].back(), u, false, true);
        for (std::size_t i = 0; i < pre.size(); ++i) pre.raw()[i] += rec.raw()[i];
        add_row_broadcast(pre, b);
        for (double& v : pre.raw()) v = std::tanh(v);
        check_finite(pre, m + 1);
        trace.states[0].push_back(std::move(pre));
    }
    trace.output = matmul(trace.states[0].back(), params.get("V"), false, true);
    add_row_broadcast(trace.output, params.get("c"));
    check_finite(trace.output, batch.time_steps());
    trace.loss = output_loss(trace.output, batch, nullptr);
    return trace;
}

ForwardTrace SequenceModel::forward_indrnn(const ParamSet& params,
                                           const SequenceBatch& batch,
                                           const HiddenState* z0) const {
    const std::size_t n = batch.batch_size();
    const std::size_t steps = batch.time_steps();

    ForwardTrace trace;
    trace.states.resize(spec_.layers);
    for (std::size_t l = 0; l < spec_.layers; ++l)
        trace.states[l].push_back(initial_state(z0, l, n, spec_.hidden_dim));

    for (std::size_t m = 0; m < steps; ++m) {
        const Matrix* below = &batch.steps[m];
        for (std::size_t l = 0; l < spec_.layers; ++l) {
            const std::string suffix = std::to_string(l + 1);
            const Matrix& w = params.get("W" + suffix);
            const Matrix& u = params.get("u" + suffix);
            const Matrix& b = params.get("b" + suffix);
            Matrix pre = matmul(*below, w, false, true);
            const Matrix& prev = trace.states[l].back();
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < spec_.hidden_dim; ++c)
                    pre(r, c) += u(0, c) * prev(r, c) + b(0, c);
            for (double& v : pre.raw()) v = std::max(v, 0.0);
            check_finite(pre, m + 1);
            trace.states[l].push_back(std::move(pre));
            below = &trace.states[l].back();
        }
    }
    trace.output = matmul(trace.states.back().back(), params.get("V"), false, true);
    add_row_broadcast(trace.output, params.get("c"));
    check_finite(trace.output, steps);
    trace.loss = output_loss(trace.output, batch, nullptr);
    return trace;
}

SequenceModel::BpttResult SequenceModel::bptt(const ParamSet& params,
                                              const SequenceBatch& batch,
                                              const HiddenState* z0) const {
    check_batch(spec_, batch);
    return spec_.cell == CellType::kVanilla ? bptt_vanilla(params, batch, z0)
                                            : bptt_indrnn(params, batch, z0);
}

SequenceModel::BpttResult SequenceModel::bptt_vanilla(
    const ParamSet& params, const SequenceBatch& batch,
    const HiddenState* z0) const {
    ForwardTrace trace = forward_vanilla(params, batch, z0);
    const auto& z = trace.states[0];
    const std::size_t steps = batch.time_steps();

    Matrix d_out;
    const double loss = output_loss(trace.output, batch, &d_out);

    ParamSet grad = params.zeros_like();
    grad.get("V") = matmul(d_out, z[steps], true, false);
    grad.get("c") = colsum(d_out);

    Matrix dz = matmul(d_out, params.get("V"), false, false);
    Matrix& dw = grad.get("W");
    Matrix& du = grad.get("U");
    Matrix& db = grad.get("b");
    for (std::size_t m = steps; m >= 1; --m) {
        // d(pre) = dz * tanh'(pre), with tanh' = 1 - z^2
        Matrix dpre = dz;
        for (std::size_t i = 0; i < dpre.size(); ++i)
            dpre.raw()[i] *= 1.0 - z[m].raw()[i] * z[m].raw()[i];
        Matrix gw = matmul(dpre, batch.steps[m - 1], true, false);
        Matrix gu = matmul(dpre, z[m - 1], true, false);
        for (std::size_t i = 0; i < gw.size(); ++i) dw.raw()[i] += gw.raw()[i];
        for (std::size_t i = 0; i < gu.size(); ++i) du.raw()[i] += gu.raw()[i];
        const Matrix gb = colsum(dpre);
        for (std::size_t i = 0; i < gb.size(); ++i) db.raw()[i] += gb.raw()[i];
        dz = matmul(dpre, params.get("U"), false, false);
    }
    return {loss, std::move(grad), trace.final_state()};
}

SequenceModel::BpttResult SequenceModel::bptt_indrnn(
    const ParamSet& params, const SequenceBatch& batch,
    const HiddenState* z0) const {
    ForwardTrace trace = forward_indrnn(params, batch, z0);
    const std::size_t steps = batch.time_steps();
    const std::size_t n = batch.batch_size();
    const std::size_t hid = spec_.hidden_dim;

    Matrix d_out;
    const double loss = output_loss(trace.output, batch, &d_out);

    ParamSet grad = params.zeros_like();
    grad.get("V") = matmul(d_out, trace.states.back()[steps], true, false);
    grad.get("c") = colsum(d_out);

    // dz[l][m] accumulates contributions from above layers and later times.
    std::vector<std::vector<Matrix>> dz(spec_.layers);
    for (std::size_t l = 0; l < spec_.layers; ++l)
        dz[l].assign(steps + 1, Matrix(n, hid));
    dz.back()[steps] = matmul(d_out, params.get("V"), false, false);

    for (std::size_t l = spec_.layers; l >= 1; --l) {
        const std::string suffix = std::to_string(l);
        const Matrix& w = params.get("W" + suffix);
        const Matrix& u = params.get("u" + suffix);
        Matrix& gw = grad.get("W" + suffix);
        Matrix& gu = grad.get("u" + suffix);
        Matrix& gb = grad.get("b" + suffix);
        const auto& z = trace.states[l - 1];
        for (std::size_t m = steps; m >= 1; --m) {
            // relu' taken as 1 where the activation is positive
            Matrix dpre = dz[l - 1][m];
            for (std::size_t i = 0; i < dpre.size(); ++i)
                if (z[m].raw()[i] <= 0.0) dpre.raw()[i] = 0.0;

            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < hid; ++c) {
                    gu(0, c) += dpre(r, c) * z[m - 1](r, c);
                    gb(0, c) += dpre(r, c);
                    dz[l - 1][m - 1](r, c) += dpre(r, c) * u(0, c);
                }
            const Matrix& below =
                l == 1 ? batch.steps[m - 1] : trace.states[l - 2][m];
            Matrix gwm = matmul(dpre, below, true, false);
            for (std::size_t i = 0; i < gwm.size(); ++i)
                gw.raw()[i] += gwm.raw()[i];
            if (l > 1) {
                Matrix dbelow = matmul(dpre, w, false, false);
                for (std::size_t i = 0; i < dbelow.size(); ++i)
                    dz[l - 2][m].raw()[i] += dbelow.raw()[i];
            }
        }
    }
    return {loss, std::move(grad), trace.final_state()};
}

double SequenceModel::mean_loss(const ParamSet& params,
                                const SequenceBatch& batch) const {
    constexpr std::size_t kChunk = 256;
    const std::size_t n = batch.batch_size();
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += kChunk) {
        std::vector<std::size_t> rows;
        for (std::size_t i = start; i < std::min(start + kChunk, n); ++i)
            rows.push_back(i);
        const SequenceBatch sub = batch.select(rows);
        total += forward(params, sub).loss * static_cast<double>(sub.batch_size());
    }
    return total / static_cast<double>(n);
}

double SequenceModel::accuracy(const ParamSet& params,
                               const SequenceBatch& batch) const {
    if (batch.task == TaskKind::kRegression)
        throw std::invalid_argument("accuracy: undefined for regression tasks");
    constexpr std::size_t kChunk = 256;
    const std::size_t n = batch.batch_size();
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += kChunk) {
        std::vector<std::size_t> rows;
        for (std::size_t i = start; i < std::min(start + kChunk, n); ++i)
            rows.push_back(i);
        const SequenceBatch sub = batch.select(rows);
        const ForwardTrace trace = forward(params, sub);
        for (std::size_t i = 0; i < sub.batch_size(); ++i) {
            int pred;
            if (batch.task == TaskKind::kBinary) {
                pred = trace.output(i, 0) > 0.5 ? 1 : 0;
            } else {
                pred = 0;
                for (std::size_t c = 1; c < trace.output.cols(); ++c)
                    if (trace.output(i, c) > trace.output(i, pred)) pred = static_cast<int>(c);
            }
            if (pred == sub.label_targets[i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace fwrnn
