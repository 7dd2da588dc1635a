#include "fwrnn/data.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fwrnn {

namespace {

std::uint32_t read_be32(std::istream& is, const std::string& path) {
    unsigned char buf[4];
    is.read(reinterpret_cast<char*>(buf), 4);
    if (!is) throw std::runtime_error("data: truncated file " + path);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u64le(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64le(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw std::runtime_error("data: truncated batch cache");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
    return v;
}

void write_f64le(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64le(os, bits);
}

double read_f64le(std::istream& is) {
    const std::uint64_t bits = read_u64le(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

/// Reads an IDX image file into per-image flattened rows.
std::vector<std::vector<double>> read_idx_images(const std::string& path,
                                                 std::size_t& img_rows,
                                                 std::size_t& img_cols) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("mnist: missing file " + path);
    if (read_be32(is, path) != 0x00000803u)
        throw std::runtime_error("mnist: bad magic in " + path +
                                 " (expected image file 0x00000803)");
    const std::size_t n = read_be32(is, path);
    img_rows = read_be32(is, path);
    img_cols = read_be32(is, path);
    std::vector<unsigned char> raw(img_rows * img_cols);
    std::vector<std::vector<double>> images(n);
    for (auto& img : images) {
        is.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(raw.size()));
        if (!is) throw std::runtime_error("mnist: truncated image data in " + path);
        img.resize(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i)
            img[i] = static_cast<double>(raw[i]) / 255.0;
    }
    return images;
}

std::vector<int> read_idx_labels(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("mnist: missing file " + path);
    if (read_be32(is, path) != 0x00000801u)
        throw std::runtime_error("mnist: bad magic in " + path +
                                 " (expected label file 0x00000801)");
    const std::size_t n = read_be32(is, path);
    std::vector<unsigned char> raw(n);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("mnist: truncated labels in " + path);
    return {raw.begin(), raw.end()};
}

/// Whitespace-delimited numeric matrix, one row per line.
std::vector<std::vector<double>> read_text_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("har: missing file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

SequenceBatch sequences_to_batch(const std::vector<std::vector<double>>& seqs,
                                 std::size_t time_steps, std::size_t dim) {
    SequenceBatch b;
    b.steps.assign(time_steps, Matrix(seqs.size(), dim));
    for (std::size_t i = 0; i < seqs.size(); ++i)
        for (std::size_t m = 0; m < time_steps; ++m)
            for (std::size_t c = 0; c < dim; ++c)
                b.steps[m](i, c) = seqs[i][m * dim + c];
    return b;
}

}  // namespace

SequenceBatch gen_adding_task(std::size_t n, std::size_t time_steps, Rng& rng,
                              bool interval_sum) {
    if (time_steps < 2)
        throw std::invalid_argument("adding task: need at least 2 time steps");
    SequenceBatch b;
    b.task = TaskKind::kRegression;
    b.steps.assign(time_steps, Matrix(n, 2));
    const std::size_t half = time_steps / 2;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < time_steps; ++m)
            b.steps[m](i, 0) = rng.uniform();
        const std::size_t i1 = rng.uniform_int(half);
        const std::size_t i2 = half + rng.uniform_int(time_steps - half);
        b.steps[i1](i, 1) = 1.0;
        b.steps[i2](i, 1) = 1.0;
        double target;
        if (interval_sum) {
            target = 0.0;
            for (std::size_t m = i1; m <= i2; ++m) target += b.steps[m](i, 0);
        } else {
            target = b.steps[i1](i, 0) + b.steps[i2](i, 0);
        }
        b.real_targets.push_back(target);
    }
    return b;
}

Dataset make_adding_dataset(std::size_t n_train, std::size_t n_test,
                            std::size_t time_steps, std::uint64_t seed,
                            bool interval_sum) {
    Dataset d;
    d.name = "adding";
    Rng train_rng(Rng::split_seed(seed, 0));
    Rng test_rng(Rng::split_seed(seed, 1));
    d.train = gen_adding_task(n_train, time_steps, train_rng, interval_sum);
    d.test = gen_adding_task(n_test, time_steps, test_rng, interval_sum);
    d.metadata = interval_sum ? "label=interval-sum" : "label=marked-entry-sum";
    return d;
}

Dataset load_mnist_pixel(const std::string& dir,
                         std::optional<std::uint64_t> permute_seed,
                         std::size_t downsample) {
    if (downsample < 1)
        throw std::invalid_argument("mnist: downsample factor must be >= 1");
    std::size_t ir = 0, ic = 0;
    auto train_imgs = read_idx_images(dir + "/train-images-idx3-ubyte", ir, ic);
    auto train_labels = read_idx_labels(dir + "/train-labels-idx1-ubyte");
    std::size_t tr = 0, tc = 0;
    auto test_imgs = read_idx_images(dir + "/t10k-images-idx3-ubyte", tr, tc);
    auto test_labels = read_idx_labels(dir + "/t10k-labels-idx1-ubyte");
    if (tr != ir || tc != ic)
        throw std::runtime_error("mnist: train/test image shapes differ");
    if (train_imgs.size() != train_labels.size() ||
        test_imgs.size() != test_labels.size())
        throw std::runtime_error("mnist: image/label count mismatch");
    if (ir % downsample != 0 || ic % downsample != 0)
        throw std::invalid_argument("mnist: downsample must divide image size");

    const std::size_t pr = ir / downsample, pc = ic / downsample;
    const std::size_t steps = pr * pc;
    auto pool = [&](const std::vector<double>& img) {
        std::vector<double> out(steps, 0.0);
        for (std::size_t r = 0; r < ir; ++r)
            for (std::size_t c = 0; c < ic; ++c)
                out[(r / downsample) * pc + c / downsample] += img[r * ic + c];
        const double inv = 1.0 / static_cast<double>(downsample * downsample);
        for (double& v : out) v *= inv;
        return out;
    };
    for (auto& img : train_imgs) img = pool(img);
    for (auto& img : test_imgs) img = pool(img);

    // One fixed pixel-order permutation, shared by train and test.
    if (permute_seed) {
        Rng prng(*permute_seed);
        const auto perm = prng.permutation(steps);
        auto apply = [&](std::vector<double>& img) {
            std::vector<double> p(steps);
            for (std::size_t i = 0; i < steps; ++i) p[i] = img[perm[i]];
            img = std::move(p);
        };
        for (auto& img : train_imgs) apply(img);
        for (auto& img : test_imgs) apply(img);
    }

    // Global zero-mean / unit-variance from train pixels.
    double mean = 0.0;
    std::size_t count = 0;
    for (const auto& img : train_imgs)
        for (double v : img) {
            mean += v;
            ++count;
        }
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& img : train_imgs)
        for (double v : img) var += (v - mean) * (v - mean);
    var /= static_cast<double>(count);
    const double inv_sd = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    auto normalize = [&](std::vector<double>& img) {
        for (double& v : img) v = (v - mean) * inv_sd;
    };
    for (auto& img : train_imgs) normalize(img);
    for (auto& img : test_imgs) normalize(img);

    Dataset d;
    d.name = permute_seed ? "permute-mnist" : "pixel-mnist";
    d.num_classes = 10;
    d.train = sequences_to_batch(train_imgs, steps, 1);
    d.train.task = TaskKind::kMultiClass;
    d.train.label_targets = std::move(train_labels);
    d.test = sequences_to_batch(test_imgs, steps, 1);
    d.test.task = TaskKind::kMultiClass;
    d.test.label_targets = std::move(test_labels);
    {
        std::ostringstream md;
        md << "norm=global train mean/var; mean=" << mean << " var=" << var
           << "; downsample=" << downsample;
        if (permute_seed) md << "; permute_seed=" << *permute_seed;
        d.metadata = md.str();
    }
    return d;
}

Dataset load_har2(const std::string& dir, std::size_t expect_train,
                  std::size_t expect_test) {
    static const char* kChannels[] = {
        "body_acc_x",  "body_acc_y",  "body_acc_z",
        "body_gyro_x", "body_gyro_y", "body_gyro_z",
        "total_acc_x", "total_acc_y", "total_acc_z"};
    constexpr std::size_t kNumChannels = 9;
    constexpr std::size_t kSteps = 128;
    
    auto load_split = [&](const std::string& split, std::size_t expected_n) {
        std::vector<std::vector<std::vector<double>>> channels;  // [ch][n][128]
        for (const char* ch : kChannels) {
            const std::string path = dir + "/" + split + "/Inertial Signals/" +
                                     ch + "_" + split + ".txt";
            auto rows = read_text_matrix(path);
            if (rows.size() != expected_n)
                throw std::runtime_error(
                    "har: " + path + " has " + std::to_string(rows.size()) +
                    " rows, expected " + std::to_string(expected_n));
            for (const auto& r : rows)
                if (r.size() != kSteps)
                    throw std::runtime_error("har: " + path +
                                             " row length != 128");
            channels.push_back(std::move(rows));
        }
        SequenceBatch b;
        b.task = TaskKind::kBinary;
        const std::size_t n = channels[0].size();
        b.steps.assign(kSteps, Matrix(n, kNumChannels));
        for (std::size_t m = 0; m < kSteps; ++m)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < kNumChannels; ++c)
                    b.steps[m](i, c) = channels[c][i][m];

        auto labels = read_text_matrix(dir + "/" + split + "/y_" + split + ".txt");
        if (labels.size() != n)
            throw std::runtime_error("har: label count mismatch in " + split);
        for (const auto& row : labels) {
            const int y = static_cast<int>(row.at(0));
            if (y < 1 || y > 6)
                throw std::runtime_error("har: activity label out of range 1..6");
            // 1..3 walking variants -> class 1, 4..6 static postures -> class 0
            b.label_targets.push_back(y <= 3 ? 1 : 0);
        }
        return b;
    };

    Dataset d;
    d.name = "har2";
    d.num_classes = 2;
    d.train = load_split("train", expect_train);
    d.test = load_split("test", expect_test);

    // Per-channel normalization from train statistics.
    std::vector<double> mean(kNumChannels, 0.0), var(kNumChannels, 0.0);
    const double count =
        static_cast<double>(d.train.batch_size() * d.train.time_steps());
    for (const Matrix& x : d.train.steps)
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t c = 0; c < kNumChannels; ++c) mean[c] += x(i, c);
    for (auto& m : mean) m /= count;
    for (const Matrix& x : d.train.steps)
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t c = 0; c < kNumChannels; ++c)
                var[c] += (x(i, c) - mean[c]) * (x(i, c) - mean[c]);
    for (auto& v : var) v /= count;
    for (SequenceBatch* split : {&d.train, &d.test})
        for (Matrix& x : split->steps)
            for (std::size_t i = 0; i < x.rows(); ++i)
                for (std::size_t c = 0; c < kNumChannels; ++c)
                    x(i, c) = (x(i, c) - mean[c]) /
                              (var[c] > 0.0 ? std::sqrt(var[c]) : 1.0);

    d.metadata =
        "classes: {walking, upstairs, downstairs}->1, {sitting, standing, "
        "laying}->0; norm=per-channel train mean/var";
    return d;
}

SequenceBatch add_gaussian_noise(const SequenceBatch& batch, double variance,
                                 Rng& rng) {
    if (variance < 0.0)
        throw std::invalid_argument("add_gaussian_noise: negative variance");
    SequenceBatch out = batch;
    if (variance == 0.0) return out;
    const double sd = std::sqrt(variance);
    // Fixed draw order: time step, then sample, then channel.
    for (Matrix& x : out.steps)
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t c = 0; c < x.cols(); ++c)
                x(i, c) += sd * rng.normal();
    return out;
}

void save_batch(const SequenceBatch& batch, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("data: cannot open " + path);
    os.write("FWBATCH1", 8);
    write_u64le(os, static_cast<std::uint64_t>(batch.task));
    write_u64le(os, batch.time_steps());
    write_u64le(os, batch.batch_size());
    write_u64le(os, batch.input_dim());
    write_u64le(os, batch.real_targets.size());
    write_u64le(os, batch.label_targets.size());
    for (const Matrix& x : batch.steps)
        for (double v : x.raw()) write_f64le(os, v);
    for (double v : batch.real_targets) write_f64le(os, v);
    for (int v : batch.label_targets)
        write_u64le(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
    if (!os) throw std::runtime_error("data: write failed for " + path);
}

SequenceBatch load_batch(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("data: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "FWBATCH1", 8) != 0)
        throw std::runtime_error("data: bad magic in " + path);
    SequenceBatch b;
    b.task = static_cast<TaskKind>(read_u64le(is));
    const std::uint64_t steps = read_u64le(is);
    const std::uint64_t n = read_u64le(is);
    const std::uint64_t dim = read_u64le(is);
    const std::uint64_t n_real = read_u64le(is);
    const std::uint64_t n_label = read_u64le(is);
    b.steps.assign(steps, Matrix(n, dim));
    for (Matrix& x : b.steps)
        for (double& v : x.raw()) v = read_f64le(is);
    b.real_targets.resize(n_real);
    for (double& v : b.real_targets) v = read_f64le(is);
    b.label_targets.resize(n_label);
    for (int& v : b.label_targets)
        v = static_cast<int>(static_cast<std::int64_t>(read_u64le(is)));
    return b;
}

}  // namespace fwrnn
