#ifndef FWRNN_HARNESS_HPP_
#define FWRNN_HARNESS_HPP_

#include <map>
#include <string>
#include <vector>

#include "fwrnn/trainer.hpp"

namespace fwrnn {

/// Everything that affects an experiment's results, serializable to a
/// version-stamped key = value text file (see config format in README).
struct ExperimentConfig {
    // dataset
    std::string dataset = "adding";  // adding|pixel-mnist|permute-mnist|har2|noisy-har2
    std::string dataset_root;        // directory for file-backed datasets
    std::size_t adding_train = 2000;
    std::size_t adding_test = 1000;
    std::size_t adding_steps = 100;
    bool adding_interval_sum = false;
    double noise_variance = 2.0;     // noisy-har2
    std::uint64_t permute_seed = 92;  // permute-mnist
    std::size_t mnist_downsample = 1;
    std::uint64_t data_seed = 7;

    // model
    std::string cell = "vanilla";  // vanilla|indrnn
    std::size_t hidden = 128;
    std::size_t layers = 1;

    // training
    TrainConfig train;

    std::uint64_t seed = 1;
    std::string out_dir = "out";

    /// Lossless round-trip text form.
    std::string serialize() const;
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);
    void save(const std::string& path) const;

    /// Applies a "key=value" override (same keys as the file format).
    void set_key(const std::string& key, const std::string& value);

    ModelSpec model_spec(const Dataset& data) const;
    /// Throws std::runtime_error subclasses on missing files; the message
    /// names the file.
    Dataset load_dataset() const;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Fixed metrics.csv schema; wall_seconds is the only column excluded from
/// determinism guarantees.
extern const char* const kMetricsHeader;
void write_metrics_csv(const std::string& path,
                       const std::vector<TrainRecord>& records);
std::vector<TrainRecord> read_metrics_csv(const std::string& path);

/// Runs one experiment; writes metrics.csv, config.resolved, checkpoint.bin,
/// checkpoint.txt and curves.svg into cfg.out_dir. Returns the final record.
TrainResult run_experiment(const ExperimentConfig& cfg);

/// One run per grid point. The grid file holds lines "key = v1, v2, ...";
/// cells run on a 90/10 train/validation split of the training data with
/// deterministic per-cell seeds, and summary.csv ranks by validation metric.
void run_grid(const ExperimentConfig& base, const std::string& grid_path);

/// Self-contained SVG with loss and metric panels, one series per input CSV.
/// Byte-deterministic in its inputs.
std::string render_curves_svg(const std::vector<std::string>& csv_paths,
                              const std::vector<std::string>& labels);

}  // namespace fwrnn

#endif  // FWRNN_HARNESS_HPP_
