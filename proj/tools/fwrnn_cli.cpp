#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fwrnn/harness.hpp"

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitDataError = 2;
constexpr int kExitNumericAbort = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string dataset_root;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--dataset-root", opts.dataset_root,
                    "directory holding dataset files (default: "
                    "$FWRNN_DATASET_ROOT)");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t s) {
            opts.seed = s;
            opts.seed_set = true;
        },
        "experiment seed");
    cmd->add_option("--override", opts.overrides,
                    "config override key=value (repeatable)");
}

fwrnn::ExperimentConfig resolve_config(const CommonOpts& opts) {
    fwrnn::ExperimentConfig cfg;
    if (!opts.config_path.empty())
        cfg = fwrnn::ExperimentConfig::parse_file(opts.config_path);
    if (!opts.dataset_root.empty()) {
        cfg.dataset_root = opts.dataset_root;
    } else if (cfg.dataset_root.empty()) {
        if (const char* env = std::getenv("FWRNN_DATASET_ROOT"))
            cfg.dataset_root = env;
    }
    if (opts.seed_set) {
        cfg.seed = opts.seed;
        cfg.train.seed = opts.seed;
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    for (const auto& ov : opts.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw fwrnn::ConfigError("override must be key=value: " + ov);
        std::string key = ov.substr(0, eq);
        std::string value = ov.substr(eq + 1);
        auto trim = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
                s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
                s.pop_back();
        };
        trim(key);
        trim(value);
        cfg.set_key(key, value);
    }
    cfg.train.seed = cfg.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frank-Wolfe RNN training benchmark"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* train_cmd = app.add_subcommand("train", "run one experiment");
    add_common(train_cmd, opts);

    auto* grid_cmd = app.add_subcommand("grid", "run a hyperparameter grid");
    add_common(grid_cmd, opts);
    std::string grid_file;
    grid_cmd->add_option("--grid", grid_file, "grid file (key = v1, v2, ...)")
        ->required();

    auto* plot_cmd = app.add_subcommand("plot", "render metric CSVs to SVG");
    std::vector<std::string> plot_inputs;
    std::string plot_out = "curves.svg";
    plot_cmd->add_option("inputs", plot_inputs, "label=metrics.csv pairs")
        ->required();
    plot_cmd->add_option("--out", plot_out, "output SVG path");

    auto* diag_cmd = app.add_subcommand(
        "diag", "summarize angle statistics from a metrics.csv");
    std::string diag_metrics;
    diag_cmd->add_option("--metrics", diag_metrics, "metrics.csv path")
        ->required();

    auto* gen_cmd = app.add_subcommand("gen-data", "generate a dataset cache");
    add_common(gen_cmd, opts);

    auto* eval_cmd =
        app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval_cmd, opts);
    std::string checkpoint;
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint.bin path")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            const auto cfg = resolve_config(opts);
            const auto result = fwrnn::run_experiment(cfg);
            if (!result.records.empty()) {
                const auto& last = result.records.back();
                std::cout << "final train_loss=" << last.train_loss
                          << " test_metric=" << last.test_metric << "\n";
            }
            std::cout << "wrote " << cfg.out_dir << "/metrics.csv\n";
        } else if (grid_cmd->parsed()) {
            const auto cfg = resolve_config(opts);
            fwrnn::run_grid(cfg, grid_file);
            std::cout << "wrote " << cfg.out_dir << "/summary.csv\n";
        } else if (plot_cmd->parsed()) {
            std::vector<std::string> labels, paths;
            for (const auto& in : plot_inputs) {
                const auto eq = in.find('=');
                if (eq == std::string::npos)
                    throw fwrnn::ConfigError("plot input must be label=csv: " + in);
                labels.push_back(in.substr(0, eq));
                paths.push_back(in.substr(eq + 1));
            }
            std::ofstream os(plot_out);
            if (!os) throw std::runtime_error("cannot write " + plot_out);
            os << fwrnn::render_curves_svg(paths, labels);
            std::cout << "wrote " << plot_out << "\n";
        } else if (diag_cmd->parsed()) {
            const auto records = fwrnn::read_metrics_csv(diag_metrics);
            std::vector<fwrnn::AngleRecord> angles;
            for (const auto& r : records)
                if (std::isfinite(r.angle_mean_deg))
                    angles.push_back({r.epoch, r.angle_mean_deg});
            const auto s = fwrnn::summarize_angles(angles);
            std::cout << "epochs_with_angle=" << s.counted
                      << " mean_deg=" << s.mean_deg
                      << " frac_within_45=" << s.frac_within_45 << "\n";
        } else if (gen_cmd->parsed()) {
            const auto cfg = resolve_config(opts);
            const auto data = cfg.load_dataset();
            std::filesystem::create_directories(cfg.out_dir);
            fwrnn::save_batch(data.train, cfg.out_dir + "/train.batch");
            fwrnn::save_batch(data.test, cfg.out_dir + "/test.batch");
            std::cout << "wrote " << cfg.out_dir << "/{train,test}.batch ("
                      << data.name << ", " << data.metadata << ")\n";
        } else if (eval_cmd->parsed()) {
            const auto cfg = resolve_config(opts);
            const auto data = cfg.load_dataset();
            const fwrnn::SequenceModel model(cfg.model_spec(data));
            const auto params = fwrnn::ParamSet::load(checkpoint);
            const double loss = model.mean_loss(params, data.test);
            std::cout << "test_loss=" << loss;
            if (data.test.task != fwrnn::TaskKind::kRegression)
                std::cout << " test_accuracy=" << model.accuracy(params, data.test);
            std::cout << "\n";
        }
    } catch (const fwrnn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const fwrnn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const fwrnn::NumericAbort& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return kExitNumericAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return 0;
}
