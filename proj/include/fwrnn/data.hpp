#ifndef FWRNN_DATA_HPP_
#define FWRNN_DATA_HPP_

#include <optional>
#include <string>

#include "fwrnn/batch.hpp"
#include "fwrnn/rng.hpp"

namespace fwrnn {

/// A loaded benchmark: train and test splits plus the normalization
/// statistics and loader choices that produced them.
struct Dataset {
    std::string name;
    SequenceBatch train;
    SequenceBatch test;
    std::size_t num_classes = 0;  // 0 for regression
    std::string metadata;         // loader decisions, human readable
};

/// Adding task: channel 0 is U[0,1), channel 1 is all zeros except single
/// ones at random positions i1 (first half) and i2 (second half). The
/// default target is x[i1] + x[i2]; interval_sum instead sums channel 0
/// over [i1, i2].
SequenceBatch gen_adding_task(std::size_t n, std::size_t time_steps, Rng& rng,
                              bool interval_sum = false);

Dataset make_adding_dataset(std::size_t n_train, std::size_t n_test,
                            std::size_t time_steps, std::uint64_t seed,
                            bool interval_sum = false);

/// Pixel-by-pixel MNIST from the standard IDX files under `dir`
/// (train-images-idx3-ubyte etc.). Optionally applies one fixed pixel-order
/// permutation (drawn from permute_seed, shared by train and test) and
/// average-pool downsampling by `downsample` in each image axis before
/// flattening. Pixels are normalized to zero mean / unit variance with
/// global train statistics.
Dataset load_mnist_pixel(const std::string& dir,
                         std::optional<std::uint64_t> permute_seed = {},
                         std::size_t downsample = 1);

/// HAR-2 from the UCI HAR directory layout (train/Inertial Signals etc.):
/// 9 channels x 128 steps, the six activity labels binarized into
/// moving (1) vs static (0), per-channel train-set normalization.
/// The expected split sizes default to the published dataset and are
/// asserted on load.
Dataset load_har2(const std::string& dir, std::size_t expect_train = 7352,
                  std::size_t expect_test = 2947);

/// Adds i.i.d. N(0, variance) to every input entry; targets untouched.
SequenceBatch add_gaussian_noise(const SequenceBatch& batch, double variance,
                                 Rng& rng);

/// Documented binary cache of a SequenceBatch (little-endian, magic
/// "FWBATCH1"); used by `gen-data` and the tests.
void save_batch(const SequenceBatch& batch, const std::string& path);
SequenceBatch load_batch(const std::string& path);

}  // namespace fwrnn

#endif  // FWRNN_DATA_HPP_
