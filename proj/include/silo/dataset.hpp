#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "silo/matrix.hpp"
#include "silo/rng.hpp"

namespace silo {

struct Dataset {
  Matrix features;          // n x d
  std::vector<int> labels;  // length n, values in [0, num_classes)
  std::size_t num_classes = 0;

  std::size_t size() const { return features.rows; }
  std::size_t dim() const { return features.cols; }
};

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  std::uint64_t shuffle_seed = 0;
};

struct SplitDataset {
  Dataset train;
  Dataset val;
  Dataset test;
};

// IDX pair (big-endian): images magic 0x00000803 with dims [n, 28, 28],
// labels magic 0x00000801 with dims [n]. Pixels scaled by 1/255 into
// n x 784 rows. Throws on magic/dimension/label-count mismatch or
// truncation.
Dataset load_mnist_idx(const std::string& images_path,
                       const std::string& labels_path);

// CIFAR-10 binary batch: 3073-byte records, 1 label byte (0..9) + 3072
// channel-major pixels, scaled by 1/255 into n x 3072 rows. Throws when the
// file length is not a multiple of 3073 or a label byte exceeds 9. An empty
// file yields an empty dataset.
Dataset load_cifar10_bin(const std::string& path);

// Features i.i.d. N(0, sigma_x^2); label = argmax over `classes` fixed
// random linear scores of the feature row (score directions drawn first from
// rng.child(0), features from rng.child(1)). Deterministic per seed.
Dataset make_synthetic_gaussian(Rng& rng, std::size_t n, std::size_t d,
                                std::size_t classes, double sigma_x);

// Seeded-permutation split into train/val/test; test takes the remainder, so
// the three parts are disjoint and exhaustive.
SplitDataset split_dataset(const Dataset& ds, const SplitSpec& spec);

// Gathers the given rows into a standalone dataset.
Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& rows);

// One epoch of mini-batches in a seeded random order over all n rows; the
// last batch may be short. Two streams with equal (dataset, batch,
// epoch_seed) produce identical batches.
class BatchStream {
 public:
  BatchStream(const Dataset& ds, std::size_t batch, std::uint64_t epoch_seed);

  // Fills the next batch; false at end of epoch.
  bool next(Matrix& x, std::vector<int>& y);

  std::size_t batch_count() const;

 private:
  const Dataset& ds_;
  std::size_t batch_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

BatchStream iterate_batches(const Dataset& ds, std::size_t batch,
                            std::uint64_t epoch_seed);

// Fisher-Yates permutation of 0..n-1 driven by rng.
std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n);

}  // namespace silo
