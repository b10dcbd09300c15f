#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace testing {

// Raw byte-level IDX writers (big-endian headers), used both to build valid
// loader inputs and, via write_bytes, malformed ones.
void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b);
void write_idx_images(const std::string& path,
                      const std::vector<std::uint8_t>& pixels, std::size_t n);
void write_idx_labels(const std::string& path,
                      const std::vector<std::uint8_t>& labels);

struct IdxPair {
  std::string images;
  std::string labels;
};

// Deterministic 28x28 ten-class corpus in genuine IDX files: each class is a
// pair of fixed-position intensity blobs plus per-image brightness jitter and
// pixel noise. Linearly separable enough to train a small MLP to high
// accuracy, noisy enough that training dynamics are nontrivial. Labels cycle
// round-robin. Same (dir, n, seed) always produces identical bytes.
IdxPair write_blob_idx(const std::string& dir, const std::string& stem,
                       std::size_t n, std::uint64_t seed);

// Resolves the image corpus for the long-running end-to-end checks: the
// directory named by SILO_MNIST_DIR, else ./data/mnist when it holds the four
// standard files, else a generated blob corpus under ./standin_mnist.
// Returns {train pair, test pair}.
struct Corpus {
  IdxPair train;
  IdxPair test;
  bool standin = false;
};
Corpus resolve_image_corpus();

}  // namespace testing
