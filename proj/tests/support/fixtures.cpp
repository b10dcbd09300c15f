#include "support/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace testing {
namespace {

void be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("fixture: cannot write " + path);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

void write_idx_images(const std::string& path,
                      const std::vector<std::uint8_t>& pixels, std::size_t n) {
  if (pixels.size() != n * 784) {
    throw std::invalid_argument("fixture: pixel count mismatch");
  }
  std::vector<std::uint8_t> b;
  b.reserve(16 + pixels.size());
  be32(b, 0x00000803u);
  be32(b, static_cast<std::uint32_t>(n));
  be32(b, 28);
  be32(b, 28);
  b.insert(b.end(), pixels.begin(), pixels.end());
  write_bytes(path, b);
}

void write_idx_labels(const std::string& path,
                      const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> b;
  b.reserve(8 + labels.size());
  be32(b, 0x00000801u);
  be32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  write_bytes(path, b);
}

IdxPair write_blob_idx(const std::string& dir, const std::string& stem,
                       std::size_t n, std::uint64_t seed) {
  std::filesystem::create_directories(dir);

  // Digit-like classes with depth of structure. Classes k and k+5 share a
  // bright anchor blob, so the pair is separated only by a constellation of
  // two faint satellite bumps. Each class owns four fixed constellation
  // variants, drawn from a structure-only generator so train and test files
  // share them; samples pick a variant and deform it continuously. The
  // coarse anchor is learnable in a few epochs, the forty constellations
  // over tens of epochs, and the pair-resolving details later still, so
  // validation keeps improving across many pruning cycles instead of
  // saturating in the first one.
  struct Bump {
    double r, c, amp, w;
  };
  const double anchor_pool[5][2] = {
      {8.0, 8.0}, {8.0, 19.0}, {14.0, 13.5}, {19.0, 8.0}, {19.0, 19.0}};

  std::mt19937_64 srng(7);  // structure only, independent of `seed`
  std::uniform_real_distribution<double> sat_radius(4.5, 7.5);
  std::uniform_real_distribution<double> sat_angle(0.0, 6.28318530717958648);
  std::uniform_real_distribution<double> sat_amp(0.45, 1.0);
  std::uniform_real_distribution<double> sat_width(1.5, 2.6);
  std::array<std::array<std::array<Bump, 2>, 4>, 10> modes;
  for (int k = 0; k < 10; ++k) {
    for (int j = 0; j < 4; ++j) {
      for (int b = 0; b < 2; ++b) {
        const double rad = sat_radius(srng);
        const double ang = sat_angle(srng);
        modes[k][j][b] = {anchor_pool[k % 5][0] + rad * std::sin(ang),
                          anchor_pool[k % 5][1] + rad * std::cos(ang),
                          sat_amp(srng), sat_width(srng)};
      }
    }
  }

  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> pick_mode(0, 3);
  std::uniform_real_distribution<double> bright(0.7, 1.15);
  std::uniform_real_distribution<double> anchor_amp(130.0, 200.0);
  std::uniform_real_distribution<double> anchor_width(2.0, 3.0);
  std::normal_distribution<double> sat_jitter(0.0, 1.2);
  std::uniform_real_distribution<double> amp_jitter(0.75, 1.3);
  std::uniform_real_distribution<double> width_jitter(0.85, 1.25);
  std::uniform_int_distribution<int> shift(-2, 2);
  std::normal_distribution<double> noise(0.0, 35.0);

  std::vector<std::uint8_t> pixels(n * 784);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i % 10);
    labels[i] = static_cast<std::uint8_t>(k);
    const double s = bright(gen);
    const double dr0 = shift(gen), dc0 = shift(gen);
    const int j = pick_mode(gen);
    Bump draw[3];
    draw[0] = {anchor_pool[k % 5][0], anchor_pool[k % 5][1],
               anchor_amp(gen) * s, anchor_width(gen)};
    for (int b = 0; b < 2; ++b) {
      const Bump& m = modes[k][j][b];
      draw[b + 1] = {m.r + sat_jitter(gen), m.c + sat_jitter(gen),
                     105.0 * m.amp * amp_jitter(gen) * s,
                     m.w * width_jitter(gen)};
    }
    for (int r = 0; r < 28; ++r) {
      for (int c = 0; c < 28; ++c) {
        double v = 0.0;
        for (const Bump& b : draw) {
          const double dr = r - (b.r + dr0);
          const double dc = c - (b.c + dc0);
          v += b.amp * std::exp(-(dr * dr + dc * dc) / (2.0 * b.w * b.w));
        }
        v += noise(gen);
        v = std::clamp(v, 0.0, 255.0);
        pixels[i * 784 + static_cast<std::size_t>(r) * 28 +
               static_cast<std::size_t>(c)] =
            static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }

  IdxPair p;
  p.images = dir + "/" + stem + "-images-idx3-ubyte";
  p.labels = dir + "/" + stem + "-labels-idx1-ubyte";
  write_idx_images(p.images, pixels, n);
  write_idx_labels(p.labels, labels);
  return p;
}

Corpus resolve_image_corpus() {
  const auto pair_in = [](const std::string& d) {
    Corpus c;
    c.train = {d + "/train-images-idx3-ubyte", d + "/train-labels-idx1-ubyte"};
    c.test = {d + "/t10k-images-idx3-ubyte", d + "/t10k-labels-idx1-ubyte"};
    return c;
  };
  const auto all_present = [](const Corpus& c) {
    namespace fs = std::filesystem;
    return fs::exists(c.train.images) && fs::exists(c.train.labels) &&
           fs::exists(c.test.images) && fs::exists(c.test.labels);
  };

  if (const char* env = std::getenv("SILO_MNIST_DIR")) {
    Corpus c = pair_in(env);
    if (all_present(c)) return c;
    throw std::runtime_error(
        "SILO_MNIST_DIR is set but the four IDX files are not all present");
  }
  {
    Corpus c = pair_in("data/mnist");
    if (all_present(c)) return c;
  }

  Corpus c;
  c.standin = true;
  c.train = write_blob_idx("standin_mnist", "train", 10000, 41);
  c.test = write_blob_idx("standin_mnist", "t10k", 2000, 42);
  return c;
}

}  // namespace testing
