#include "silo/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace silo {
namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<unsigned char>& b,
                        std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path,
                       const std::string& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  if (img.size() < 16) throw std::runtime_error("IDX images: truncated header");
  if (lab.size() < 8) throw std::runtime_error("IDX labels: truncated header");

  if (read_be32(img, 0) != 0x00000803u) {
    throw std::runtime_error("IDX images: bad magic number");
  }
  if (read_be32(lab, 0) != 0x00000801u) {
    throw std::runtime_error("IDX labels: bad magic number");
  }

  const std::size_t n = read_be32(img, 4);
  const std::size_t rows = read_be32(img, 8);
  const std::size_t cols = read_be32(img, 12);
  if (rows != 28 || cols != 28) {
    throw std::runtime_error("IDX images: expected 28x28 dimensions");
  }
  if (read_be32(lab, 4) != n) {
    throw std::runtime_error("IDX: image/label count mismatch");
  }
  if (img.size() < 16 + n * 784) {
    throw std::runtime_error("IDX images: truncated data");
  }
  if (lab.size() < 8 + n) {
    throw std::runtime_error("IDX labels: truncated data");
  }

  Dataset ds;
  ds.num_classes = 10;
  ds.features = Matrix(n, 784);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* px = img.data() + 16 + i * 784;
    double* row = ds.features.row(i);
    for (std::size_t j = 0; j < 784; ++j) row[j] = px[j] / 255.0;
    const unsigned char l = lab[8 + i];
    if (l > 9) throw std::runtime_error("IDX labels: label byte > 9");
    ds.labels[i] = l;
  }
  return ds;
}

Dataset load_cifar10_bin(const std::string& path) {
  const auto bytes = read_file(path);
  constexpr std::size_t kRecord = 3073;
  if (bytes.size() % kRecord != 0) {
    throw std::runtime_error(
        "CIFAR-10: file length is not a multiple of 3073");
  }
  const std::size_t n = bytes.size() / kRecord;

  Dataset ds;
  ds.num_classes = 10;
  ds.features = Matrix(n, 3072);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = bytes.data() + i * kRecord;
    if (rec[0] > 9) throw std::runtime_error("CIFAR-10: label byte > 9");
    ds.labels[i] = rec[0];
    double* row = ds.features.row(i);
    for (std::size_t j = 0; j < 3072; ++j) row[j] = rec[1 + j] / 255.0;
  }
  return ds;
}

Dataset make_synthetic_gaussian(Rng& rng, std::size_t n, std::size_t d,
                                std::size_t classes, double sigma_x) {
  if (n == 0 || d == 0 || classes == 0) {
    throw std::invalid_argument("make_synthetic_gaussian: n, d, classes >= 1");
  }
  Rng dir_rng = rng.child(0);
  Rng feat_rng = rng.child(1);

  const Matrix directions = gaussian_matrix(dir_rng, classes, d, 1.0);

  Dataset ds;
  ds.num_classes = classes;
  ds.features = gaussian_matrix(feat_rng, n, d, sigma_x);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = ds.features.row(i);
    int best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double* v = directions.row(c);
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += v[j] * x[j];
      if (c == 0 || s > best_score) {
        best = static_cast<int>(c);
        best_score = s;
      }
    }
    ds.labels[i] = best;
  }
  return ds;
}

std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(p[i - 1], p[rng.below(i)]);
  }
  return p;
}

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.num_classes = ds.num_classes;
  out.features = Matrix(rows.size(), ds.dim());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* src = ds.features.row(rows[i]);
    std::copy(src, src + ds.dim(), out.features.row(i));
    out.labels[i] = ds.labels[rows[i]];
  }
  return out;
}

SplitDataset split_dataset(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.val_fraction > 0.0 &&
        spec.train_fraction + spec.val_fraction < 1.0)) {
    throw std::invalid_argument("split_dataset: fractions must be in (0,1) "
                                "and sum below 1");
  }
  Rng rng(spec.shuffle_seed);
  const auto perm = random_permutation(rng, ds.size());

  const auto n = ds.size();
  const auto n_train =
      static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n));
  const auto n_val =
      static_cast<std::size_t>(spec.val_fraction * static_cast<double>(n));

  std::vector<std::size_t> tr(perm.begin(), perm.begin() + n_train);
  std::vector<std::size_t> va(perm.begin() + n_train,
                              perm.begin() + n_train + n_val);
  std::vector<std::size_t> te(perm.begin() + n_train + n_val, perm.end());

  return SplitDataset{take_rows(ds, tr), take_rows(ds, va), take_rows(ds, te)};
}

BatchStream::BatchStream(const Dataset& ds, std::size_t batch,
                         std::uint64_t epoch_seed)
    : ds_(ds), batch_(batch) {
  if (batch == 0) throw std::invalid_argument("BatchStream: batch must be >= 1");
  Rng rng(epoch_seed);
  order_ = random_permutation(rng, ds.size());
}

bool BatchStream::next(Matrix& x, std::vector<int>& y) {
  if (pos_ >= order_.size()) return false;
  const std::size_t take = std::min(batch_, order_.size() - pos_);
  x = Matrix(take, ds_.dim());
  y.resize(take);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t src = order_[pos_ + i];
    std::copy(ds_.features.row(src), ds_.features.row(src) + ds_.dim(),
              x.row(i));
    y[i] = ds_.labels[src];
  }
  pos_ += take;
  return true;
}

std::size_t BatchStream::batch_count() const {
  return (order_.size() + batch_ - 1) / batch_;
}

BatchStream iterate_batches(const Dataset& ds, std::size_t batch,
                            std::uint64_t epoch_seed) {
  return BatchStream(ds, batch, epoch_seed);
}

}  // namespace silo
