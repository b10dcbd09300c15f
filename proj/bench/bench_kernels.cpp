// Times the OpenMP matmul kernels against their serial references and
// reports GFLOP/s plus the max |difference| (expected exactly 0; the two
// paths share the same per-row loop bodies). Informational only; the
// bitwise-equality claim is asserted under ctest.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "silo/matrix.hpp"
#include "silo/rng.hpp"
#include "silo/threads.hpp"

namespace {

using silo::Matrix;

double best_ms(const std::function<Matrix()>& f, int reps, Matrix& out) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    out = f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
  }
  return worst;
}

struct Case {
  const char* name;
  std::size_t m, k, n;
};

}  // namespace

int main() {
  silo::apply_thread_env();
  std::printf("threads: %d\n", silo::max_threads());
  std::printf("%-22s %12s %12s %10s %10s\n", "case", "serial GF/s",
              "omp GF/s", "speedup", "max|diff|");

  const Case cases[] = {
      {"matmul 256x256x256", 256, 256, 256},
      {"matmul 512x512x512", 512, 512, 512},
      {"batch fwd 256x784x64", 256, 784, 64},
      {"batch bwd 128x1024x256", 128, 1024, 256},
  };
  const int reps = 5;

  silo::Rng rng(12345);
  for (const Case& c : cases) {
    Matrix a = silo::gaussian_matrix(rng, c.m, c.k, 1.0);
    Matrix b = silo::gaussian_matrix(rng, c.k, c.n, 1.0);
    const double flops = 2.0 * static_cast<double>(c.m) *
                         static_cast<double>(c.k) * static_cast<double>(c.n);

    Matrix out_serial, out_omp;
    const double ms_serial =
        best_ms([&] { return silo::matmul_serial(a, b); }, reps, out_serial);
    const double ms_omp =
        best_ms([&] { return silo::matmul(a, b); }, reps, out_omp);

    std::printf("%-22s %12.2f %12.2f %9.2fx %10.3g\n", c.name,
                flops / ms_serial / 1e6, flops / ms_omp / 1e6,
                ms_serial / ms_omp, max_abs_diff(out_serial, out_omp));
  }

  // Gradient-shaped kernels: A^T B and A B^T at an MLP-typical size.
  {
    const std::size_t batch = 256, in = 784, out_n = 64;
    Matrix h = silo::gaussian_matrix(rng, batch, in, 1.0);
    Matrix delta = silo::gaussian_matrix(rng, batch, out_n, 1.0);
    Matrix w = silo::gaussian_matrix(rng, in, out_n, 1.0);
    const double flops_atb = 2.0 * batch * in * out_n;

    Matrix s1, p1;
    const double t_atb_s =
        best_ms([&] { return silo::matmul_at_b_serial(h, delta); }, reps, s1);
    const double t_atb_p =
        best_ms([&] { return silo::matmul_at_b(h, delta); }, reps, p1);
    std::printf("%-22s %12.2f %12.2f %9.2fx %10.3g\n", "at_b 256x784x64",
                flops_atb / t_atb_s / 1e6, flops_atb / t_atb_p / 1e6,
                t_atb_s / t_atb_p, max_abs_diff(s1, p1));

    Matrix s2, p2;
    const double t_abt_s =
        best_ms([&] { return silo::matmul_a_bt_serial(delta, w); }, reps, s2);
    const double t_abt_p =
        best_ms([&] { return silo::matmul_a_bt(delta, w); }, reps, p2);
    std::printf("%-22s %12.2f %12.2f %9.2fx %10.3g\n", "a_bt 256x64x784",
                flops_atb / t_abt_s / 1e6, flops_atb / t_abt_p / 1e6,
                t_abt_s / t_abt_p, max_abs_diff(s2, p2));
  }
  return 0;
}
