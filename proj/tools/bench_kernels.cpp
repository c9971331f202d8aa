// Compares the OpenMP matmul kernels against the serial reference.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "q2sql/matrix.hpp"
#include "q2sql/rng.hpp"

using namespace q2sql;

namespace {

Mat random_mat(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (auto& x : m.v) x = rng.uniform(-1.0, 1.0);
  return m;
}

template <typename F>
double time_ms(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  Rng rng(7);
  std::printf("%-10s %12s %12s %10s\n", "size", "omp (ms)", "serial (ms)", "max |d|");
  for (int n : {64, 128, 256, 512}) {
    const Mat a = random_mat(n, n, rng);
    const Mat b = random_mat(n, n, rng);
    Mat out_omp(n, n), out_ser(n, n);
    const int reps = n <= 128 ? 20 : 5;
    const double t_omp = time_ms([&] { kernels::matmul(a, b, out_omp); }, reps);
    const double t_ser = time_ms([&] { serial::matmul(a, b, out_ser); }, reps);
    double max_diff = 0.0;
    for (size_t i = 0; i < out_omp.v.size(); ++i)
      max_diff = std::max(max_diff, std::abs(out_omp.v[i] - out_ser.v[i]));
    std::printf("%-10d %12.3f %12.3f %10.2e\n", n, t_omp, t_ser, max_diff);
  }
  return 0;
}
