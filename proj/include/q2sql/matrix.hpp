#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace q2sql {

// Row-major dense matrix of doubles. Column vectors are n x 1.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
  Mat(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
    if (v.size() != static_cast<size_t>(r) * c) throw std::invalid_argument("Mat: size mismatch");
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

// OpenMP-parallel kernels. Each output element is produced by exactly one
// thread with a serial inner loop, so results are bit-identical to the
// serial reference for any thread count.
namespace kernels {
void matmul(const Mat& a, const Mat& b, Mat& out);
// out = a^T * b
void matmul_tn(const Mat& a, const Mat& b, Mat& out);
// out += a * b
void matmul_acc(const Mat& a, const Mat& b, Mat& out);
// out += a^T * b
void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out);
// out += a * b^T
void matmul_nt_acc(const Mat& a, const Mat& b, Mat& out);
}  // namespace kernels

// Serial reference kernels, kept for testing and benchmarking against the
// OpenMP versions.
namespace serial {
void matmul(const Mat& a, const Mat& b, Mat& out);
void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out);
void matmul_nt_acc(const Mat& a, const Mat& b, Mat& out);
}  // namespace serial

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
void add_inplace(Mat& a, const Mat& b, double scale = 1.0);
double dot(const Mat& a, const Mat& b);
double l2_norm_sq(const Mat& a);
Mat softmax_vec(const Mat& v);  // max-subtracted, column or row vector
bool all_finite(const Mat& a);

}  // namespace q2sql
