#include "q2sql/matrix.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace q2sql {

static void check_mm(const Mat& a, const Mat& b, const char* what) {
  if (a.cols != b.rows)
    throw std::invalid_argument(std::string(what) + ": inner dimensions disagree (" +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * " +
                                std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
}

namespace serial {

void matmul(const Mat& a, const Mat& b, Mat& out) {
  check_mm(a, b, "matmul");
  out = Mat(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.v[static_cast<size_t>(i) * a.cols];
    double* orow = &out.v[static_cast<size_t>(i) * b.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.v[static_cast<size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn_acc: row counts disagree");
  for (int i = 0; i < a.cols; ++i)
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.rows; ++k) s += a.at(k, i) * b.at(k, j);
      out.at(i, j) += s;
    }
}

void matmul_nt_acc(const Mat& a, const Mat& b, Mat& out) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_nt_acc: col counts disagree");
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(j, k);
      out.at(i, j) += s;
    }
}

}  // namespace serial

namespace kernels {

void matmul(const Mat& a, const Mat& b, Mat& out) {
  check_mm(a, b, "matmul");
  out = Mat(a.rows, b.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.v[static_cast<size_t>(i) * a.cols];
    double* orow = &out.v[static_cast<size_t>(i) * b.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.v[static_cast<size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

void matmul_tn(const Mat& a, const Mat& b, Mat& out) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: row counts disagree");
  out = Mat(a.cols, b.cols);
  matmul_tn_acc(a, b, out);
}

void matmul_acc(const Mat& a, const Mat& b, Mat& out) {
  check_mm(a, b, "matmul_acc");
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.v[static_cast<size_t>(i) * a.cols];
    double* orow = &out.v[static_cast<size_t>(i) * b.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.v[static_cast<size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn_acc: row counts disagree");
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.cols; ++i)
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.rows; ++k) s += a.at(k, i) * b.at(k, j);
      out.at(i, j) += s;
    }
}

void matmul_nt_acc(const Mat& a, const Mat& b, Mat& out) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_nt_acc: col counts disagree");
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(j, k);
      out.at(i, j) += s;
    }
}

}  // namespace kernels

Mat matmul(const Mat& a, const Mat& b) {
  Mat out;
  kernels::matmul(a, b, out);
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

void add_inplace(Mat& a, const Mat& b, double scale) {
  if (!a.same_shape(b)) throw std::invalid_argument("add_inplace: shape mismatch");
  for (size_t i = 0; i < a.v.size(); ++i) a.v[i] += scale * b.v[i];
}

double dot(const Mat& a, const Mat& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

double l2_norm_sq(const Mat& a) {
  double s = 0.0;
  for (double x : a.v) s += x * x;
  return s;
}

Mat softmax_vec(const Mat& in) {
  if (in.size() == 0) throw std::invalid_argument("softmax: empty vector");
  Mat out(in.rows, in.cols);
  double mx = in.v[0];
  for (double x : in.v)
    if (x > mx) mx = x;
  double z = 0.0;
  for (size_t i = 0; i < in.v.size(); ++i) {
    out.v[i] = std::exp(in.v[i] - mx);
    z += out.v[i];
  }
  for (double& x : out.v) x /= z;
  return out;
}

bool all_finite(const Mat& a) {
  for (double x : a.v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace q2sql
