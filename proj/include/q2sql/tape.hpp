#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "q2sql/matrix.hpp"

namespace q2sql {

// Reverse-mode autodiff over Mat values. One Tape per training example;
// nodes are recorded in forward (topological) order and replayed in
// reverse by backward().
struct VarNode {
  Mat val;
  Mat grad;
  bool needs_grad = false;

  Mat& g() {
    if (grad.rows == 0) grad = Mat(val.rows, val.cols);
    return grad;
  }
};
using Var = std::shared_ptr<VarNode>;

class Tape {
 public:
  Var leaf(Mat m, bool needs_grad = false);
  Var zeros(int rows, int cols) { return leaf(Mat(rows, cols), false); }

  Var matmul(const Var& a, const Var& b);
  Var matmul_tn(const Var& a, const Var& b);  // a^T * b
  Var add(const Var& a, const Var& b);        // elementwise, same shape
  Var mul(const Var& a, const Var& b);        // elementwise, same shape
  Var div(const Var& a, const Var& b);        // elementwise, same shape
  Var affine(const Var& w, const Var& x, const Var& b);  // w*x + b
  Var scalar_affine(const Var& x, double a, double b);   // a*x + b elementwise
  Var tanh_(const Var& a);
  Var sigmoid_(const Var& a);
  Var exp_(const Var& a);
  Var log_(const Var& a, double floor = 0.0);
  Var softmax(const Var& a);                  // vector, max-subtracted
  Var concat_rows(const std::vector<Var>& xs);   // stack column vectors
  Var concat_cols(const std::vector<Var>& xs);   // columns side by side
  Var slice_rows(const Var& a, int r0, int r1);  // rows [r0, r1)
  Var row_as_col(const Var& a, int r);           // row r as column vector
  Var pick(const Var& a, int i);                 // flat element as 1x1
  Var sum(const Var& a);                         // 1x1
  Var mean(const Var& a);                        // 1x1
  // mul/div every element of a by the 1x1 scalar s
  Var scale_by(const Var& a, const Var& s);
  Var div_by(const Var& a, const Var& s);
  // out[ids[j]] += a[j]; out has `size` rows. ids.size() == a.size().
  Var scatter_sum(const Var& a, const std::vector<int>& ids, int size);

  // Seeds root with gradient 1 and replays the tape in reverse. Root must
  // be a 1x1 scalar.
  void backward(const Var& root);

  size_t num_nodes() const { return ops_.size(); }

 private:
  Var make(Mat val, bool needs_grad);
  std::vector<std::function<void()>> ops_;
};

}  // namespace q2sql
