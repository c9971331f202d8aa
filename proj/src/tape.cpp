#include "q2sql/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace q2sql {

Var Tape::leaf(Mat m, bool needs_grad) {
  auto n = std::make_shared<VarNode>();
  n->val = std::move(m);
  n->needs_grad = needs_grad;
  return n;
}

Var Tape::make(Mat val, bool needs_grad) {
  auto n = std::make_shared<VarNode>();
  n->val = std::move(val);
  n->needs_grad = needs_grad;
  return n;
}

Var Tape::matmul(const Var& a, const Var& b) {
  Mat out;
  kernels::matmul(a->val, b->val, out);
  Var r = make(std::move(out), a->needs_grad || b->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, b, r] {
      if (a->needs_grad) kernels::matmul_nt_acc(r->g(), b->val, a->g());
      if (b->needs_grad) kernels::matmul_tn_acc(a->val, r->g(), b->g());
    });
  return r;
}

Var Tape::matmul_tn(const Var& a, const Var& b) {
  Mat out;
  kernels::matmul_tn(a->val, b->val, out);
  Var r = make(std::move(out), a->needs_grad || b->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, b, r] {
      if (a->needs_grad) kernels::matmul_nt_acc(b->val, r->g(), a->g());
      if (b->needs_grad) kernels::matmul_acc(a->val, r->g(), b->g());
    });
  return r;
}

Var Tape::add(const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("add: shape mismatch");
  Mat out = a->val;
  add_inplace(out, b->val);
  Var r = make(std::move(out), a->needs_grad || b->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, b, r] {
      if (a->needs_grad) add_inplace(a->g(), r->g());
      if (b->needs_grad) add_inplace(b->g(), r->g());
    });
  return r;
}

Var Tape::mul(const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("mul: shape mismatch");
  Mat out(a->val.rows, a->val.cols);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a->val.v[i] * b->val.v[i];
  Var r = make(std::move(out), a->needs_grad || b->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, b, r] {
      const Mat& g = r->g();
      if (a->needs_grad)
        for (size_t i = 0; i < g.v.size(); ++i) a->g().v[i] += g.v[i] * b->val.v[i];
      if (b->needs_grad)
        for (size_t i = 0; i < g.v.size(); ++i) b->g().v[i] += g.v[i] * a->val.v[i];
    });
  return r;
}

Var Tape::div(const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("div: shape mismatch");
  Mat out(a->val.rows, a->val.cols);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a->val.v[i] / b->val.v[i];
  Var r = make(std::move(out), a->needs_grad || b->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, b, r] {
      const Mat& g = r->g();
      if (a->needs_grad)
        for (size_t i = 0; i < g.v.size(); ++i) a->g().v[i] += g.v[i] / b->val.v[i];
      if (b->needs_grad)
        for (size_t i = 0; i < g.v.size(); ++i)
          b->g().v[i] -= g.v[i] * r->val.v[i] / b->val.v[i];
    });
  return r;
}

Var Tape::affine(const Var& w, const Var& x, const Var& b) { return add(matmul(w, x), b); }

Var Tape::scalar_affine(const Var& x, double a, double b) {
  Mat out(x->val.rows, x->val.cols);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a * x->val.v[i] + b;
  Var r = make(std::move(out), x->needs_grad);
  if (r->needs_grad)
    ops_.push_back([x, r, a] {
      for (size_t i = 0; i < r->g().v.size(); ++i) x->g().v[i] += a * r->g().v[i];
    });
  return r;
}

Var Tape::tanh_(const Var& a) {
  Mat out(a->val.rows, a->val.cols);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = std::tanh(a->val.v[i]);
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r] {
      for (size_t i = 0; i < r->g().v.size(); ++i)
        a->g().v[i] += r->g().v[i] * (1.0 - r->val.v[i] * r->val.v[i]);
    });
  return r;
}

Var Tape::sigmoid_(const Var& a) {
  Mat out(a->val.rows, a->val.cols);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = 1.0 / (1.0 + std::exp(-a->val.v[i]));
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r] {
      for (size_t i = 0; i < r->g().v.size(); ++i)
        a->g().v[i] += r->g().v[i] * r->val.v[i] * (1.0 - r->val.v[i]);
    });
  return r;
}

Var Tape::exp_(const Var& a) {
  Mat out(a->val.rows, a->val.cols);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = std::exp(a->val.v[i]);
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r] {
      for (size_t i = 0; i < r->g().v.size(); ++i) a->g().v[i] += r->g().v[i] * r->val.v[i];
    });
  return r;
}

Var Tape::log_(const Var& a, double floor) {
  Mat out(a->val.rows, a->val.cols);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = std::log(std::max(a->val.v[i], floor));
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r, floor] {
      for (size_t i = 0; i < r->g().v.size(); ++i)
        if (a->val.v[i] > floor) a->g().v[i] += r->g().v[i] / a->val.v[i];
    });
  return r;
}

Var Tape::softmax(const Var& a) {
  Mat out = softmax_vec(a->val);
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r] {
      const Mat& g = r->g();
      double s = 0.0;
      for (size_t i = 0; i < g.v.size(); ++i) s += g.v[i] * r->val.v[i];
      for (size_t i = 0; i < g.v.size(); ++i) a->g().v[i] += r->val.v[i] * (g.v[i] - s);
    });
  return r;
}

Var Tape::concat_rows(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_rows: empty");
  int rows = 0;
  bool ng = false;
  for (const auto& x : xs) {
    if (x->val.cols != 1) throw std::invalid_argument("concat_rows: expects column vectors");
    rows += x->val.rows;
    ng = ng || x->needs_grad;
  }
  Mat out(rows, 1);
  int at = 0;
  for (const auto& x : xs)
    for (int i = 0; i < x->val.rows; ++i) out.v[at++] = x->val.v[i];
  Var r = make(std::move(out), ng);
  if (ng) {
    auto inputs = xs;
    ops_.push_back([inputs, r] {
      int at = 0;
      for (const auto& x : inputs) {
        if (x->needs_grad)
          for (int i = 0; i < x->val.rows; ++i) x->g().v[i] += r->g().v[at + i];
        at += x->val.rows;
      }
    });
  }
  return r;
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: empty");
  int rows = xs[0]->val.rows;
  bool ng = false;
  for (const auto& x : xs) {
    if (x->val.cols != 1 || x->val.rows != rows)
      throw std::invalid_argument("concat_cols: expects equal-length column vectors");
    ng = ng || x->needs_grad;
  }
  int cols = static_cast<int>(xs.size());
  Mat out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out.at(i, j) = xs[j]->val.v[i];
  Var r = make(std::move(out), ng);
  if (ng) {
    auto inputs = xs;
    ops_.push_back([inputs, r, rows] {
      for (int j = 0; j < static_cast<int>(inputs.size()); ++j)
        if (inputs[j]->needs_grad)
          for (int i = 0; i < rows; ++i) inputs[j]->g().v[i] += r->g().at(i, j);
    });
  }
  return r;
}

Var Tape::slice_rows(const Var& a, int r0, int r1) {
  if (r0 < 0 || r1 > a->val.rows || r0 >= r1) throw std::invalid_argument("slice_rows: bad range");
  Mat out(r1 - r0, a->val.cols);
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < a->val.cols; ++j) out.at(i - r0, j) = a->val.at(i, j);
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r, r0] {
      for (int i = 0; i < r->val.rows; ++i)
        for (int j = 0; j < r->val.cols; ++j) a->g().at(r0 + i, j) += r->g().at(i, j);
    });
  return r;
}

Var Tape::row_as_col(const Var& a, int row) {
  if (row < 0 || row >= a->val.rows) throw std::invalid_argument("row_as_col: bad row");
  Mat out(a->val.cols, 1);
  for (int j = 0; j < a->val.cols; ++j) out.v[j] = a->val.at(row, j);
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r, row] {
      for (int j = 0; j < a->val.cols; ++j) a->g().at(row, j) += r->g().v[j];
    });
  return r;
}

Var Tape::pick(const Var& a, int i) {
  if (i < 0 || i >= static_cast<int>(a->val.size())) throw std::invalid_argument("pick: bad index");
  Mat out(1, 1);
  out.v[0] = a->val.v[i];
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r, i] { a->g().v[i] += r->g().v[0]; });
  return r;
}

Var Tape::sum(const Var& a) {
  Mat out(1, 1);
  for (double x : a->val.v) out.v[0] += x;
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r] {
      for (double& g : a->g().v) g += r->g().v[0];
    });
  return r;
}

Var Tape::mean(const Var& a) { return scalar_affine(sum(a), 1.0 / a->val.size(), 0.0); }

Var Tape::scale_by(const Var& a, const Var& s) {
  if (s->val.size() != 1) throw std::invalid_argument("scale_by: scalar expected");
  Mat out(a->val.rows, a->val.cols);
  const double sv = s->val.v[0];
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a->val.v[i] * sv;
  Var r = make(std::move(out), a->needs_grad || s->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, s, r] {
      const Mat& g = r->g();
      if (a->needs_grad)
        for (size_t i = 0; i < g.v.size(); ++i) a->g().v[i] += g.v[i] * s->val.v[0];
      if (s->needs_grad) {
        double acc = 0.0;
        for (size_t i = 0; i < g.v.size(); ++i) acc += g.v[i] * a->val.v[i];
        s->g().v[0] += acc;
      }
    });
  return r;
}

Var Tape::div_by(const Var& a, const Var& s) {
  if (s->val.size() != 1) throw std::invalid_argument("div_by: scalar expected");
  Mat out(a->val.rows, a->val.cols);
  const double sv = s->val.v[0];
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a->val.v[i] / sv;
  Var r = make(std::move(out), a->needs_grad || s->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, s, r] {
      const Mat& g = r->g();
      const double sv = s->val.v[0];
      if (a->needs_grad)
        for (size_t i = 0; i < g.v.size(); ++i) a->g().v[i] += g.v[i] / sv;
      if (s->needs_grad) {
        double acc = 0.0;
        for (size_t i = 0; i < g.v.size(); ++i) acc += g.v[i] * r->val.v[i];
        s->g().v[0] -= acc / sv;
      }
    });
  return r;
}

Var Tape::scatter_sum(const Var& a, const std::vector<int>& ids, int size) {
  if (ids.size() != a->val.size()) throw std::invalid_argument("scatter_sum: index count mismatch");
  Mat out(size, 1);
  for (size_t j = 0; j < ids.size(); ++j) {
    if (ids[j] < 0 || ids[j] >= size) throw std::invalid_argument("scatter_sum: index out of range");
    out.v[ids[j]] += a->val.v[j];
  }
  Var r = make(std::move(out), a->needs_grad);
  if (r->needs_grad)
    ops_.push_back([a, r, ids] {
      for (size_t j = 0; j < ids.size(); ++j) a->g().v[j] += r->g().v[ids[j]];
    });
  return r;
}

void Tape::backward(const Var& root) {
  if (root->val.size() != 1) throw std::invalid_argument("backward: root must be a scalar");
  root->g().v[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

}  // namespace q2sql
