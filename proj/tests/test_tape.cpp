#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "q2sql/rng.hpp"
#include "q2sql/tape.hpp"

using namespace q2sql;

namespace {

Mat random_mat(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Mat m(r, c);
  for (auto& x : m.v) x = rng.uniform(lo, hi);
  return m;
}

// central finite differences of f at m, against analytic grad
void check_grad(const Mat& analytic, Mat m, const std::function<double(const Mat&)>& f,
                double tol = 1e-6) {
  const double h = 1e-6;
  REQUIRE(analytic.rows == m.rows);
  REQUIRE(analytic.cols == m.cols);
  for (size_t i = 0; i < m.v.size(); ++i) {
    const double keep = m.v[i];
    m.v[i] = keep + h;
    const double up = f(m);
    m.v[i] = keep - h;
    const double dn = f(m);
    m.v[i] = keep;
    const double fd = (up - dn) / (2 * h);
    CHECK(std::abs(analytic.v[i] - fd) < tol * std::max(1.0, std::abs(fd)));
  }
}

}  // namespace

TEST_CASE("forward values of elementwise ops") {
  Tape t;
  Var a = t.leaf(Mat(1, 3, {0.5, -1.0, 2.0}));
  CHECK(t.tanh_(a)->val.v[1] == doctest::Approx(std::tanh(-1.0)));
  CHECK(t.sigmoid_(a)->val.v[0] == doctest::Approx(1.0 / (1.0 + std::exp(-0.5))));
  CHECK(t.exp_(a)->val.v[2] == doctest::Approx(std::exp(2.0)));
  CHECK(t.scalar_affine(a, 2.0, 1.0)->val.v[0] == doctest::Approx(2.0));
  CHECK(t.sum(a)->val.v[0] == doctest::Approx(1.5));
  CHECK(t.mean(a)->val.v[0] == doctest::Approx(0.5));
}

TEST_CASE("softmax matches max-subtracted formula and is shift invariant") {
  Tape t;
  Var a = t.leaf(Mat(3, 1, {1.0, 2.0, 3.0}));
  Var b = t.leaf(Mat(3, 1, {101.0, 102.0, 103.0}));
  Mat sa = t.softmax(a)->val;
  Mat sb = t.softmax(b)->val;
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(sa.v[size_t(i)] == doctest::Approx(std::exp(i + 1.0) / z).epsilon(1e-12));
    CHECK(sa.v[size_t(i)] == doctest::Approx(sb.v[size_t(i)]).epsilon(1e-12));
  }
}

TEST_CASE("matmul gradients match finite differences") {
  Rng rng(1);
  Mat a0 = random_mat(3, 4, rng), b0 = random_mat(4, 2, rng), w0 = random_mat(3, 2, rng);
  // mix matmul and matmul_tn so both backward rules are exercised
  Tape t;
  Var va = t.leaf(a0, true), vb = t.leaf(b0, true), vw = t.leaf(w0, true);
  Var y = t.matmul_tn(t.tanh_(t.matmul(va, vb)), vw);
  Var l = t.sum(t.mul(y, y));
  t.backward(l);
  auto eval = [&](const Mat& a, const Mat& b, const Mat& w) {
    Tape t2;
    Var xa = t2.leaf(a), xb = t2.leaf(b), xw = t2.leaf(w);
    Var yy = t2.matmul_tn(t2.tanh_(t2.matmul(xa, xb)), xw);
    return t2.sum(t2.mul(yy, yy))->val.v[0];
  };
  check_grad(va->grad, a0, [&](const Mat& m) { return eval(m, b0, w0); });
  check_grad(vb->grad, b0, [&](const Mat& m) { return eval(a0, m, w0); });
  check_grad(vw->grad, w0, [&](const Mat& m) { return eval(a0, b0, m); });
}

TEST_CASE("elementwise, softmax, scatter, and scalar-op gradients match finite differences") {
  Rng rng(2);
  Mat a0 = random_mat(5, 1, rng), b0 = random_mat(5, 1, rng, 0.5, 1.5);
  const std::vector<int> ids = {2, 0, 2, 1, 4};
  auto build = [&](Tape& t, const Mat& a, const Mat& b, bool grad) {
    Var va = t.leaf(a, grad), vb = t.leaf(b, grad);
    Var s = t.softmax(t.div(t.sigmoid_(va), vb));
    Var sc = t.scatter_sum(s, ids, 6);
    Var picked = t.pick(sc, 2);
    Var mixed = t.add(t.scale_by(t.exp_(vb), picked),
                      t.slice_rows(t.tanh_(t.concat_rows({va, vb})), 2, 7));
    Var lg = t.log_(t.scalar_affine(t.mul(mixed, mixed), 1.0, 0.1), 1e-12);
    struct R { Var loss, a, b; } r{t.mean(lg), va, vb};
    return r;
  };
  Tape t;
  auto r = build(t, a0, b0, true);
  t.backward(r.loss);
  auto eval = [&](const Mat& a, const Mat& b) {
    Tape t2;
    return build(t2, a, b, false).loss->val.v[0];
  };
  check_grad(r.a->grad, a0, [&](const Mat& m) { return eval(m, b0); });
  check_grad(r.b->grad, b0, [&](const Mat& m) { return eval(a0, m); });
}

TEST_CASE("slice, concat_cols, row_as_col, affine, div_by gradients") {
  Rng rng(3);
  Mat a0 = random_mat(4, 3, rng), w0 = random_mat(2, 2, rng), b0 = random_mat(2, 1, rng);
  auto build = [&](Tape& t, const Mat& a, const Mat& w, const Mat& b, bool grad) {
    Var va = t.leaf(a, grad), vw = t.leaf(w, grad), vb = t.leaf(b, grad);
    Var r0 = t.row_as_col(va, 1);                      // 3 x 1
    Var top = t.slice_rows(r0, 0, 2);                  // 2 x 1
    Var aff = t.affine(vw, top, vb);
    Var cc = t.concat_cols({aff, t.mul(aff, aff)});    // 2 x 2
    Var d = t.div_by(cc, t.scalar_affine(t.sum(t.exp_(vb)), 1.0, 0.5));
    struct R { Var loss, a, w, b; } r{t.sum(t.mul(d, d)), va, vw, vb};
    return r;
  };
  Tape t;
  auto r = build(t, a0, w0, b0, true);
  t.backward(r.loss);
  auto eval = [&](const Mat& a, const Mat& w, const Mat& b) {
    Tape t2;
    return build(t2, a, w, b, false).loss->val.v[0];
  };
  check_grad(r.a->grad, a0, [&](const Mat& m) { return eval(m, w0, b0); });
  check_grad(r.w->grad, w0, [&](const Mat& m) { return eval(a0, m, b0); });
  check_grad(r.b->grad, b0, [&](const Mat& m) { return eval(a0, w0, m); });
}

TEST_CASE("gradient accumulates across reuse of one node") {
  Tape t;
  Var a = t.leaf(Mat(2, 1, {1.0, 2.0}), true);
  Var l = t.sum(t.add(a, a));
  t.backward(l);
  CHECK(a->grad.v[0] == doctest::Approx(2.0));
  CHECK(a->grad.v[1] == doctest::Approx(2.0));
}

TEST_CASE("backward requires scalar root") {
  Tape t;
  Var a = t.leaf(Mat(2, 1, {1.0, 2.0}), true);
  CHECK_THROWS(t.backward(a));
}
