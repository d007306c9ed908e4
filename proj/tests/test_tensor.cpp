#include <cmath>
#include <vector>

#include "cadet/rng.hpp"
#include "cadet/tensor.hpp"
#include "doctest.h"

using namespace cadet;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                     bool requires_grad = true) {
  std::vector<double> data(static_cast<std::size_t>(shape_numel(shape)));
  for (double& v : data) v = uniform_real(rng, lo, hi);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

// keeps relu inputs away from the kink
Tensor random_tensor_no_kink(Shape shape, Rng& rng) {
  Tensor t = random_tensor(std::move(shape), rng);
  for (double& v : t.values()) {
    if (std::abs(v) < 0.1) v = v < 0.0 ? v - 0.1 : v + 0.1;
  }
  return t;
}

}  // namespace

TEST_CASE("shape helpers") {
  CHECK(shape_numel({2, 3, 4}) == 24);
  CHECK(shape_numel({7}) == 7);
  CHECK(shape_str({2, 3}) == "(2,3)");
  CHECK(shape_str({}) == "()");
}

TEST_CASE("construction validates shape against data") {
  CHECK_THROWS_AS(Tensor({2, 0}, {}), ShapeError);
  CHECK_THROWS_AS(Tensor({-1}, {1.0}), ShapeError);
  CHECK_THROWS_AS(Tensor({3}, {1.0, 2.0}), ShapeError);

  Tensor z = Tensor::zeros({2, 2});
  CHECK(z.numel() == 4);
  for (const double v : z.values()) CHECK(v == 0.0);

  Tensor f = Tensor::full({3}, 2.5);
  for (const double v : f.values()) CHECK(v == 2.5);

  Tensor s = Tensor::scalar(-1.25);
  CHECK(s.item() == -1.25);
  CHECK_THROWS_AS(f.item(), ShapeError);
}

TEST_CASE("copies share storage, clone_values does not") {
  Tensor a({2}, {1.0, 2.0});
  Tensor b = a;
  b.values()[0] = 9.0;
  CHECK(a.values()[0] == 9.0);

  Tensor c = a.clone_values();
  c.values()[0] = 0.0;
  CHECK(a.values()[0] == 9.0);
  CHECK(!c.requires_grad());
}

TEST_CASE("gradient buffer lifecycle") {
  Tensor a({2}, {1.0, 2.0});
  CHECK_THROWS_AS(a.grad(), ValidationError);
  a.set_requires_grad(true);
  CHECK(a.grad().size() == 2);
  a.grad()[0] = 5.0;
  a.zero_grad();
  CHECK(a.grad()[0] == 0.0);
  a.set_requires_grad(false);
  CHECK_THROWS_AS(a.grad(), ValidationError);
}

TEST_CASE("ops without an active tape produce untracked outputs") {
  Tensor a({2}, {1.0, 2.0}, true);
  Tensor b({2}, {3.0, 4.0}, true);
  Tensor c = add(a, b);
  CHECK(!c.requires_grad());
  CHECK(c.is_leaf());
  CHECK(c.values() == std::vector<double>{4.0, 6.0});
}

TEST_CASE("tape backward: hand-checked product rule and leaf accumulation") {
  Tensor a = Tensor::scalar(3.0, true);
  Tensor b = Tensor::scalar(4.0, true);
  Tape tape;
  TapeScope scope(tape);

  Tensor y = mul(a, b);      // 12
  Tensor loss = add(y, a);   // 15, dloss/da = b + 1 = 5, dloss/db = a = 3
  CHECK(!loss.is_leaf());
  CHECK(loss.item() == 15.0);

  tape.backward(loss);
  CHECK(a.grad()[0] == 5.0);
  CHECK(b.grad()[0] == 3.0);

  // leaf grads accumulate, intermediate grads are reset per sweep
  tape.backward(loss);
  CHECK(a.grad()[0] == 10.0);
  CHECK(b.grad()[0] == 6.0);
  CHECK(y.grad()[0] == 1.0);
}

TEST_CASE("backward requires a scalar loss and an active tape") {
  Tensor a({2}, {1.0, 2.0}, true);
  Tape tape;
  {
    TapeScope scope(tape);
    Tensor y = mul(a, 2.0);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);
  }
  Tensor s = Tensor::scalar(1.0);
  CHECK_THROWS_AS(backward(s), ValidationError);
}

TEST_CASE("tape scopes nest and restore") {
  CHECK(Tape::active() == nullptr);
  Tape outer;
  {
    TapeScope a(outer);
    CHECK(Tape::active() == &outer);
    Tape inner;
    {
      TapeScope b(inner);
      CHECK(Tape::active() == &inner);
    }
    CHECK(Tape::active() == &outer);
  }
  CHECK(Tape::active() == nullptr);
}

TEST_CASE("backward on a loss that tracks no parameter is a no-op") {
  Tensor a({2}, {1.0, 2.0}, false);
  Tape tape;
  TapeScope scope(tape);
  Tensor loss = sum(a);
  tape.backward(loss);  // nothing recorded, nothing to do
  CHECK(tape.size() == 0);
}

TEST_CASE("matmul forward matches hand calculation") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b({3, 2}, {7, 8, 9, 10, 11, 12});
  Tensor c = matmul(a, b);
  CHECK(c.shape() == Shape{2, 2});
  CHECK(c.values() == std::vector<double>{58, 64, 139, 154});

  CHECK_THROWS_AS(matmul(a, a), ShapeError);
  CHECK_THROWS_AS(matmul(a, Tensor({2}, {1, 2})), ShapeError);
}

TEST_CASE("elementwise broadcast rules") {
  Tensor m({2, 2}, {1, 2, 3, 4});
  Tensor s = Tensor::scalar(10.0);
  CHECK(add(m, s).values() == std::vector<double>{11, 12, 13, 14});
  CHECK(add(s, m).values() == std::vector<double>{11, 12, 13, 14});
  CHECK(mul(m, s).values() == std::vector<double>{10, 20, 30, 40});
  CHECK(mul(s, m).values() == std::vector<double>{10, 20, 30, 40});
  CHECK(mul(m, 0.5).values() == std::vector<double>{0.5, 1, 1.5, 2});
  CHECK_THROWS_AS(add(m, Tensor({3}, {1, 2, 3})), ShapeError);
  CHECK_THROWS_AS(mul(m, Tensor({4}, {1, 2, 3, 4})), ShapeError);
}

TEST_CASE("relu subgradient at zero is exactly zero") {
  Tensor x({3}, {-1.0, 0.0, 2.0}, true);
  Tape tape;
  TapeScope scope(tape);
  Tensor loss = sum(relu(x));
  tape.backward(loss);
  CHECK(x.grad() == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("sigmoid is stable at extreme inputs") {
  Tensor x({4}, {-1000.0, -2.0, 2.0, 1000.0});
  Tensor y = sigmoid(x);
  CHECK(y.values()[0] == 0.0);
  CHECK(y.values()[3] == 1.0);
  CHECK(y.values()[1] == doctest::Approx(1.0 / (1.0 + std::exp(2.0))).epsilon(1e-12));
  CHECK(y.values()[2] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("gradcheck: smooth primitives against central differences") {
  Rng rng(42);
  const double eps = 1e-5;
  const double tol = 1e-7;

  SUBCASE("matmul wrt left") {
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng, -1.0, 1.0, false);
    CHECK(check_gradients([&] { return sum(matmul(a, b)); }, a, eps) < tol);
  }
  SUBCASE("matmul wrt right") {
    Tensor a = random_tensor({3, 4}, rng, -1.0, 1.0, false);
    Tensor b = random_tensor({4, 2}, rng);
    CHECK(check_gradients([&] { return sum(matmul(a, b)); }, b, eps) < tol);
  }
  SUBCASE("add and mul") {
    Tensor a = random_tensor({5}, rng);
    Tensor b = random_tensor({5}, rng, -1.0, 1.0, false);
    CHECK(check_gradients([&] { return sum(mul(add(a, b), a)); }, a, eps) < tol);
  }
  SUBCASE("scalar broadcast both sides") {
    Tensor s = Tensor::scalar(0.7, true);
    Tensor m = random_tensor({2, 3}, rng, -1.0, 1.0, false);
    CHECK(check_gradients([&] { return sum(mul(s, add(m, s))); }, s, eps) < tol);
  }
  SUBCASE("relu away from the kink") {
    Tensor x = random_tensor_no_kink({7}, rng);
    CHECK(check_gradients([&] { return sum(relu(x)); }, x, eps) < tol);
  }
  SUBCASE("sigmoid") {
    Tensor x = random_tensor({6}, rng, -3.0, 3.0);
    CHECK(check_gradients([&] { return sum(mul(sigmoid(x), sigmoid(x))); }, x, eps) < tol);
  }
  SUBCASE("reshape and transpose") {
    Tensor x = random_tensor({2, 6}, rng);
    CHECK(check_gradients(
              [&] { return sum(matmul(reshape(x, {3, 4}), transpose(reshape(x, {3, 4})))); }, x,
              eps) < tol);
  }
  SUBCASE("slice1d") {
    Tensor x = random_tensor({8}, rng);
    CHECK(check_gradients([&] { return sum(mul(slice1d(x, 2, 4), slice1d(x, 0, 4))); }, x, eps) <
          tol);
  }
  SUBCASE("add_rowvec wrt matrix and row") {
    Tensor m = random_tensor({3, 4}, rng);
    Tensor r = random_tensor({4}, rng);
    CHECK(check_gradients([&] { return sum(mul(add_rowvec(m, r), add_rowvec(m, r))); }, m, eps) <
          tol);
    CHECK(check_gradients([&] { return sum(mul(add_rowvec(m, r), add_rowvec(m, r))); }, r, eps) <
          tol);
  }
  SUBCASE("mean_rows") {
    Tensor m = random_tensor({4, 3}, rng);
    CHECK(check_gradients([&] { return sum(mul(mean_rows(m), mean_rows(m))); }, m, eps) < tol);
  }
  SUBCASE("stack_rows and concat1d") {
    Tensor a = random_tensor({3}, rng);
    Tensor b = random_tensor({3}, rng, -1.0, 1.0, false);
    CHECK(check_gradients([&] { return sum(matmul(stack_rows({a, b}), transpose(stack_rows({a, b})))); },
                          a, eps) < tol);
    CHECK(check_gradients([&] { return sum(mul(concat1d({a, b}), concat1d({b, a}))); }, a, eps) <
          tol);
  }
  SUBCASE("composite affine-sigmoid layer") {
    Tensor w = random_tensor({4, 3}, rng);
    Tensor x = random_tensor({2, 4}, rng, -1.0, 1.0, false);
    Tensor bias = random_tensor({3}, rng);
    auto f = [&] { return sum(sigmoid(mean_rows(add_rowvec(matmul(x, w), bias)))); };
    CHECK(check_gradients(f, w, eps) < tol);
    CHECK(check_gradients(f, bias, eps) < tol);
  }
}

TEST_CASE("stack_rows accumulates gradient for a repeated row") {
  Tensor r({2}, {1.0, 2.0}, true);
  Tape tape;
  TapeScope scope(tape);
  Tensor m = stack_rows({r, r, r});
  CHECK(m.shape() == Shape{3, 2});
  Tensor loss = sum(m);
  tape.backward(loss);
  CHECK(r.grad() == std::vector<double>{3.0, 3.0});
}

TEST_CASE("softmax_cross_entropy matches a direct evaluation") {
  const std::vector<double> z = {1.5, -0.25, 0.75, 2.0};
  const int target = 2;
  Tensor logits({4}, z, true);

  double norm = 0.0;
  for (const double v : z) norm += std::exp(v);
  const double expected = -std::log(std::exp(z[target]) / norm);

  Tape tape;
  TapeScope scope(tape);
  Tensor loss = softmax_cross_entropy(logits, target);
  CHECK(loss.item() == doctest::Approx(expected).epsilon(1e-12));

  tape.backward(loss);
  const std::vector<double> p = softmax(z);
  for (int i = 0; i < 4; ++i) {
    const double want = p[static_cast<std::size_t>(i)] - (i == target ? 1.0 : 0.0);
    CHECK(logits.grad()[static_cast<std::size_t>(i)] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("softmax_cross_entropy is stable and validates input") {
  Tensor huge({2}, {1e4, -1e4});
  Tensor loss = softmax_cross_entropy(huge, 0);
  CHECK(std::isfinite(loss.item()));
  CHECK(loss.item() == doctest::Approx(0.0).epsilon(1e-12));

  Tensor one({1}, {0.5});
  CHECK_THROWS_AS(softmax_cross_entropy(one, 0), ShapeError);
  Tensor two({2}, {0.5, 0.5});
  CHECK_THROWS_AS(softmax_cross_entropy(two, 2), ValidationError);
  CHECK_THROWS_AS(softmax_cross_entropy(two, -1), ValidationError);
}

TEST_CASE("softmax_cross_entropy gradcheck") {
  Rng rng(7);
  Tensor logits = random_tensor({5}, rng, -2.0, 2.0);
  CHECK(check_gradients([&] { return softmax_cross_entropy(logits, 3); }, logits, 1e-5) < 1e-7);
}

TEST_CASE("softmax sums to one and shifts cancel") {
  const std::vector<double> z = {0.3, -1.2, 2.4, 0.0};
  const std::vector<double> p = softmax(z);
  double total = 0.0;
  for (const double v : p) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> shifted = z;
  for (double& v : shifted) v += 500.0;
  const std::vector<double> q = softmax(shifted);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
  }
  const std::vector<double> extreme = softmax({1e6, -1e6});
  CHECK(extreme[0] == doctest::Approx(1.0));
}

TEST_CASE("sgd momentum follows the classical update") {
  Tensor p({1}, {1.0}, true);
  SgdMomentum opt({p}, 0.1, 0.9);

  p.grad()[0] = 1.0;
  opt.step();  // v=1, p=1-0.1
  CHECK(p.values()[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(p.grad()[0] == 0.0);

  p.grad()[0] = 1.0;
  opt.step();  // v=1.9, p=0.9-0.19
  CHECK(p.values()[0] == doctest::Approx(0.71).epsilon(1e-15));

  opt.step();  // grad 0: v=1.71, p=0.71-0.171
  CHECK(p.values()[0] == doctest::Approx(0.539).epsilon(1e-12));
}

TEST_CASE("sgd validates its configuration") {
  Tensor p({1}, {1.0}, true);
  CHECK_THROWS_AS(SgdMomentum({p}, 0.0, 0.9), ValidationError);
  CHECK_THROWS_AS(SgdMomentum({p}, -1.0, 0.9), ValidationError);
  CHECK_THROWS_AS(SgdMomentum({p}, 0.1, 1.0), ValidationError);
  CHECK_THROWS_AS(SgdMomentum({p}, 0.1, -0.1), ValidationError);

  Tensor frozen({1}, {1.0}, false);
  SgdMomentum opt({frozen}, 0.1, 0.0);
  CHECK_THROWS_AS(opt.step(), ValidationError);
}

TEST_CASE("sgd with zero momentum is plain gradient descent") {
  Tensor p({2}, {2.0, -3.0}, true);
  SgdMomentum opt({p}, 0.5, 0.0);
  p.grad() = {1.0, -2.0};
  opt.step();
  CHECK(p.values() == std::vector<double>{1.5, -2.0});
}

TEST_CASE("gradient verifier flags a subgradient mismatch") {
  // relu at exactly 0: analytic 0, central difference 0.5
  Tensor x({1}, {0.0}, true);
  const double err = check_gradients([&] { return sum(relu(x)); }, x, 1e-5);
  CHECK(err == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("gradient verifier subsamples coordinates deterministically") {
  Rng rng(3);
  Tensor x = random_tensor({100}, rng);
  auto f = [&] { return sum(mul(x, x)); };
  const double e1 = check_gradients(f, x, 1e-5, 10, 99);
  const double e2 = check_gradients(f, x, 1e-5, 10, 99);
  CHECK(e1 == e2);
  CHECK(e1 < 1e-7);
}

TEST_CASE("training a tiny regression problem converges") {
  // fit y = 2x with one weight, quadratic loss via elementwise ops
  Tensor w = Tensor::scalar(0.0, true);
  SgdMomentum opt({w}, 0.05, 0.9);
  const std::vector<double> xs = {1.0, 2.0, -1.0, 0.5};
  for (int epoch = 0; epoch < 200; ++epoch) {
    for (const double x : xs) {
      Tape tape;
      TapeScope scope(tape);
      Tensor pred = mul(w, x);
      Tensor residual = add(pred, Tensor::scalar(-2.0 * x));
      Tensor loss = mul(residual, residual);
      tape.backward(loss);
      opt.step();
    }
  }
  CHECK(w.item() == doctest::Approx(2.0).epsilon(1e-6));
}
