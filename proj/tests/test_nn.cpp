#include "doctest.h"

#include <cmath>
#include <limits>

#include "clip/nn.hpp"
#include "support.hpp"

using namespace clip;
using testing::error_of;

namespace {

MlpParams single_layer(Matrix w, std::vector<double> b) {
  MlpParams p;
  p.layers.push_back(Dense{std::move(w), std::move(b)});
  return p;
}

double weighted_output(const MlpParams& p, const std::vector<double>& x,
                       const std::vector<double>& w) {
  auto y = mlp_forward(p, x);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

bool close(double analytic, double numeric) {
  const double diff = std::abs(analytic - numeric);
  return diff <= 1e-7 || diff <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
}

}  // namespace

TEST_CASE("mlp_forward examples") {
  auto id = single_layer(Matrix{{1, 0}, {0, 1}}, {0, 0});
  std::vector<double> x = {0.25, -3.0};
  CHECK(mlp_forward(id, x) == x);

  auto affine = single_layer(Matrix{{1}, {1}}, {-1});
  std::vector<double> v = {0.5, 0.2};
  CHECK(mlp_forward(affine, v)[0] == doctest::Approx(-0.3).epsilon(1e-15));

  Rng rng(4);
  std::uniform_real_distribution<double> u(-2, 2);
  for (Activation act : {Activation::Relu, Activation::Tanh}) {
    std::vector<int> dims = {5, 7, 3};
    auto p = MlpParams::init(dims, act, rng);
    for (auto& d : p.layers)
      for (double& b : d.bias) b = u(rng);
    std::vector<double> in(5);
    for (double& e : in) e = u(rng);
    auto got = mlp_forward(p, in);
    auto want = testing::oracle_mlp(p, in);
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));
  }
}

TEST_CASE("mlp_forward errors") {
  auto p = single_layer(Matrix{{1}, {1}}, {0});
  std::vector<double> three = {1, 2, 3};
  CHECK(error_of([&] { mlp_forward(p, three); }) == Errc::DimensionMismatch);
  std::vector<double> nan = {1, std::numeric_limits<double>::quiet_NaN()};
  CHECK(error_of([&] { mlp_forward(p, nan); }) == Errc::NonFiniteInput);
  std::vector<double> inf = {std::numeric_limits<double>::infinity(), 0};
  CHECK(error_of([&] { mlp_forward(p, inf); }) == Errc::NonFiniteInput);
}

TEST_CASE("Glorot initialization") {
  Rng rng(1);
  std::vector<int> dims = {10, 30};
  auto p = MlpParams::init(dims, Activation::Relu, rng);
  const double limit = std::sqrt(6.0 / 40.0);
  for (double w : p.layers[0].weight.values()) CHECK(std::abs(w) <= limit);
  for (double b : p.layers[0].bias) CHECK(b == 0.0);
  Rng again(1);
  CHECK(MlpParams::init(dims, Activation::Relu, again) == p);
  CHECK(p.parameter_count() == 330);
}

TEST_CASE("backward examples") {
  auto lin = single_layer(Matrix{{1, 4}, {2, 5}, {3, 6}}, {0, 0});  // f(x) = Wx with W = [[1,2,3],[4,5,6]]
  std::vector<double> x = {0.1, 0.2, 0.3};
  for (int j = 0; j < 2; ++j) {
    MlpTape tape;
    mlp_forward(lin, x, &tape);
    std::vector<double> e(2, 0.0);
    e[j] = 1.0;
    auto g = backward(tape, e);
    for (int i = 0; i < 3; ++i) CHECK(g.input[i] == lin.layers[0].weight(i, j));
    CHECK(tape.consumed());
    CHECK(error_of([&] { backward(tape, e); }) == Errc::TapeAlreadyConsumed);
  }

  // relu unit with negative pre-activation passes no gradient
  MlpParams two;
  two.layers.push_back(Dense{Matrix{{1, -1}}, {0, 0}});
  two.layers.push_back(Dense{Matrix{{1}, {1}}, {0}});
  MlpTape tape;
  std::vector<double> one = {2.0};
  CHECK(mlp_forward(two, one, &tape)[0] == 2.0);
  std::vector<double> dy = {1.0};
  auto g = backward(tape, dy);
  CHECK(g.params.layers[0].weight(0, 0) == 2.0);
  CHECK(g.params.layers[0].weight(0, 1) == 0.0);
  CHECK(g.params.layers[0].bias[1] == 0.0);
  CHECK(g.params.layers[1].weight(1, 0) == 0.0);
  CHECK(g.input[0] == 1.0);

  MlpTape empty;
  CHECK(error_of([&] { backward(empty, dy); }) == Errc::TapeAlreadyConsumed);
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(2718);
  std::uniform_int_distribution<int> width(1, 8), depth(1, 3);
  std::uniform_real_distribution<double> u(-1, 1);
  const double h = 1e-5;
  int checked = 0, skipped = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Activation act = trial % 2 ? Activation::Tanh : Activation::Relu;
    std::vector<int> dims = {width(rng)};
    const int layers = depth(rng);
    for (int l = 0; l < layers; ++l) dims.push_back(width(rng));
    auto p = MlpParams::init(dims, act, rng);
    for (auto& d : p.layers)
      for (double& b : d.bias) b = 0.1 * u(rng);
    std::vector<double> x(dims.front()), w(dims.back());
    for (double& v : x) v = u(rng);
    for (double& v : w) v = u(rng);

    MlpTape tape;
    mlp_forward(p, x, &tape);
    auto grad = backward(tape, w);

    auto check_entry = [&](double& slot, double analytic) {
      const double orig = slot;
      slot = orig + h;
      const double up = weighted_output(p, x, w);
      slot = orig - h;
      const double down = weighted_output(p, x, w);
      slot = orig;
      const double mid = weighted_output(p, x, w);
      const double central = (up - down) / (2 * h);
      // a relu kink inside [-h, h] makes the one-sided slopes disagree
      const double fwd = (up - mid) / h, bwd = (mid - down) / h;
      if (act == Activation::Relu && !close(fwd, bwd)) {
        ++skipped;
        return;
      }
      ++checked;
      CHECK(close(analytic, central));
    };
    auto params = p.tensors();
    auto grads = grad.params.tensors();
    for (std::size_t t = 0; t < params.size(); ++t)
      for (std::size_t i = 0; i < params[t].size(); ++i) check_entry(params[t][i], grads[t][i]);
    for (std::size_t i = 0; i < x.size(); ++i) check_entry(x[i], grad.input[i]);
  }
  CHECK(checked > 1000);
  CHECK(skipped < checked / 100);
}

TEST_CASE("adam_step closed form") {
  auto make = [] { return single_layer(Matrix{{1.0}}, {0.0}); };
  auto grad_of = [](double g) { return single_layer(Matrix{{g}}, {0.0}); };

  MlpParams p = make();
  AdamState s;
  adam_step(s, p, grad_of(1.0), 0.001);
  // m = 0.1, v = 0.001; bias corrected mhat = 1, vhat = 1
  const double w1 = 1.0 - 0.001 * 1.0 / (1.0 + 1e-8);
  CHECK(p.layers[0].weight(0, 0) == doctest::Approx(w1).epsilon(1e-14));
  CHECK(p.layers[0].bias[0] == 0.0);
  CHECK(s.step == 1);

  adam_step(s, p, grad_of(-1.0), 0.001);
  const double m = 0.9 * 0.1 - 0.1, v = 0.999 * 0.001 + 0.001;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  CHECK(m == doctest::Approx(-0.01));
  CHECK(mhat == doctest::Approx(-0.0526316).epsilon(1e-6));
  CHECK(vhat == doctest::Approx(1.0));
  const double w2 = w1 - 0.001 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(p.layers[0].weight(0, 0) == doctest::Approx(w2).epsilon(1e-14));
  CHECK(p.layers[0].weight(0, 0) > w1);
  CHECK(s.first.size() == 2);
  CHECK(s.first[0][0] == doctest::Approx(m));
  CHECK(s.second[0][0] == doctest::Approx(v));
}

TEST_CASE("adam_step with zero gradient leaves parameters") {
  Rng rng(6);
  std::vector<int> dims = {3, 4, 2};
  auto p = MlpParams::init(dims, Activation::Relu, rng);
  const auto before = p;
  AdamState s;
  adam_step(s, p, p.zeros_like(), 0.001);
  CHECK(p == before);

  std::vector<int> other = {3, 5, 2};
  auto wrong = MlpParams::init(other, Activation::Relu, rng);
  CHECK(error_of([&] { adam_step(s, p, wrong, 0.001); }) == Errc::ShapeMismatch);
}

TEST_CASE("lr_at") {
  CHECK(lr_at(0, 0.001) == 0.001);
  CHECK(lr_at(49, 0.001) == 0.001);
  CHECK(lr_at(50, 0.001) == 0.0005);
  CHECK(lr_at(100, 0.001) == 0.00025);
  for (int e = 1; e < 400; ++e) {
    CHECK(lr_at(e, 0.001) <= lr_at(e - 1, 0.001));
    if (e % 50 == 0) CHECK(lr_at(e, 0.001) == lr_at(e - 1, 0.001) / 2);
  }
}

TEST_CASE("softmax_cross_entropy") {
  std::vector<double> eq = {0.3, 0.3};
  auto r = softmax_cross_entropy(eq, 1);
  CHECK(r.loss == doctest::Approx(std::log(2.0)));
  CHECK(r.grad[0] == doctest::Approx(0.5));
  CHECK(r.grad[1] == doctest::Approx(-0.5));

  std::vector<double> big = {1000, 0};
  auto s = softmax_cross_entropy(big, 0);
  CHECK(std::isfinite(s.loss));
  CHECK(s.loss == doctest::Approx(0.0));
  CHECK(std::isfinite(softmax_cross_entropy(big, 1).loss));
  CHECK(softmax_cross_entropy(big, 1).loss == doctest::Approx(1000.0));

  Rng rng(3);
  std::normal_distribution<double> n(0, 5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> l(1 + t % 6);
    for (double& v : l) v = n(rng);
    auto g = softmax_cross_entropy(l, t % static_cast<int>(l.size())).grad;
    double sum = 0;
    for (double v : g) sum += v;
    CHECK(std::abs(sum) < 1e-12);
  }
  CHECK(error_of([&] { softmax_cross_entropy(eq, 2); }) == Errc::LabelOutOfRange);
  CHECK(error_of([&] { softmax_cross_entropy(eq, -1); }) == Errc::LabelOutOfRange);
}
