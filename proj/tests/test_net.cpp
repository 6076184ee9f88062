#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>

#include "core/init.hpp"
#include "core/net.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace speclab;
using namespace speclab::testing;

namespace {

Architecture make_arch(std::vector<int> hidden, ActivationKind act, int in = 1, int out = 1) {
  Architecture a;
  a.input_dim = in;
  a.hidden_widths = std::move(hidden);
  a.output_dim = out;
  a.activation = act;
  return a;
}

NetworkParams random_net(const Architecture& arch, std::uint64_t seed) {
  InitScheme xavier;
  return initialize(arch, xavier, seed);
}

// Sample an x at which no hidden pre-activation sits within `margin` of a
// ReLU kink (the output layer is affine and has none). Nets can carry a unit
// whose pre-activation is pinned near zero for every input, so failure is a
// property of the net and reported as nullopt.
std::optional<Eigen::VectorXd> kink_free_input(const NetworkParams& params, Rng& rng,
                                               double margin = 1e-6, int attempts = 1000) {
  for (int attempt = 0; attempt < attempts; ++attempt) {
    Eigen::VectorXd x(params.arch.input_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-2.0, 2.0);
    ForwardTrace t = forward_trace(params, Eigen::MatrixXd(x.transpose()));
    double closest = 1e300;
    for (size_t l = 0; l + 1 < t.zs.size(); ++l)
      closest = std::min(closest, t.zs[l].array().abs().minCoeff());
    if (closest > margin) return x;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("zero network maps everything to zero") {
  NetworkParams p = NetworkParams::zeros(make_arch({8, 8}, ActivationKind::relu()));
  Eigen::VectorXd x(1);
  for (double v : {-3.0, 0.0, 1.7}) {
    x[0] = v;
    CHECK(forward(p, x)[0] == 0.0);
  }
}

TEST_CASE("single affine layer arithmetic") {
  NetworkParams p = NetworkParams::zeros(make_arch({}, ActivationKind::identity()));
  p.weights[0](0, 0) = 2.0;
  p.biases[0][0] = 1.0;
  Eigen::VectorXd x(1);
  x[0] = 3.0;
  CHECK(forward(p, x)[0] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("1-1-1 gaussian net evaluates by hand") {
  // f(x) = w2 * exp(-(w1 x + b1)^2 / 2) + b2 with s = 1
  NetworkParams p = NetworkParams::zeros(make_arch({1}, ActivationKind::gaussian(1.0)));
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 2.0;
  Eigen::VectorXd x(1);
  x[0] = 0.0;
  CHECK(forward(p, x)[0] == doctest::Approx(2.0).epsilon(1e-15));
  x[0] = 1.0;
  CHECK(forward(p, x)[0] == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("forward rejects dimension mismatches naming the layer") {
  NetworkParams p = NetworkParams::zeros(make_arch({4}, ActivationKind::relu(), 2));
  Eigen::VectorXd x(3);
  x.setZero();
  CHECK_THROWS_AS(forward(p, x), ShapeError);
  try {
    forward(p, x);
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
  }
}

TEST_CASE("param_gradient of a linear model is [x, 1]") {
  NetworkParams p = NetworkParams::zeros(make_arch({}, ActivationKind::identity()));
  Eigen::VectorXd x(1);
  x[0] = 5.0;
  Eigen::VectorXd g = param_gradient(p, x);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == doctest::Approx(5.0));
  CHECK(g[1] == doctest::Approx(1.0));
}

TEST_CASE("param_gradient matches finite differences on a random 1-16-1 relu net") {
  NetworkParams p = random_net(make_arch({16}, ActivationKind::relu()), 7);
  Rng rng(123);
  auto x = kink_free_input(p, rng, 1e-4);
  REQUIRE(x.has_value());
  Eigen::VectorXd got = param_gradient(p, *x);
  Eigen::VectorXd want = fd_param_gradient(p, *x);
  CHECK(max_rel_error(got, want, 1e-6) < 1e-5);
}

TEST_CASE("dead relu units have zero incoming gradients") {
  NetworkParams p = NetworkParams::zeros(make_arch({2}, ActivationKind::relu()));
  // unit 0 alive, unit 1 dead at x = 1
  p.weights[0] << 1.0, -1.0;
  p.biases[0] << 0.0, -0.5;
  p.weights[1] << 1.0, 1.0;
  Eigen::VectorXd x(1);
  x[0] = 1.0;
  Eigen::VectorXd g = param_gradient(p, x);
  // layout: W0 (2), b0 (2), W1 (2), b1 (1)
  CHECK(g[1] == 0.0);  // dead unit weight
  CHECK(g[3] == 0.0);  // dead unit bias
  CHECK(g[0] != 0.0);
}

TEST_CASE("relu derivative at exactly zero is zero") {
  ActivationKind relu = ActivationKind::relu();
  CHECK(relu.derivative(0.0) == 0.0);
  CHECK(relu.derivative(1e-12) == 1.0);
}

TEST_CASE("input_gradient of f = 2x + 1 is 2 everywhere") {
  NetworkParams p = NetworkParams::zeros(make_arch({}, ActivationKind::identity()));
  p.weights[0](0, 0) = 2.0;
  p.biases[0][0] = 1.0;
  for (double v : {-1.0, 0.0, 4.2}) {
    Eigen::VectorXd x(1);
    x[0] = v;
    CHECK(input_gradient(p, x)[0] == doctest::Approx(2.0));
  }
}

TEST_CASE("input_gradient matches finite differences on a 1-8-1 gaussian net") {
  NetworkParams p = random_net(make_arch({8}, ActivationKind::gaussian(1.0)), 11);
  Eigen::VectorXd x(1);
  x[0] = 0.37;
  double got = input_gradient(p, x)[0];
  double want = fd_input_gradient(p, x)[0];
  CHECK(close(got, want, 1e-5, 1e-9));
}

TEST_CASE("constant network has zero input gradient") {
  NetworkParams p = random_net(make_arch({8}, ActivationKind::gaussian(0.5)), 3);
  p.weights[0].setZero();
  Eigen::VectorXd x(1);
  x[0] = 1.5;
  CHECK(input_gradient(p, x)[0] == 0.0);
}

TEST_CASE("gradients track finite differences across activations (100 nets each)") {
  for (ActivationKind act : {ActivationKind::relu(), ActivationKind::gaussian(0.5),
                             ActivationKind::sinusoid(4.0), ActivationKind::identity()}) {
    CAPTURE(act.name());
    Rng rng(99);
    int tested = 0;
    std::uint64_t seed = 1000;
    while (tested < 100) {
      NetworkParams p = random_net(make_arch({6, 5}, act), seed++);
      Eigen::VectorXd x;
      if (act.kind == Activation::kReLU) {
        // The margin must dominate the z-shift a 1e-5 finite-difference step
        // in any weight can cause, or the oracle itself crosses the kink.
        auto found = kink_free_input(p, rng, 1e-4, 300);
        if (!found) continue;  // a unit is pinned at its kink for every input
        x = *found;
      } else {
        x.resize(1);
        x[0] = rng.uniform(-2.0, 2.0);
      }
      Eigen::VectorXd got = param_gradient(p, x);
      Eigen::VectorXd want = fd_param_gradient(p, x);
      double err = max_rel_error(got, want, 1e-5);
      if (err >= 1e-4) CAPTURE(seed);
      REQUIRE(err < 1e-4);
      double gin = input_gradient(p, x)[0];
      double win = fd_input_gradient(p, x)[0];
      REQUIRE(close(gin, win, 1e-4, 1e-7));
      ++tested;
    }
  }
}

TEST_CASE("relu layer with zero bias is positively homogeneous") {
  NetworkParams p = random_net(make_arch({16}, ActivationKind::relu()), 21);
  p.biases[0].setZero();
  Eigen::VectorXd x(1);
  x[0] = 0.8;
  double base = forward(p, x)[0];
  for (double c : {0.5, 2.0, 7.25}) {
    NetworkParams scaled = p;
    scaled.weights[0] *= c;
    CHECK(forward(scaled, x)[0] == doctest::Approx(c * base).epsilon(1e-12));
  }
}

TEST_CASE("evaluation is bit-deterministic") {
  NetworkParams p = random_net(make_arch({32, 32}, ActivationKind::sinusoid(30.0)), 5);
  Eigen::VectorXd x(1);
  x[0] = 0.123456;
  double a = forward(p, x)[0];
  double b = forward(p, x)[0];
  CHECK(a == b);
}

TEST_CASE("flatten/unflatten round-trips and layout length matches") {
  Architecture arch = make_arch({5, 3}, ActivationKind::relu(), 2, 2);
  NetworkParams p = random_net(arch, 17);
  CHECK(arch.param_count() == 2 * 5 + 5 + 5 * 3 + 3 + 3 * 2 + 2);
  Eigen::VectorXd flat = p.flatten();
  REQUIRE(flat.size() == arch.param_count());
  NetworkParams q = NetworkParams::unflatten(arch, flat);
  for (size_t l = 0; l < p.weights.size(); ++l) {
    CHECK(p.weights[l] == q.weights[l]);
    CHECK(p.biases[l] == q.biases[l]);
  }
}

TEST_CASE("param_jacobian rows equal per-point param_gradient") {
  NetworkParams p = random_net(make_arch({6, 4}, ActivationKind::gaussian(0.3)), 23);
  Eigen::MatrixXd X(3, 1);
  X << -0.5, 0.1, 0.9;
  Eigen::MatrixXd J = param_jacobian(p, X);
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd row = J.row(i).transpose();
    Eigen::VectorXd g = param_gradient(p, Eigen::VectorXd(X.row(i).transpose()));
    CHECK(max_rel_error(row, g, 1e-12) < 1e-10);
  }
}

TEST_CASE("param_gradient rejects vector outputs") {
  NetworkParams p = NetworkParams::zeros(make_arch({4}, ActivationKind::relu(), 1, 2));
  Eigen::VectorXd x(1);
  x[0] = 0.0;
  CHECK_THROWS_AS(param_gradient(p, x), ShapeError);
}
