#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "core/init.hpp"
#include "core/train.hpp"
#include "oracles.hpp"

using namespace speclab;
using namespace speclab::testing;

namespace {

Architecture linear_model() {
  Architecture a;
  a.input_dim = 1;
  a.output_dim = 1;
  a.activation = ActivationKind::identity();
  return a;
}

Dataset make_dataset(std::initializer_list<std::pair<double, double>> pairs) {
  Dataset d;
  d.xs.resize(static_cast<Eigen::Index>(pairs.size()), 1);
  d.ys.resize(static_cast<Eigen::Index>(pairs.size()), 1);
  Eigen::Index i = 0;
  for (auto [x, y] : pairs) {
    d.xs(i, 0) = x;
    d.ys(i, 0) = y;
    ++i;
  }
  return d;
}

}  // namespace

TEST_CASE("perfect fit has zero loss and zero gradient") {
  NetworkParams p = NetworkParams::zeros(linear_model());
  p.weights[0](0, 0) = 2.0;
  Dataset d = make_dataset({{1.0, 2.0}, {2.0, 4.0}});
  auto [value, grad] = loss_value_and_grad(p, d, LossKind::kMSE);
  CHECK(value == 0.0);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("zero linear model on {(1,2)} has loss 4 and gradient [-4,-4]") {
  NetworkParams p = NetworkParams::zeros(linear_model());
  Dataset d = make_dataset({{1.0, 2.0}});
  auto [value, grad] = loss_value_and_grad(p, d, LossKind::kMSE);
  CHECK(value == doctest::Approx(4.0));
  REQUIRE(grad.size() == 2);
  CHECK(grad[0] == doctest::Approx(-4.0));
  CHECK(grad[1] == doctest::Approx(-4.0));
}

TEST_CASE("loss gradients match finite differences on small random nets") {
  Architecture arch;
  arch.input_dim = 1;
  arch.hidden_widths = {5, 4};
  arch.output_dim = 1;
  for (LossKind loss : {LossKind::kMSE, LossKind::kBCE}) {
    for (ActivationKind act :
         {ActivationKind::gaussian(0.7), ActivationKind::sinusoid(3.0)}) {
      arch.activation = act;
      InitScheme xavier;
      NetworkParams p = initialize(arch, xavier, 31);
      Dataset d = make_dataset({{-0.8, 1.0}, {0.1, 0.0}, {0.9, 1.0}});
      auto [value, grad] = loss_value_and_grad(p, d, loss);
      (void)value;
      Eigen::VectorXd fd = fd_loss_gradient(p, d, loss);
      CHECK(max_rel_error(grad, fd, 1e-6) < 1e-5);
    }
  }
}

TEST_CASE("cross-entropy gradient matches finite differences") {
  Architecture arch;
  arch.input_dim = 1;
  arch.hidden_widths = {6};
  arch.output_dim = 3;
  arch.activation = ActivationKind::gaussian(0.5);
  InitScheme xavier;
  NetworkParams p = initialize(arch, xavier, 5);
  Dataset d;
  d.xs.resize(4, 1);
  d.xs << -1.0, -0.2, 0.4, 1.0;
  d.ys = Eigen::MatrixXd::Zero(4, 3);
  d.ys(0, 0) = d.ys(1, 2) = d.ys(2, 1) = d.ys(3, 0) = 1.0;
  auto [value, grad] = loss_value_and_grad(p, d, LossKind::kCrossEntropy);
  CHECK(value > 0.0);
  Eigen::VectorXd fd = fd_loss_gradient(p, d, LossKind::kCrossEntropy);
  CHECK(max_rel_error(grad, fd, 1e-6) < 1e-5);
}

TEST_CASE("max_epochs = 0 returns the input parameters") {
  InitScheme xavier;
  Architecture arch;
  arch.input_dim = 1;
  arch.hidden_widths = {8};
  arch.output_dim = 1;
  arch.activation = ActivationKind::relu();
  NetworkParams p = initialize(arch, xavier, 3);
  Dataset d = make_dataset({{0.0, 1.0}, {1.0, 0.0}});
  TrainConfig tc;
  tc.max_epochs = 0;
  tc.stop_tol = 1e-30;
  TrainResult r = train(p, d, tc);
  CHECK(r.params.flatten() == p.flatten());
  CHECK(r.trace.epochs_run == 0);
}

TEST_CASE("full-batch GD reaches the least-squares solution on collinear data") {
  NetworkParams p = NetworkParams::zeros(linear_model());
  // 10 noiseless points on y = 1.5x - 0.75
  Dataset d;
  d.xs.resize(10, 1);
  d.ys.resize(10, 1);
  for (int i = 0; i < 10; ++i) {
    double x = -1.0 + 0.2 * i;
    d.xs(i, 0) = x;
    d.ys(i, 0) = 1.5 * x - 0.75;
  }
  TrainConfig tc;
  tc.lr = 0.05;
  tc.max_epochs = 200000;
  tc.stop_tol = 1e-16;
  TrainResult r = train(p, d, tc);
  CHECK(r.params.weights[0](0, 0) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(r.params.biases[0][0] == doctest::Approx(-0.75).epsilon(1e-6));
  CHECK_FALSE(r.trace.loss_increase_flagged);
}

TEST_CASE("full-batch loss sequence is nonincreasing at a stable learning rate") {
  Architecture arch;
  arch.input_dim = 1;
  arch.hidden_widths = {16};
  arch.output_dim = 1;
  arch.activation = ActivationKind::gaussian(0.5);
  InitScheme xavier;
  NetworkParams p = initialize(arch, xavier, 4);
  Dataset d = make_dataset({{-1.0, 0.3}, {-0.2, -0.1}, {0.5, 0.4}, {1.0, 0.0}});
  TrainConfig tc;
  tc.lr = suggest_learning_rate(p, d, LossKind::kMSE, 0.2, 4);
  tc.max_epochs = 3000;
  tc.stop_tol = 1e-12;
  TrainResult r = train(p, d, tc);
  CHECK_FALSE(r.trace.loss_increase_flagged);
  CHECK(r.trace.final_loss < r.trace.epoch_losses.front());
}

TEST_CASE("training is bit-deterministic") {
  Architecture arch;
  arch.input_dim = 1;
  arch.hidden_widths = {12};
  arch.output_dim = 1;
  arch.activation = ActivationKind::relu();
  InitScheme xavier;
  NetworkParams p = initialize(arch, xavier, 9);
  Dataset d = make_dataset({{-0.5, 1.0}, {0.5, -1.0}, {1.5, 1.0}});
  TrainConfig tc;
  tc.lr = 1e-2;
  tc.max_epochs = 500;
  tc.stop_tol = 1e-12;
  TrainResult a = train(p, d, tc);
  TrainResult b = train(p, d, tc);
  CHECK(a.params.flatten() == b.params.flatten());
  CHECK(a.trace.epoch_losses == b.trace.epoch_losses);
}

TEST_CASE("minibatch runs with a fixed seed are reproducible") {
  Architecture arch;
  arch.input_dim = 1;
  arch.hidden_widths = {8};
  arch.output_dim = 1;
  arch.activation = ActivationKind::gaussian(0.5);
  InitScheme xavier;
  NetworkParams p = initialize(arch, xavier, 2);
  Dataset d = make_dataset({{-1.0, 0.0}, {-0.3, 1.0}, {0.3, 0.5}, {1.0, -0.5}});
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.max_epochs = 50;
  tc.batch_size = 2;
  tc.stop_tol = 1e-12;
  tc.seed = 77;
  TrainResult a = train(p, d, tc);
  TrainResult b = train(p, d, tc);
  CHECK(a.params.flatten() == b.params.flatten());
}

TEST_CASE("telemetry callbacks fire at cadence and can abort") {
  NetworkParams p = NetworkParams::zeros(linear_model());
  Dataset d = make_dataset({{1.0, 2.0}});
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.max_epochs = 100;
  tc.telemetry_every = 10;
  tc.stop_tol = 1e-30;
  std::vector<long> seen;
  TrainResult r = train(p, d, tc, [&](long epoch, double, const NetworkParams&) {
    seen.push_back(epoch);
    return epoch < 30;
  });
  CHECK(seen == std::vector<long>{0, 10, 20, 30});
  CHECK(r.trace.abort_reason.find("epoch 30") != std::string::npos);
}

TEST_CASE("snapshots are recorded at cadence with strictly increasing epochs") {
  NetworkParams p = NetworkParams::zeros(linear_model());
  Dataset d = make_dataset({{1.0, 2.0}});
  TrainConfig tc;
  tc.lr = 1e-2;
  tc.max_epochs = 55;
  tc.telemetry_every = 20;
  tc.stop_tol = 1e-30;
  tc.record_snapshots = true;
  TrainResult r = train(p, d, tc);
  REQUIRE(r.trace.snapshots.size() >= 3);
  for (size_t i = 1; i < r.trace.snapshots.size(); ++i)
    CHECK(r.trace.snapshots[i].first > r.trace.snapshots[i - 1].first);
}

TEST_CASE("invalid configs are rejected") {
  TrainConfig tc;
  tc.lr = 0.0;
  CHECK_THROWS_AS(tc.validate(4), ConfigError);
  tc.lr = 1e-3;
  tc.batch_size = 9;
  CHECK_THROWS_AS(tc.validate(4), ConfigError);
}

TEST_CASE("bce loss is stable for extreme logits") {
  Eigen::MatrixXd out(2, 1), y(2, 1);
  out << 500.0, -500.0;
  y << 1.0, 0.0;
  auto [value, cot] = loss_and_output_cotangent(out, y, LossKind::kBCE);
  CHECK(std::isfinite(value));
  CHECK(value < 1e-10);
  CHECK(std::isfinite(cot(0, 0)));
}
