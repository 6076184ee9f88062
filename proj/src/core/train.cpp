#include "core/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/rng.hpp"

namespace speclab {

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kMSE:
      return "mse";
    case LossKind::kBCE:
      return "bce";
    case LossKind::kCrossEntropy:
      return "crossentropy";
  }
  return "?";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "mse") return LossKind::kMSE;
  if (name == "bce") return LossKind::kBCE;
  if (name == "crossentropy" || name == "ce") return LossKind::kCrossEntropy;
  throw ConfigError("unknown loss kind: " + name);
}

void TrainConfig::validate(int dataset_size) const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (max_epochs < 0) throw ConfigError("max_epochs must be nonnegative");
  if (!(stop_tol > 0.0)) throw ConfigError("stop_tol must be positive");
  if (telemetry_every < 1) throw ConfigError("telemetry_every must be >= 1");
  if (batch_size < 0 || batch_size > dataset_size)
    throw ConfigError("batch_size must lie in [0, dataset size]");
}

std::pair<double, Eigen::MatrixXd> loss_and_output_cotangent(const Eigen::MatrixXd& outputs,
                                                             const Eigen::MatrixXd& targets,
                                                             LossKind kind) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
    throw ShapeError("loss: outputs and targets differ in shape");
  const double n = static_cast<double>(outputs.rows());
  switch (kind) {
    case LossKind::kMSE: {
      Eigen::MatrixXd r = outputs - targets;
      return {r.squaredNorm() / n, (2.0 / n) * r};
    }
    case LossKind::kBCE: {
      if (outputs.cols() != 1) throw ShapeError("bce expects a scalar output network");
      // Stable logistic loss on logits: max(z,0) - z*y + log(1 + exp(-|z|)).
      double value = 0.0;
      Eigen::MatrixXd cot(outputs.rows(), 1);
      for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        double z = outputs(i, 0), y = targets(i, 0);
        value += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        double p = 1.0 / (1.0 + std::exp(-z));
        cot(i, 0) = (p - y) / n;
      }
      return {value / n, cot};
    }
    case LossKind::kCrossEntropy: {
      double value = 0.0;
      Eigen::MatrixXd cot(outputs.rows(), outputs.cols());
      for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        double zmax = outputs.row(i).maxCoeff();
        Eigen::ArrayXd e = (outputs.row(i).array() - zmax).exp();
        double sum = e.sum();
        Eigen::ArrayXd p = e / sum;
        for (Eigen::Index j = 0; j < outputs.cols(); ++j) {
          if (targets(i, j) > 0.0)
            value -= targets(i, j) * (outputs(i, j) - zmax - std::log(sum));
          cot(i, j) = (p[j] - targets(i, j)) / n;
        }
      }
      return {value / n, cot};
    }
  }
  throw ConfigError("unreachable loss kind");
}

double loss_value(const NetworkParams& params, const Dataset& data, LossKind kind) {
  return loss_and_output_cotangent(forward(params, data.xs), data.ys, kind).first;
}

LossValueAndGrad loss_value_and_grad(const NetworkParams& params, const Dataset& data,
                                     LossKind kind) {
  data.validate();
  ForwardTrace t = forward_trace(params, data.xs);
  auto [value, cot] = loss_and_output_cotangent(t.as.back(), data.ys, kind);
  if (!std::isfinite(value)) throw NumericalDivergence("loss is non-finite");
  return {value, backprop(params, t, cot).flatten(params.arch)};
}

TrainResult train(const NetworkParams& start, const Dataset& data, const TrainConfig& config,
                  const TelemetryFn& on_telemetry) {
  start.validate();
  data.validate();
  config.validate(data.size());

  TrainResult result{start, {}};
  NetworkParams& params = result.params;
  TrainTrace& trace = result.trace;

  const int n = data.size();
  const int batch = (config.batch_size == 0) ? n : config.batch_size;
  const bool full_batch = batch >= n;

  auto telemetry = [&](long epoch, double loss) -> bool {
    if (config.record_snapshots) trace.snapshots.emplace_back(epoch, params);
    if (on_telemetry && !on_telemetry(epoch, loss, params)) {
      trace.abort_reason = "callback requested stop at epoch " + std::to_string(epoch);
      return false;
    }
    return true;
  };

  // epoch_losses[e] is the loss at theta_e, i.e. after e steps (sweeps).
  double prev_loss = 0.0;
  if (full_batch) {
    long steps = 0;
    for (;;) {
      ForwardTrace t = forward_trace(params, data.xs);
      auto [loss, cot] = loss_and_output_cotangent(t.as.back(), data.ys, config.loss);
      if (!std::isfinite(loss))
        throw NumericalDivergence("training loss became non-finite at epoch " +
                                  std::to_string(steps));
      trace.epoch_losses.push_back(loss);
      trace.epochs_run = steps;
      trace.final_loss = loss;
      if (steps > 0 && loss > prev_loss * (1.0 + 1e-9)) trace.loss_increase_flagged = true;
      prev_loss = loss;

      bool at_cadence = (steps % config.telemetry_every == 0);
      if (at_cadence && !telemetry(steps, loss)) return result;
      if (loss < config.stop_tol) {
        trace.reached_tol = true;
        if (!at_cadence) telemetry(steps, loss);
        return result;
      }
      if (steps >= config.max_epochs) return result;

      ParamGradients g = backprop(params, t, cot);
      g.axpy_into(params, -config.lr);
      ++steps;
    }
  }

  // Minibatch path: one epoch is a full shuffled sweep; the recorded loss is
  // re-evaluated on the whole dataset after the sweep.
  Rng shuffle_rng = Rng(config.seed).stream(0x5D);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  double loss = loss_value(params, data, config.loss);
  trace.epoch_losses.push_back(loss);
  trace.final_loss = loss;
  prev_loss = loss;
  if (!telemetry(0, loss)) return result;
  if (loss < config.stop_tol) {
    trace.reached_tol = true;
    return result;
  }

  for (long epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(shuffle_rng.below(i + 1))]);
    for (int s = 0; s < n; s += batch) {
      int m = std::min(batch, n - s);
      Eigen::MatrixXd xs(m, data.xs.cols()), ys(m, data.ys.cols());
      for (int i = 0; i < m; ++i) {
        xs.row(i) = data.xs.row(order[s + i]);
        ys.row(i) = data.ys.row(order[s + i]);
      }
      ForwardTrace t = forward_trace(params, xs);
      auto [bloss, cot] = loss_and_output_cotangent(t.as.back(), ys, config.loss);
      if (!std::isfinite(bloss))
        throw NumericalDivergence("training loss became non-finite at epoch " +
                                  std::to_string(epoch));
      ParamGradients g = backprop(params, t, cot);
      g.axpy_into(params, -config.lr);
    }
    loss = loss_value(params, data, config.loss);
    if (!std::isfinite(loss))
      throw NumericalDivergence("training loss became non-finite at epoch " +
                                std::to_string(epoch));
    trace.epoch_losses.push_back(loss);
    trace.epochs_run = epoch;
    trace.final_loss = loss;
    prev_loss = loss;

    bool at_cadence = (epoch % config.telemetry_every == 0);
    if (at_cadence && !telemetry(epoch, loss)) return result;
    if (loss < config.stop_tol) {
      trace.reached_tol = true;
      if (!at_cadence) telemetry(epoch, loss);
      return result;
    }
  }
  return result;
}

double suggest_learning_rate(const NetworkParams& params, const Dataset& data, LossKind kind,
                             double safety, std::uint64_t seed) {
  // Coarse spectral-norm estimate of the loss Hessian via power iteration on a
  // central-difference Hessian-vector product. Presets use this to place plain
  // GD inside its stability region; the flatness module owns the precise
  // estimators.
  const Eigen::Index P = params.param_count();
  const Eigen::VectorXd theta = params.flatten();
  const double eps = 1e-3 * (1.0 + theta.norm());
  auto hvp = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd gp =
        loss_value_and_grad(NetworkParams::unflatten(params.arch, theta + eps * u), data, kind)
            .grad;
    Eigen::VectorXd gm =
        loss_value_and_grad(NetworkParams::unflatten(params.arch, theta - eps * u), data, kind)
            .grad;
    return ((gp - gm) / (2.0 * eps)).eval();
  };

  Rng rng = Rng(seed).stream(0x12);
  Eigen::VectorXd v(P);
  for (Eigen::Index i = 0; i < P; ++i) v[i] = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd hv = hvp(v);
    double r = v.dot(hv);
    double norm = hv.norm();
    if (norm < 1e-30) break;
    v = hv / norm;
    if (it > 3 && std::abs(r - lambda) < 1e-3 * std::max(1.0, std::abs(r))) {
      lambda = r;
      break;
    }
    lambda = r;
  }
  double curvature = std::max(std::abs(lambda), 1e-12);
  return safety * 2.0 / curvature;
}

}  // namespace speclab
