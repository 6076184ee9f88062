#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core/net.hpp"
#include "core/signals.hpp"

namespace speclab {

enum class LossKind { kMSE, kBCE, kCrossEntropy };

std::string loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

struct TrainConfig {
  double lr = 1e-4;
  long max_epochs = 200000;
  int batch_size = 0;  // 0 = full batch
  LossKind loss = LossKind::kMSE;
  double stop_tol = 1e-3;
  long telemetry_every = 1000;
  std::uint64_t seed = 0;
  bool record_snapshots = false;

  void validate(int dataset_size) const;
};

struct TrainTrace {
  std::vector<double> epoch_losses;
  std::vector<std::pair<long, NetworkParams>> snapshots;  // telemetry cadence
  long epochs_run = 0;
  double final_loss = 0.0;
  bool reached_tol = false;
  // Set when full-batch loss rises by more than 1e-9 relative between epochs;
  // the declared learning rate is then suspect.
  bool loss_increase_flagged = false;
  std::string abort_reason;
};

struct TrainResult {
  NetworkParams params;
  TrainTrace trace;
};

/// Mean loss over the dataset and d(loss)/d(outputs) as an n x output_dim matrix.
std::pair<double, Eigen::MatrixXd> loss_and_output_cotangent(const Eigen::MatrixXd& outputs,
                                                             const Eigen::MatrixXd& targets,
                                                             LossKind kind);

double loss_value(const NetworkParams& params, const Dataset& data, LossKind kind);

struct LossValueAndGrad {
  double value;
  Eigen::VectorXd grad;  // flat layout
};

/// Mean loss and its exact parameter gradient (one batched reverse pass;
/// equal to averaging per-point param_gradient calls weighted by the cost
/// derivative).
LossValueAndGrad loss_value_and_grad(const NetworkParams& params, const Dataset& data,
                                     LossKind kind);

/// Telemetry callback; returning false aborts the run with a recorded reason.
using TelemetryFn = std::function<bool(long epoch, double loss, const NetworkParams& params)>;

/// Plain (stochastic) gradient descent. Stops at loss < stop_tol or
/// max_epochs. Full-batch runs with a fixed seed are bit-deterministic.
TrainResult train(const NetworkParams& start, const Dataset& data, const TrainConfig& config,
                  const TelemetryFn& on_telemetry = nullptr);

/// Step-size bound from a coarse power-iteration estimate of the loss-Hessian
/// spectral norm at the given parameters: safety * 2 / lambda_max.
double suggest_learning_rate(const NetworkParams& params, const Dataset& data, LossKind kind,
                             double safety, std::uint64_t seed);

}  // namespace speclab
