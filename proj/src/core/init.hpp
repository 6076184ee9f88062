#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/net.hpp"
#include "core/signals.hpp"
#include "core/train.hpp"

namespace speclab {

enum class InitKind { kXavier, kNormal, kSitzmann, kPretrained };

enum class PretrainTargetKind { kSinusoid, kDC, kRandomLabels };

struct PretrainTarget {
  PretrainTargetKind kind = PretrainTargetKind::kSinusoid;
  // kSinusoid
  double frequency = 1.0;  // cycles per unit
  double amplitude = 1.0;
  // kDC
  double level = 0.0;
  // kRandomLabels
  RandomLabelKind label_kind = RandomLabelKind::kBinary;
  int n_points = 64;
  int n_bins = 4;

  void validate() const;
};

struct PretrainBudget {
  long max_epochs = 200000;
  double loss_tol = 1e-3;

  void validate() const;
};

struct PretrainSetup {
  PretrainTarget target;
  PretrainBudget budget;
  double domain_a = -4.0;
  double domain_b = 4.0;
  int grid_points = 512;  // dense, noiseless pretraining grid (signal targets)
  // lr > 0 uses that step size; lr <= 0 derives one from the loss curvature at
  // the Xavier start with |lr| as the safety factor (0 means 0.4).
  double lr = 0.0;
  long telemetry_every = 1000;
};

struct InitScheme {
  InitKind kind = InitKind::kXavier;
  double sigma = 0.03;    // kNormal
  double omega0 = 30.0;   // kSitzmann
  PretrainSetup pretrain; // kPretrained

  std::string label() const;
};

/// Deterministic initialization per (arch, scheme, seed). A Sitzmann request
/// on a non-sinusoid activation is honored with the same bounds and recorded
/// as a warning. Pretrained schemes run pretrain_init and return its params.
NetworkParams initialize(const Architecture& arch, const InitScheme& scheme, std::uint64_t seed,
                         std::vector<std::string>* warnings = nullptr);

struct PretrainResult {
  NetworkParams params;
  double final_loss = 0.0;
  long epochs_used = 0;
  double learning_rate = 0.0;
  Dataset dataset;  // the pretraining grid actually used
};

/// Xavier start, then gradient descent on the pretraining target until
/// loss < budget.loss_tol or the epoch budget runs out. Throws
/// PretrainDiverged if the budget expires with loss above 10x tol.
PretrainResult pretrain_init(const Architecture& arch, const InitScheme& scheme,
                             std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

}  // namespace speclab
