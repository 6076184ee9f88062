#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/flatness.hpp"
#include "core/init.hpp"
#include "core/net.hpp"
#include "core/signals.hpp"
#include "core/spectrum.hpp"
#include "core/train.hpp"

namespace speclab {

struct SpectrumSection {
  GridSpec grid;
  double cutoff = 0.5;
  double low_threshold = 0.05;
  double high_threshold = 0.20;
  std::vector<double> tracked;
  double convergence_threshold = 0.1;
};

struct TestGridSection {
  double a = -3.5;
  double b = 3.5;
  int n = 512;
};

struct FlowSection {
  GridSpec quad;
  double k_max = 40.0;
  double lr = 1e-4;
  std::vector<double> lr_sweep{1e-3, 1e-4, 1e-5};
  std::vector<std::string> activations{"relu", "gaussian", "sinusoid"};
  int width = 64;
  int depth = 2;
};

/// One (activation, init) unit of a multi-cell experiment. Architecture and
/// optimizer knobs may be overridden per cell; zeros/empty defer to the run's
/// root settings.
struct ExperimentCell {
  std::string name;
  ActivationKind activation;
  InitScheme init;
  std::vector<int> hidden_widths;  // empty: use root arch
  double lr = 0.0;                 // > 0: fixed step size for this cell
  double lr_safety = 0.0;          // > 0: derive lr from loss curvature at init
  long max_epochs = 0;             // > 0: override root train budget
};

struct Exp1Section {
  std::vector<int> depths{2, 3, 4, 5, 6};
  std::vector<std::string> activations{"relu", "gaussian", "sinusoid"};
};

struct Exp2Section {
  std::vector<ExperimentCell> cells;
};

struct Exp5Section {
  int n_signals = 20;
  std::vector<ExperimentCell> cells;
};

struct AppendixSection {
  std::vector<std::string> label_kinds{"mse_noise", "binary", "multiclass"};
  int n_points = 64;
  int n_bins = 4;
  int histogram_bins = 32;
  bool emit_heatmaps = true;
  long heatmap_max_epochs = 40000;
};

/// Fully resolved run description: every preset is expressible here, and the
/// JSON image of this struct reproduces the run.
struct RunConfig {
  std::string preset;
  std::uint64_t seed = 0;

  SignalSpec signal;
  SamplingSpec sampling;
  Architecture arch;
  InitScheme init;
  TrainConfig train;
  // > 0: derive train.lr from the loss curvature at the initialized params,
  // with this safety factor (overrides train.lr).
  double lr_auto_safety = 0.0;

  SpectrumSection spectrum;
  TestGridSection test;
  FlowSection flow;
  FlatnessConfig flatness;
  double landscape_extent = 0.5;
  int landscape_resolution = 41;

  Exp1Section exp1;
  Exp2Section exp2;
  Exp5Section exp5;
  AppendixSection appendix;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Accepts JSON directly, or the line format `dotted.key = value` where value
/// is any JSON scalar/array (bare words fall back to strings).
RunConfig parse_config_text(const std::string& text);

/// Applies `dotted.key=value` assignments onto the JSON image.
nlohmann::json apply_overrides(nlohmann::json j, const std::vector<std::string>& overrides);

/// The same key/value text rendering the parser accepts.
std::string config_to_text(const RunConfig& config);

ActivationKind activation_from_name(const std::string& name, double gaussian_width = 0.1,
                                    double omega0 = 30.0);

}  // namespace speclab
