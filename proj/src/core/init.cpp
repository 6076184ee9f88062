#include "core/init.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace speclab {

void PretrainTarget::validate() const {
  if (kind == PretrainTargetKind::kSinusoid && !(frequency > 0.0))
    throw ConfigError("pretrain sinusoid frequency must be positive");
  if (kind == PretrainTargetKind::kRandomLabels) {
    if (n_points < 2) throw ConfigError("random-label pretraining needs n_points >= 2");
    if (label_kind == RandomLabelKind::kMulticlass && n_bins < 2)
      throw ConfigError("multiclass pretraining needs n_bins >= 2");
  }
}

void PretrainBudget::validate() const {
  if (max_epochs < 1) throw ConfigError("pretrain budget needs max_epochs >= 1");
  if (!(loss_tol > 0.0)) throw ConfigError("pretrain budget needs loss_tol > 0");
}

std::string InitScheme::label() const {
  switch (kind) {
    case InitKind::kXavier:
      return "xavier";
    case InitKind::kNormal:
      return "normal" + std::to_string(sigma);
    case InitKind::kSitzmann:
      return "sitzmann";
    case InitKind::kPretrained:
      return "pretrained";
  }
  return "?";
}

namespace {

// Stream derivation: seed -> (layer, slot) with slot 0 = weights, 1 = biases.
NetworkParams draw_params(const Architecture& arch, std::uint64_t seed, InitKind kind,
                          double sigma, double omega0) {
  NetworkParams p = NetworkParams::zeros(arch);
  Rng root(seed);
  for (int l = 0; l < arch.num_layers(); ++l) {
    auto [out, in] = arch.layer_shape(l);
    Rng wrng = root.stream(static_cast<std::uint64_t>(l), 0);
    Rng brng = root.stream(static_cast<std::uint64_t>(l), 1);
    switch (kind) {
      case InitKind::kXavier: {
        double limit = std::sqrt(6.0 / (in + out));
        for (int r = 0; r < out; ++r)
          for (int c = 0; c < in; ++c) p.weights[l](r, c) = wrng.uniform(-limit, limit);
        // Framework-default bias draw. With all-zero biases a 1-D ReLU stack
        // has every kink pinned at x = 0, which collapses the init tangent
        // space to a handful of functions and blocks per-frequency
        // convergence measurements outright.
        double blimit = 1.0 / std::sqrt(static_cast<double>(in));
        for (int r = 0; r < out; ++r) p.biases[l][r] = brng.uniform(-blimit, blimit);
        break;
      }
      case InitKind::kNormal: {
        for (int r = 0; r < out; ++r)
          for (int c = 0; c < in; ++c) p.weights[l](r, c) = sigma * wrng.normal();
        for (int r = 0; r < out; ++r) p.biases[l][r] = sigma * brng.normal();
        break;
      }
      case InitKind::kSitzmann: {
        double limit = (l == 0) ? 1.0 / in : std::sqrt(6.0 / in) / omega0;
        for (int r = 0; r < out; ++r)
          for (int c = 0; c < in; ++c) p.weights[l](r, c) = wrng.uniform(-limit, limit);
        break;
      }
      case InitKind::kPretrained:
        throw ConfigError("draw_params cannot realize a pretrained scheme");
    }
  }
  return p;
}

}  // namespace

NetworkParams initialize(const Architecture& arch, const InitScheme& scheme, std::uint64_t seed,
                         std::vector<std::string>* warnings) {
  arch.validate();
  if (scheme.kind == InitKind::kNormal && !(scheme.sigma > 0.0))
    throw ConfigError("normal init requires sigma > 0");
  if (scheme.kind == InitKind::kPretrained)
    return pretrain_init(arch, scheme, seed, warnings).params;
  if (scheme.kind == InitKind::kSitzmann && arch.activation.kind != Activation::kSinusoid &&
      warnings) {
    warnings->push_back("sitzmann initialization applied to a " + arch.activation.name() +
                        " network; using the same uniform bounds");
  }
  return draw_params(arch, seed, scheme.kind, scheme.sigma, scheme.omega0);
}

PretrainResult pretrain_init(const Architecture& arch, const InitScheme& scheme,
                             std::uint64_t seed, std::vector<std::string>* warnings) {
  const PretrainSetup& setup = scheme.pretrain;
  setup.target.validate();
  setup.budget.validate();

  PretrainResult result;
  LossKind loss = LossKind::kMSE;

  switch (setup.target.kind) {
    case PretrainTargetKind::kSinusoid: {
      SignalSpec sig;
      sig.terms = {{setup.target.amplitude, setup.target.frequency, 0.0}};
      SamplingSpec sampling;
      sampling.a = setup.domain_a;
      sampling.b = setup.domain_b;
      sampling.mode = SamplingSpec::Mode::kCount;
      sampling.count = setup.grid_points;
      double nyquist = nyquist_frequency(sampling);
      if (setup.target.frequency >= nyquist)
        throw ConfigError("pretrain sinusoid frequency exceeds the grid Nyquist limit");
      result.dataset = sample_dataset(sig, sampling, seed);
      break;
    }
    case PretrainTargetKind::kDC: {
      SignalSpec sig;
      sig.dc = setup.target.level;
      SamplingSpec sampling;
      sampling.a = setup.domain_a;
      sampling.b = setup.domain_b;
      sampling.mode = SamplingSpec::Mode::kCount;
      sampling.count = setup.grid_points;
      result.dataset = sample_dataset(sig, sampling, seed);
      break;
    }
    case PretrainTargetKind::kRandomLabels: {
      result.dataset =
          random_label_dataset(setup.target.n_points, setup.target.label_kind,
                               setup.target.n_bins, setup.domain_a, setup.domain_b, seed);
      switch (setup.target.label_kind) {
        case RandomLabelKind::kMseNoise:
          loss = LossKind::kMSE;
          break;
        case RandomLabelKind::kBinary:
          loss = LossKind::kBCE;
          break;
        case RandomLabelKind::kMulticlass:
          loss = LossKind::kCrossEntropy;
          if (arch.output_dim != setup.target.n_bins)
            throw ShapeError("multiclass pretraining needs output_dim == n_bins");
          break;
      }
      break;
    }
  }

  InitScheme xavier;
  xavier.kind = InitKind::kXavier;
  NetworkParams start = initialize(arch, xavier, seed, warnings);

  double lr = setup.lr;
  if (!(lr > 0.0)) {
    double safety = setup.lr < 0.0 ? -setup.lr : 0.4;
    lr = suggest_learning_rate(start, result.dataset, loss, safety, seed);
  }

  TrainConfig config;
  config.lr = lr;
  config.max_epochs = setup.budget.max_epochs;
  config.loss = loss;
  config.stop_tol = setup.budget.loss_tol;
  config.telemetry_every = setup.telemetry_every;
  config.seed = seed;

  TrainResult trained = train(start, result.dataset, config);
  result.params = std::move(trained.params);
  result.final_loss = trained.trace.final_loss;
  result.epochs_used = trained.trace.epochs_run;
  result.learning_rate = lr;

  if (!trained.trace.reached_tol && result.final_loss > 10.0 * setup.budget.loss_tol) {
    throw PretrainDiverged("pretraining exhausted " + std::to_string(setup.budget.max_epochs) +
                               " epochs at loss " + std::to_string(result.final_loss) +
                               " (tol " + std::to_string(setup.budget.loss_tol) + ")",
                           trained.trace.epoch_losses);
  }
  if (trained.trace.loss_increase_flagged && warnings)
    warnings->push_back("pretraining loss was not monotonically nonincreasing at lr " +
                        std::to_string(lr));
  return result;
}

}  // namespace speclab
