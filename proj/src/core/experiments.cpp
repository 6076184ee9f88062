#include "core/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/flow.hpp"
#include "core/io.hpp"
#include "core/rng.hpp"

namespace speclab {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared building blocks

struct Sink {
  fs::path dir;
  RunReport* report;

  fs::path file(const std::string& name) const { return dir / name; }
  void record(const std::string& name) {
    report->artifacts.push_back({name, file_checksum(dir / name)});
  }
  void metric(const std::string& key, double value) {
    if (std::isfinite(value)) {
      report->metrics[key] = value;
    } else {
      report->warnings.push_back("metric " + key + " was non-finite and dropped");
    }
  }
};

Architecture arch_with(const Architecture& base, const ActivationKind& act, int depth = -1,
                       int output_dim = -1) {
  Architecture a = base;
  a.activation = act;
  if (depth >= 0) {
    int width = base.hidden_widths.empty() ? 128 : base.hidden_widths.front();
    a.hidden_widths.assign(static_cast<size_t>(depth), width);
  }
  if (output_dim >= 0) a.output_dim = output_dim;
  return a;
}

Architecture cell_arch(const RunConfig& config, const ExperimentCell& cell) {
  Architecture a = arch_with(config.arch, cell.activation);
  if (!cell.hidden_widths.empty()) a.hidden_widths = cell.hidden_widths;
  return a;
}

// Cell overrides win over the root settings: fixed lr, then a cell-specific
// curvature-based choice, then the run-level policy.
void apply_cell_train_overrides(const RunConfig& config, const ExperimentCell& cell,
                                const NetworkParams& params0, const Dataset& data,
                                TrainConfig& tc, std::uint64_t lr_seed) {
  if (cell.max_epochs > 0) tc.max_epochs = cell.max_epochs;
  if (cell.lr > 0.0) {
    tc.lr = cell.lr;
  } else if (cell.lr_safety > 0.0) {
    tc.lr = suggest_learning_rate(params0, data, tc.loss, cell.lr_safety, lr_seed);
  } else if (config.lr_auto_safety > 0.0) {
    tc.lr = suggest_learning_rate(params0, data, tc.loss, config.lr_auto_safety, lr_seed);
  }
}

Spectrum signal_spectrum(const SignalSpec& signal, const GridSpec& grid) {
  Eigen::VectorXd xs = grid.points();
  return dft(eval_signal(signal, xs), grid);
}

double dense_test_mse(const NetworkParams& params, const SignalSpec& signal,
                      const TestGridSection& test) {
  Eigen::MatrixXd X(test.n, 1);
  for (int i = 0; i < test.n; ++i) X(i, 0) = test.a + i * (test.b - test.a) / (test.n - 1);
  Eigen::VectorXd pred = forward(params, X).col(0);
  Eigen::VectorXd truth = eval_signal(signal, Eigen::VectorXd(X.col(0)));
  return (pred - truth).squaredNorm() / test.n;
}

double resolve_lr(const RunConfig& config, const NetworkParams& params, const Dataset& data,
                  LossKind loss) {
  if (config.lr_auto_safety > 0.0)
    return suggest_learning_rate(params, data, loss, config.lr_auto_safety, config.seed);
  return config.train.lr;
}

void save_fit_csv(Sink& sink, const std::string& name, const NetworkParams& params,
                  const SignalSpec& signal, const TestGridSection& test) {
  std::vector<std::vector<double>> rows;
  Eigen::MatrixXd X(test.n, 1);
  for (int i = 0; i < test.n; ++i) X(i, 0) = test.a + i * (test.b - test.a) / (test.n - 1);
  Eigen::VectorXd pred = forward(params, X).col(0);
  for (int i = 0; i < test.n; ++i)
    rows.push_back({X(i, 0), pred[i], signal.eval(X(i, 0))});
  write_csv(sink.file(name), {"x", "y_net", "y_signal"}, rows);
  sink.record(name);
}

Eigen::VectorXd mean_output_samples(const NetworkParams& params, const GridSpec& grid) {
  Eigen::VectorXd xs = grid.points();
  Eigen::MatrixXd X(xs.size(), 1);
  X.col(0) = xs;
  return forward(params, X).rowwise().mean();
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
  return Rng(seed).stream(tag, index).next_u64();
}

std::string fmt_k(double k) {
  std::ostringstream ss;
  ss << k;
  return ss.str();
}

// ---------------------------------------------------------------------------
// exp1: depth sweep at fixed width (Fig. 1 data)

void run_exp1(const RunConfig& config, Sink& sink, bool emit_svg) {
  Dataset data = sample_dataset(config.signal, config.sampling, config.seed);
  save_dataset_csv(sink.file("train_points.csv"), data);
  sink.record("train_points.csv");

  for (const std::string& act_name : config.exp1.activations) {
    ActivationKind act = activation_from_name(act_name, config.arch.activation.gaussian_width,
                                              config.arch.activation.omega0);
    std::vector<std::pair<std::string, std::vector<double>>> fit_series;
    for (int depth : config.exp1.depths) {
      std::string tag = act_name + "/d" + std::to_string(depth);
      std::string stem = act_name + "_d" + std::to_string(depth);
      Architecture arch = arch_with(config.arch, act, depth);
      NetworkParams params0 =
          initialize(arch, config.init, config.seed, &sink.report->warnings);

      Spectrum init_spec = network_spectrum(params0, config.spectrum.grid);
      save_spectrum_csv(sink.file("spectrum_init_" + stem + ".csv"), init_spec);
      sink.record("spectrum_init_" + stem + ".csv");
      BandwidthEnergy bw0 = bandwidth_energy(init_spec, config.spectrum.cutoff);
      sink.metric(tag + "/init_high_fraction", bw0.fraction);

      TrainConfig tc = config.train;
      tc.seed = config.seed;
      tc.lr = resolve_lr(config, params0, data, tc.loss);
      sink.metric(tag + "/lr", tc.lr);
      TrainResult res = train(params0, data, tc);

      Spectrum final_spec = network_spectrum(res.params, config.spectrum.grid);
      save_spectrum_csv(sink.file("spectrum_final_" + stem + ".csv"), final_spec);
      sink.record("spectrum_final_" + stem + ".csv");
      save_fit_csv(sink, "fit_" + stem + ".csv", res.params, config.signal, config.test);

      sink.metric(tag + "/final_high_fraction",
                  bandwidth_energy(final_spec, config.spectrum.cutoff).fraction);
      sink.metric(tag + "/train_loss", res.trace.final_loss);
      sink.metric(tag + "/reached_tol", res.trace.reached_tol ? 1.0 : 0.0);
      sink.metric(tag + "/test_mse", dense_test_mse(res.params, config.signal, config.test));

      if (emit_svg) {
        Eigen::MatrixXd X(config.test.n, 1);
        for (int i = 0; i < config.test.n; ++i)
          X(i, 0) = config.test.a + i * (config.test.b - config.test.a) / (config.test.n - 1);
        std::vector<double> xs(X.col(0).data(), X.col(0).data() + X.rows());
        Eigen::VectorXd pred = forward(res.params, X).col(0);
        fit_series.emplace_back("depth " + std::to_string(depth),
                                std::vector<double>(pred.data(), pred.data() + pred.size()));
        if (depth == config.exp1.depths.back()) {
          fit_series.emplace_back(
              "signal",
              std::vector<double>(config.test.n, 0.0));
          auto& sig = fit_series.back().second;
          for (int i = 0; i < config.test.n; ++i) sig[static_cast<size_t>(i)] = config.signal.eval(xs[static_cast<size_t>(i)]);
          svg_line_plot(sink.file("fits_" + act_name + ".svg"), xs, fit_series,
                        act_name + " interpolation by depth");
          sink.record("fits_" + act_name + ".svg");
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// exp2: per-frequency convergence heatmaps (Fig. 2 data)

void run_exp2(const RunConfig& config, Sink& sink, bool emit_svg) {
  Dataset data = sample_dataset(config.signal, config.sampling, config.seed);
  Spectrum target = signal_spectrum(config.signal, config.spectrum.grid);

  for (const ExperimentCell& cell : config.exp2.cells) {
    Architecture arch = cell_arch(config, cell);
    NetworkParams params0 = initialize(arch, cell.init, config.seed, &sink.report->warnings);

    TrainConfig tc = config.train;
    tc.seed = config.seed;
    apply_cell_train_overrides(config, cell, params0, data, tc, config.seed);
    sink.metric(cell.name + "/lr", tc.lr);

    SpectrumTracker tracker(target, config.spectrum.grid, config.spectrum.tracked);
    TrainResult res = train(params0, data, tc,
                            [&](long epoch, double loss, const NetworkParams& p) {
                              (void)loss;
                              return tracker.observe(epoch, p);
                            });
    ConvergenceHeatmap heatmap = tracker.heatmap();

    save_heatmap_csv(sink.file("heatmap_" + cell.name + ".csv"), heatmap);
    sink.record("heatmap_" + cell.name + ".csv");
    save_heatmap_csv(sink.file("heatmap_mag_" + cell.name + ".csv"), heatmap, true);
    sink.record("heatmap_mag_" + cell.name + ".csv");
    if (emit_svg) {
      svg_heatmap(sink.file("heatmap_" + cell.name + ".svg"), heatmap,
                  cell.name + " frequency convergence");
      sink.record("heatmap_" + cell.name + ".svg");
    }

    auto conv = convergence_epochs(heatmap, config.spectrum.convergence_threshold);
    std::vector<double> ks = config.spectrum.tracked;
    std::vector<double> epochs_for_rank(ks.size());
    std::vector<std::vector<double>> summary_rows;
    for (size_t i = 0; i < ks.size(); ++i) {
      double e = conv[i] ? static_cast<double>(*conv[i])
                         : std::numeric_limits<double>::quiet_NaN();
      epochs_for_rank[i] = e;
      summary_rows.push_back({ks[i], conv[i] ? e : -1.0});
      if (conv[i]) sink.metric(cell.name + "/conv_epoch/k" + fmt_k(ks[i]), e);
      sink.metric(cell.name + "/converged/k" + fmt_k(ks[i]), conv[i] ? 1.0 : 0.0);
    }
    write_csv(sink.file("convergence_epochs_" + cell.name + ".csv"),
              {"k", "first_epoch_or_-1"}, summary_rows);
    sink.record("convergence_epochs_" + cell.name + ".csv");

    sink.metric(cell.name + "/spearman", spearman_rank_correlation(ks, epochs_for_rank));
    sink.metric(cell.name + "/final_loss", res.trace.final_loss);
    sink.metric(cell.name + "/reached_tol", res.trace.reached_tol ? 1.0 : 0.0);
  }
}

// ---------------------------------------------------------------------------
// exp3: initialization bandwidth vs generalization (Fig. 3 data)

void run_exp3(const RunConfig& config, Sink& sink, bool emit_svg) {
  Dataset data = sample_dataset(config.signal, config.sampling, config.seed);
  save_dataset_csv(sink.file("train_points.csv"), data);
  sink.record("train_points.csv");

  NetworkParams params0 = initialize(config.arch, config.init, config.seed,
                                     &sink.report->warnings);

  Spectrum init_spec = network_spectrum(params0, config.spectrum.grid);
  save_spectrum_csv(sink.file("spectrum_init.csv"), init_spec);
  sink.record("spectrum_init.csv");
  sink.metric("init_bandwidth", bandwidth_energy(init_spec, config.spectrum.cutoff).fraction);

  TrainConfig tc = config.train;
  tc.seed = config.seed;
  tc.lr = resolve_lr(config, params0, data, tc.loss);
  sink.metric("lr", tc.lr);
  TrainResult res = train(params0, data, tc);

  Spectrum final_spec = network_spectrum(res.params, config.spectrum.grid);
  save_spectrum_csv(sink.file("spectrum_final.csv"), final_spec);
  sink.record("spectrum_final.csv");
  save_loss_csv(sink.file("train_loss.csv"), res.trace.epoch_losses);
  sink.record("train_loss.csv");
  save_fit_csv(sink, "fit.csv", res.params, config.signal, config.test);
  save_params(sink.file("params_final.json"), res.params);
  sink.record("params_final.json");
  sink.record("params_final.bin");

  sink.metric("final_bandwidth", bandwidth_energy(final_spec, config.spectrum.cutoff).fraction);
  sink.metric("train_loss", res.trace.final_loss);
  sink.metric("reached_tol", res.trace.reached_tol ? 1.0 : 0.0);
  sink.metric("test_mse", dense_test_mse(res.params, config.signal, config.test));

  // Pretrained starts: how much of the acquired spike survives training.
  if (config.init.kind == InitKind::kPretrained &&
      config.init.pretrain.target.kind == PretrainTargetKind::kSinusoid) {
    double k = config.init.pretrain.target.frequency;
    int bin = init_spec.bin_of(k);
    double before = std::abs(init_spec.coeffs[bin]);
    double after = std::abs(final_spec.coeffs[bin]);
    sink.metric("spike_k", k);
    sink.metric("spike_before", before);
    sink.metric("spike_after", after);
    if (before > 0.0) sink.metric("spike_retention", after / before);
  }
  if (emit_svg) {
    Eigen::VectorXd xs = config.spectrum.grid.points();
    std::vector<double> kfreqs(final_spec.freqs.begin(), final_spec.freqs.end());
    std::vector<std::pair<std::string, std::vector<double>>> series;
    series.emplace_back("init", std::vector<double>(init_spec.power.data(),
                                                    init_spec.power.data() + init_spec.power.size()));
    series.emplace_back("final", std::vector<double>(final_spec.power.data(),
                                                     final_spec.power.data() + final_spec.power.size()));
    svg_line_plot(sink.file("spectra.svg"), kfreqs, series, config.preset + " power spectra",
                  true);
    sink.record("spectra.svg");
  }
}

// ---------------------------------------------------------------------------
// exp5: flat-minima metrics over random two-tone signals (Fig. 4 / Table 2)

void run_exp5(const RunConfig& config, Sink& sink, bool emit_svg) {
  const int n_signals = config.exp5.n_signals;
  const auto& cells = config.exp5.cells;

  // Pretraining does not depend on the signal, so pretrained cell inits are
  // computed once and shared across signals.
  std::map<std::string, NetworkParams> pretrained;
  for (const auto& cell : cells) {
    if (cell.init.kind == InitKind::kPretrained) {
      Architecture arch = cell_arch(config, cell);
      PretrainResult pr =
          pretrain_init(arch, cell.init, config.seed, &sink.report->warnings);
      sink.metric(cell.name + "/pretrain_loss", pr.final_loss);
      sink.metric(cell.name + "/pretrain_epochs", static_cast<double>(pr.epochs_used));
      pretrained.emplace(cell.name, std::move(pr.params));
    }
  }

  struct UnitResult {
    std::map<std::string, double> metrics;
    std::vector<std::string> warnings;
  };
  const int n_units = n_signals * static_cast<int>(cells.size());
  std::vector<UnitResult> units(static_cast<size_t>(n_units));
  std::vector<json> unit_reports(static_cast<size_t>(n_units));

  parallel_for(n_units, [&](int u) {
    int s = u / static_cast<int>(cells.size());
    const ExperimentCell& cell = cells[static_cast<size_t>(u) % cells.size()];
    UnitResult& out = units[static_cast<size_t>(u)];
    std::string tag = cell.name + "/s" + std::to_string(s);

    SignalSpec signal = random_two_tone_signal(sub_seed(config.seed, 0xE5, s));
    Dataset data = sample_dataset(signal, config.sampling, config.seed);

    Architecture arch = cell_arch(config, cell);
    NetworkParams params0 = pretrained.count(cell.name)
                                ? pretrained.at(cell.name)
                                : initialize(arch, cell.init,
                                             sub_seed(config.seed, 0x1417, u), &out.warnings);

    TrainConfig tc = config.train;
    tc.seed = sub_seed(config.seed, 0x7214, u);
    apply_cell_train_overrides(config, cell, params0, data, tc, tc.seed);
    TrainResult res = train(params0, data, tc);

    std::vector<Eigen::VectorXd> top_vectors;
    FlatnessConfig fc = config.flatness;
    fc.seed = sub_seed(config.seed, 0xF1A7, u);
    FlatnessReport flat = flatness_report(res.params, data, tc.loss, fc, tc.stop_tol,
                                          &top_vectors);

    out.metrics[tag + "/train_loss"] = res.trace.final_loss;
    out.metrics[tag + "/reached_tol"] = res.trace.reached_tol ? 1.0 : 0.0;
    out.metrics[tag + "/trace"] = flat.trace_estimate;
    out.metrics[tag + "/expected_eigenvalue"] = flat.expected_eigenvalue;
    out.metrics[tag + "/spectral_norm"] = flat.spectral_norm;

    json jr;
    jr["cell"] = cell.name;
    jr["signal_index"] = s;
    jr["signal"] = {{"w1", signal.terms[0].frequency},
                    {"a1", signal.terms[0].amplitude},
                    {"w2", signal.terms[1].frequency},
                    {"a2", signal.terms[1].amplitude}};
    jr["train_loss"] = res.trace.final_loss;
    jr["trace"] = flat.trace_estimate;
    jr["trace_std_error"] = flat.trace_std_error;
    jr["expected_eigenvalue"] = flat.expected_eigenvalue;
    jr["spectral_norm"] = flat.spectral_norm;
    jr["top_eigenvalues"] = flat.top_eigenvalues;
    jr["param_count"] = flat.param_count;
    jr["n_probes"] = flat.n_probes;
    jr["n_power_iters"] = flat.n_power_iters;
    jr["not_at_minimum_warning"] = flat.not_at_minimum_warning;
    unit_reports[static_cast<size_t>(u)] = std::move(jr);

    // One landscape slice per cell, on the first signal.
    if (s == 0 && top_vectors.size() >= 2) {
      LandscapeSlice slice =
          landscape_slice(res.params, data, tc.loss, top_vectors[0], top_vectors[1],
                          config.landscape_extent, config.landscape_resolution);
      save_landscape_csv(sink.file("landscape_" + cell.name + ".csv"), slice);
      if (emit_svg)
        svg_landscape(sink.file("landscape_" + cell.name + ".svg"), slice,
                      cell.name + " loss landscape");
    }
  });

  // Deterministic merge order.
  for (int u = 0; u < n_units; ++u) {
    for (const auto& [k, v] : units[static_cast<size_t>(u)].metrics) sink.metric(k, v);
    for (const auto& w : units[static_cast<size_t>(u)].warnings)
      sink.report->warnings.push_back(w);
  }
  for (const auto& cell : cells) {
    if (fs::exists(sink.file("landscape_" + cell.name + ".csv")))
      sink.record("landscape_" + cell.name + ".csv");
    if (emit_svg && fs::exists(sink.file("landscape_" + cell.name + ".svg")))
      sink.record("landscape_" + cell.name + ".svg");
  }
  {
    json all = json::array();
    for (auto& jr : unit_reports) all.push_back(std::move(jr));
    write_text_file(sink.file("flatness_reports.json"), all.dump(2) + "\n");
    sink.record("flatness_reports.json");
  }

  // Table-2-style aggregate.
  json table;
  for (const auto& cell : cells) {
    double trace_sum = 0.0, eig_sum = 0.0, norm_sum = 0.0;
    for (int s = 0; s < n_signals; ++s) {
      std::string tag = cell.name + "/s" + std::to_string(s);
      trace_sum += sink.report->metrics.at(tag + "/trace");
      eig_sum += sink.report->metrics.at(tag + "/expected_eigenvalue");
      norm_sum += sink.report->metrics.at(tag + "/spectral_norm");
    }
    table[cell.name] = {{"hessian_trace", trace_sum / n_signals},
                        {"expected_eigenvalue", eig_sum / n_signals},
                        {"spectral_norm", norm_sum / n_signals}};
    sink.metric(cell.name + "/mean_trace", trace_sum / n_signals);
    sink.metric(cell.name + "/mean_expected_eigenvalue", eig_sum / n_signals);
    sink.metric(cell.name + "/mean_spectral_norm", norm_sum / n_signals);
  }
  write_text_file(sink.file("table2_style.json"), table.dump(2) + "\n");
  sink.record("table2_style.json");

  // Pairwise orderings (the paper's claim is about these, not magnitudes).
  auto fraction_greater = [&](const std::string& hi, const std::string& lo,
                              const std::string& metric) {
    int wins = 0;
    for (int s = 0; s < n_signals; ++s) {
      double a = sink.report->metrics.at(hi + "/s" + std::to_string(s) + "/" + metric);
      double b = sink.report->metrics.at(lo + "/s" + std::to_string(s) + "/" + metric);
      if (a > b) ++wins;
    }
    return static_cast<double>(wins) / n_signals;
  };
  for (const std::string metric : {"trace", "spectral_norm"}) {
    sink.metric("ordering/relu_" + metric + "_high_gt_low",
                fraction_greater("relu_high", "relu_low", metric));
    sink.metric("ordering/gaussian_" + metric + "_low_gt_high",
                fraction_greater("gaussian_low", "gaussian_high", metric));
  }
}

// ---------------------------------------------------------------------------
// Appendix: random-label pretraining bandwidth (Fig. 5-6 data)

void run_appx_randlabel(const RunConfig& config, Sink& sink, bool emit_svg) {
  Dataset probe_inputs;  // where the gradient histograms are evaluated

  for (const std::string& kind_name : config.appendix.label_kinds) {
    RandomLabelKind kind = kind_name == "mse_noise" ? RandomLabelKind::kMseNoise
                           : kind_name == "binary"  ? RandomLabelKind::kBinary
                                                    : RandomLabelKind::kMulticlass;
    int out_dim = (kind == RandomLabelKind::kMulticlass) ? config.appendix.n_bins : 1;
    Architecture arch = arch_with(config.arch, config.arch.activation, -1, out_dim);

    InitScheme scheme = config.init;  // carries the pretraining budget/domain
    scheme.kind = InitKind::kPretrained;
    scheme.pretrain.target.kind = PretrainTargetKind::kRandomLabels;
    scheme.pretrain.target.label_kind = kind;
    scheme.pretrain.target.n_points = config.appendix.n_points;
    scheme.pretrain.target.n_bins = config.appendix.n_bins;

    PretrainResult pr = pretrain_init(arch, scheme, config.seed, &sink.report->warnings);
    sink.metric(kind_name + "/pretrain_loss", pr.final_loss);
    sink.metric(kind_name + "/pretrain_epochs", static_cast<double>(pr.epochs_used));

    InitScheme xavier;
    NetworkParams baseline = initialize(arch, xavier, config.seed, &sink.report->warnings);

    probe_inputs = pr.dataset;

    auto analyze = [&](const std::string& label, const NetworkParams& p) {
      Spectrum spec = dft(mean_output_samples(p, config.spectrum.grid), config.spectrum.grid);
      save_spectrum_csv(sink.file("spectrum_" + label + ".csv"), spec);
      sink.record("spectrum_" + label + ".csv");
      sink.metric(label + "/bandwidth",
                  bandwidth_energy(spec, config.spectrum.cutoff).fraction);
      GradientHistogram h =
          input_gradient_histogram(p, probe_inputs, config.appendix.histogram_bins);
      std::vector<std::vector<double>> rows;
      for (size_t b = 0; b < h.counts.size(); ++b)
        rows.push_back({h.edges[b], h.edges[b + 1], static_cast<double>(h.counts[b])});
      write_csv(sink.file("gradient_hist_" + label + ".csv"), {"lo", "hi", "count"}, rows);
      sink.record("gradient_hist_" + label + ".csv");
      sink.metric(label + "/gradient_range", h.range);
    };
    analyze(kind_name, pr.params);
    analyze("xavier_" + kind_name, baseline);
    (void)emit_svg;
  }
}

// ---------------------------------------------------------------------------
// Appendix: convergence-decay rate and generalization (Fig. 7-8 data)

void run_appx_decay(const RunConfig& config, Sink& sink, bool emit_svg) {
  Dataset data = sample_dataset(config.signal, config.sampling, config.seed);
  save_dataset_csv(sink.file("train_points.csv"), data);
  sink.record("train_points.csv");

  InitScheme dc = config.init;  // preset fills this with the DC pretraining setup
  InitScheme normal;
  normal.kind = InitKind::kNormal;
  normal.sigma = 0.03;

  struct Variant {
    std::string name;
    InitScheme scheme;
  };
  std::vector<Variant> variants{{"dc_pretrained", dc}, {"normal003", normal}};

  for (const Variant& v : variants) {
    NetworkParams params0 =
        initialize(config.arch, v.scheme, config.seed, &sink.report->warnings);
    Spectrum init_spec = network_spectrum(params0, config.spectrum.grid);
    save_spectrum_csv(sink.file("spectrum_init_" + v.name + ".csv"), init_spec);
    sink.record("spectrum_init_" + v.name + ".csv");
    sink.metric(v.name + "/init_bandwidth",
                bandwidth_energy(init_spec, config.spectrum.cutoff).fraction);

    TrainConfig tc = config.train;
    tc.seed = config.seed;
    tc.lr = resolve_lr(config, params0, data, tc.loss);
    TrainResult res = train(params0, data, tc);
    save_fit_csv(sink, "fit_" + v.name + ".csv", res.params, config.signal, config.test);
    sink.metric(v.name + "/train_loss", res.trace.final_loss);
    sink.metric(v.name + "/reached_tol", res.trace.reached_tol ? 1.0 : 0.0);
    sink.metric(v.name + "/test_mse", dense_test_mse(res.params, config.signal, config.test));

    if (config.appendix.emit_heatmaps) {
      // Convergence heatmap on the multi-tone target, from the same init.
      RunConfig sub = preset_config("exp2_spectral_bias", config.seed);
      Dataset dense = sample_dataset(sub.signal, sub.sampling, config.seed);
      Spectrum target = signal_spectrum(sub.signal, sub.spectrum.grid);
      NetworkParams h0 = initialize(config.arch, v.scheme, config.seed,
                                    &sink.report->warnings);
      TrainConfig htc = sub.train;
      htc.seed = config.seed;
      htc.max_epochs = config.appendix.heatmap_max_epochs;
      htc.lr = suggest_learning_rate(h0, dense, htc.loss,
                                     sub.lr_auto_safety > 0 ? sub.lr_auto_safety : 0.4,
                                     config.seed);
      SpectrumTracker tracker(target, sub.spectrum.grid, sub.spectrum.tracked);
      train(h0, dense, htc, [&](long epoch, double loss, const NetworkParams& p) {
        (void)loss;
        return tracker.observe(epoch, p);
      });
      ConvergenceHeatmap heatmap = tracker.heatmap();
      save_heatmap_csv(sink.file("heatmap_" + v.name + ".csv"), heatmap);
      sink.record("heatmap_" + v.name + ".csv");
      if (emit_svg) {
        svg_heatmap(sink.file("heatmap_" + v.name + ".svg"), heatmap,
                    v.name + " frequency convergence");
        sink.record("heatmap_" + v.name + ".svg");
      }
    }
  }
  double mse_dc = sink.report->metrics.at("dc_pretrained/test_mse");
  double mse_normal = sink.report->metrics.at("normal003/test_mse");
  if (mse_normal > 0.0) sink.metric("test_mse_ratio", mse_dc / mse_normal);
}

// ---------------------------------------------------------------------------
// Theorem 5.1 numeric verification

void run_flow_verify(const RunConfig& config, Sink& sink, bool emit_svg) {
  (void)emit_svg;
  Dataset data = sample_dataset(config.signal, config.sampling, config.seed);

  for (const std::string& act_name : config.flow.activations) {
    ActivationKind act = activation_from_name(act_name, config.arch.activation.gaussian_width,
                                              config.arch.activation.omega0);
    Architecture arch;
    arch.input_dim = 1;
    arch.output_dim = 1;
    arch.hidden_widths.assign(static_cast<size_t>(config.flow.depth), config.flow.width);
    arch.activation = act;
    InitScheme xavier;
    NetworkParams params = initialize(arch, xavier, config.seed, &sink.report->warnings);

    std::vector<double> xi = bin_angular_frequencies(config.flow.quad, config.flow.k_max);
    FourierVelocity fv = fourier_velocity(params, data, config.train.loss, xi, config.flow.quad);
    save_velocity_csv(sink.file("velocity_" + act_name + ".csv"), fv);
    sink.record("velocity_" + act_name + ".csv");

    DecayProfile dp = decay_profile(fv);
    sink.metric(act_name + "/decay_low", dp.low_mean);
    sink.metric(act_name + "/decay_mid", dp.mid_mean);
    sink.metric(act_name + "/decay_high", dp.high_mean);
    sink.metric(act_name + "/decay_ratio", dp.ratio_high_low);

    json consistency = json::array();
    for (double lr : config.flow.lr_sweep) {
      FlowConsistencyReport r =
          flow_consistency_check(params, data, config.train.loss, lr, config.flow.quad);
      std::ostringstream key;
      key << act_name << "/rel_error_low_band/lr" << lr;
      sink.metric(key.str(), r.rel_error_low_band);
      std::ostringstream key2;
      key2 << act_name << "/rel_error_overall/lr" << lr;
      sink.metric(key2.str(), r.rel_error_overall);
      consistency.push_back({{"lr", r.lr},
                             {"rel_error_low_band", r.rel_error_low_band},
                             {"rel_error_overall", r.rel_error_overall},
                             {"decay_ratio", dp.ratio_high_low}});
    }
    write_text_file(sink.file("consistency_" + act_name + ".json"),
                    consistency.dump(2) + "\n");
    sink.record("consistency_" + act_name + ".json");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Presets

namespace {

SignalSpec exp1_signal() {
  SignalSpec s;
  s.terms = {{3.0, 0.2, 0.0}, {5.0, 0.1, 0.0}};  // 3 sin(0.4 pi x) + 5 sin(0.2 pi x)
  return s;
}

SamplingSpec eight_step_points() {
  SamplingSpec s;
  s.a = -4.0;
  s.b = 4.0;
  s.mode = SamplingSpec::Mode::kStep;
  s.step = 1.0;
  s.offset = 0.5;  // half-integer samples: sin(pi x) = +-1, never 0
  return s;
}

RunConfig base_config(const std::string& preset, std::uint64_t seed) {
  RunConfig c;
  c.preset = preset;
  c.seed = seed;
  c.signal = exp1_signal();
  c.sampling = eight_step_points();
  c.arch.input_dim = 1;
  c.arch.output_dim = 1;
  c.arch.hidden_widths = {128, 128, 128};
  c.arch.activation = ActivationKind::relu();
  c.train.loss = LossKind::kMSE;
  c.train.stop_tol = 1e-3;
  c.train.max_epochs = 60000;
  c.train.telemetry_every = 1000;
  c.lr_auto_safety = 0.4;
  c.spectrum.grid = {-4.0, 4.0, 1024};
  c.spectrum.cutoff = 0.5;
  c.test = {-3.5, 3.5, 512};
  c.flow.quad = {-4.0, 4.0, 1024};
  return c;
}

InitScheme pretrained_sinusoid(double k, double a, double b, double tol, long max_epochs,
                               int grid_points = 512) {
  InitScheme s;
  s.kind = InitKind::kPretrained;
  s.pretrain.target.kind = PretrainTargetKind::kSinusoid;
  s.pretrain.target.frequency = k;
  s.pretrain.target.amplitude = 1.0;
  s.pretrain.domain_a = a;
  s.pretrain.domain_b = b;
  s.pretrain.grid_points = grid_points;
  s.pretrain.budget.loss_tol = tol;
  s.pretrain.budget.max_epochs = max_epochs;
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "exp1_depth_sweep", "exp2_spectral_bias", "exp3a",           "exp3b",
      "exp3c",            "exp3d",              "exp5_flat_minima", "appx_randlabel_init",
      "appx_decay_rate",  "flow_verify"};
  return names;
}

RunConfig preset_config(const std::string& id, std::uint64_t seed) {
  if (id == "exp1_depth_sweep") {
    RunConfig c = base_config(id, seed);
    c.arch.hidden_widths = {256};  // width per depth; depths come from exp1.depths
    c.train.lr = 1e-4;
    c.lr_auto_safety = 0.0;  // the stated step size
    c.train.max_epochs = 20000;
    return c;
  }
  if (id == "exp2_spectral_bias") {
    RunConfig c = base_config(id, seed);
    c.signal.terms.clear();
    for (int n = 1; n <= 6; ++n) c.signal.terms.push_back({1.0, 5.0 * n, 0.0});
    c.sampling = SamplingSpec{};
    c.sampling.a = 0.0;
    c.sampling.b = 1.0;
    c.sampling.mode = SamplingSpec::Mode::kCount;
    c.sampling.count = 128;
    c.spectrum.grid = {0.0, 1.0, 256};
    c.spectrum.tracked = {5, 10, 15, 20, 25, 30};
    c.spectrum.convergence_threshold = 0.1;
    c.test = {0.0, 1.0, 512};
    c.train.stop_tol = 1e-4;
    c.train.max_epochs = 60000;
    c.train.telemetry_every = 250;
    ExperimentCell relu_xavier{"relu_xavier", ActivationKind::relu(), {}};
    ExperimentCell gauss_xavier{"gaussian_xavier", ActivationKind::gaussian(0.1), {}};
    ExperimentCell gauss_normal{"gaussian_normal003", ActivationKind::gaussian(0.1), {}};
    gauss_normal.init.kind = InitKind::kNormal;
    gauss_normal.init.sigma = 0.03;
    ExperimentCell sin_sitzmann{"sinusoid_sitzmann", ActivationKind::sinusoid(30.0), {}};
    sin_sitzmann.init.kind = InitKind::kSitzmann;
    c.exp2.cells = {relu_xavier, gauss_xavier, gauss_normal, sin_sitzmann};
    return c;
  }
  if (id == "exp3a" || id == "exp3b" || id == "exp3c" || id == "exp3d") {
    RunConfig c = base_config(id, seed);
    c.signal = SignalSpec{};
    c.signal.terms = {{1.0, 0.5, 0.0}};  // sin(pi x)
    if (id == "exp3a") {
      c.arch.activation = ActivationKind::relu();
    } else if (id == "exp3b") {
      c.arch.activation = ActivationKind::relu();
      c.init = pretrained_sinusoid(5.0, -4.0, 4.0, 0.03, 60000, 256);
    } else if (id == "exp3c") {
      c.arch.activation = ActivationKind::gaussian(0.1);
    } else {
      c.arch.activation = ActivationKind::gaussian(0.1);
      c.init.kind = InitKind::kNormal;
      c.init.sigma = 0.03;
    }
    return c;
  }
  if (id == "exp5_flat_minima") {
    RunConfig c = base_config(id, seed);
    c.signal = SignalSpec{};  // per-signal two-tone draws
    c.sampling = SamplingSpec{};
    c.sampling.a = 0.0;
    c.sampling.b = 10.0;
    c.sampling.mode = SamplingSpec::Mode::kCount;
    c.sampling.count = 8;
    c.spectrum.grid = {0.0, 10.0, 1024};
    c.test = {0.0, 10.0, 512};
    c.train.max_epochs = 100000;
    c.train.stop_tol = 1e-3;
    ExperimentCell relu_high{"relu_high", ActivationKind::relu(),
                             pretrained_sinusoid(3.0, 0.0, 10.0, 0.03, 80000, 512)};
    ExperimentCell relu_low{"relu_low", ActivationKind::relu(), {}};
    ExperimentCell gauss_high{"gaussian_high", ActivationKind::gaussian(0.1), {}};
    ExperimentCell gauss_low{"gaussian_low", ActivationKind::gaussian(0.1), {}};
    gauss_low.init.kind = InitKind::kNormal;
    gauss_low.init.sigma = 0.03;
    c.exp5.cells = {relu_high, relu_low, gauss_high, gauss_low};
    c.exp5.n_signals = 20;
    return c;
  }
  if (id == "appx_randlabel_init") {
    RunConfig c = base_config(id, seed);
    c.arch.hidden_widths = {64, 64, 64, 64};
    c.init.pretrain.domain_a = -4.0;
    c.init.pretrain.domain_b = 4.0;
    c.init.pretrain.budget.loss_tol = 0.05;
    c.init.pretrain.budget.max_epochs = 40000;
    return c;
  }
  if (id == "appx_decay_rate") {
    RunConfig c = base_config(id, seed);
    c.arch.activation = ActivationKind::gaussian(0.1);
    c.init.kind = InitKind::kPretrained;
    c.init.pretrain.target.kind = PretrainTargetKind::kDC;
    c.init.pretrain.target.level = 1.0;
    c.init.pretrain.domain_a = -4.0;
    c.init.pretrain.domain_b = 4.0;
    c.init.pretrain.grid_points = 512;
    c.init.pretrain.budget.loss_tol = 1e-4;
    c.init.pretrain.budget.max_epochs = 20000;
    return c;
  }
  if (id == "flow_verify") {
    RunConfig c = base_config(id, seed);
    c.flow.k_max = 40.0;
    c.flow.lr = 1e-4;
    c.flow.width = 64;
    c.flow.depth = 2;
    return c;
  }
  throw ConfigError("unknown preset: " + id);
}

// ---------------------------------------------------------------------------
// Runner and report plumbing

RunReport run_experiment(const RunConfig& config, const fs::path& out_dir, bool emit_svg) {
  auto start = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);

  RunReport report;
  report.preset = config.preset;
  report.seed = config.seed;
  report.resolved_config = to_json(config);

  Sink sink{out_dir, &report};
  try {
    if (config.preset == "exp1_depth_sweep")
      run_exp1(config, sink, emit_svg);
    else if (config.preset == "exp2_spectral_bias")
      run_exp2(config, sink, emit_svg);
    else if (config.preset == "exp3a" || config.preset == "exp3b" ||
             config.preset == "exp3c" || config.preset == "exp3d")
      run_exp3(config, sink, emit_svg);
    else if (config.preset == "exp5_flat_minima")
      run_exp5(config, sink, emit_svg);
    else if (config.preset == "appx_randlabel_init")
      run_appx_randlabel(config, sink, emit_svg);
    else if (config.preset == "appx_decay_rate")
      run_appx_decay(config, sink, emit_svg);
    else if (config.preset == "flow_verify")
      run_flow_verify(config, sink, emit_svg);
    else
      throw ConfigError("unknown preset: " + config.preset);
  } catch (const std::exception& e) {
    report.failed = true;
    report.failure_stage = e.what();
    write_text_file(out_dir / "FAILED", std::string(e.what()) + "\n");
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report(report, out_dir);
  return report;
}

json report_to_json(const RunReport& report) {
  json j;
  j["format"] = "speclab-report-v1";
  j["preset"] = report.preset;
  j["seed"] = report.seed;
  j["config"] = report.resolved_config;
  j["metrics"] = report.metrics;
  json arts = json::array();
  for (const auto& a : report.artifacts) arts.push_back({{"path", a.path}, {"checksum", a.checksum}});
  j["artifacts"] = arts;
  j["warnings"] = report.warnings;
  j["wall_seconds"] = report.wall_seconds;
  j["failed"] = report.failed;
  j["failure_stage"] = report.failure_stage;
  return j;
}

RunReport report_from_json(const json& j) {
  if (j.value("format", "") != "speclab-report-v1")
    throw ConfigError("not a speclab report");
  RunReport r;
  r.preset = j.at("preset").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.resolved_config = j.at("config");
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  for (const json& a : j.at("artifacts"))
    r.artifacts.push_back({a.at("path").get<std::string>(), a.at("checksum").get<std::string>()});
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.failed = j.at("failed").get<bool>();
  r.failure_stage = j.at("failure_stage").get<std::string>();
  return r;
}

void emit_report(const RunReport& report, const fs::path& out_dir) {
  write_text_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
}

double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  auto ranks = [](const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // NaN ("never") sorts after every finite value.
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
      bool ni = std::isnan(v[i]), nj = std::isnan(v[j]);
      if (ni != nj) return nj;
      if (ni && nj) return false;
      return v[i] < v[j];
    });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      auto same = [&](size_t x, size_t y) {
        return (std::isnan(v[x]) && std::isnan(v[y])) || v[x] == v[y];
      };
      while (j + 1 < n && same(order[j + 1], order[i])) ++j;
      double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= ra.size();
  mb /= rb.size();
  double cov = 0, va = 0, vb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return cov / std::sqrt(va * vb);
}

}  // namespace speclab
