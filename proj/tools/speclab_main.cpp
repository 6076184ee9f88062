// speclab command-line front end. Links the C API only; all computation lives
// behind the shared library.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "speclab/speclab.h"

namespace {

std::vector<const char*> to_argv(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

int finish_run(speclab_status status, speclab_report* report) {
  if (report) {
    int count = speclab_report_metric_count(report);
    std::printf("metrics: %d\n", count);
    for (int i = 0; i < count && i < 40; ++i) {
      const char* name = speclab_report_metric_name(report, i);
      int found = 0;
      double value = speclab_report_metric(report, name, &found);
      if (found) std::printf("  %-52s %.8g\n", name, value);
    }
    if (count > 40) std::printf("  ... (%d more in report.json)\n", count - 40);
    if (speclab_report_failed(report))
      std::fprintf(stderr, "run failed: %s\n", speclab_report_failure_stage(report));
    speclab_report_free(report);
  }
  if (status != SPECLAB_OK) {
    std::fprintf(stderr, "error: %s\n", speclab_last_error());
    return status == SPECLAB_ERROR_CONFIG || status == SPECLAB_ERROR_ARGS ? 3 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speclab: spectral bias and flat-minima laboratory"};
  app.set_version_flag("--version", speclab_version());
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  std::string preset, out_dir = "out", config_file;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  bool svg = false;

  auto* run = app.add_subcommand("run", "run an experiment preset or config file");
  run->add_option("preset", preset, "preset name, or omit with --config")
      ->check([](const std::string& name) -> std::string {
        for (int i = 0; i < speclab_preset_count(); ++i)
          if (name == speclab_preset_name(i)) return {};
        return "unknown preset '" + name + "' (see `speclab presets`)";
      });
  run->add_option("--config", config_file, "config file (JSON or key = value lines)");
  run->add_option("--seed", seed, "run seed")->capture_default_str();
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--set", overrides, "dotted config override key=value")->take_all();
  run->add_flag("--svg", svg, "emit SVG plots alongside CSV artifacts");

  // presets ------------------------------------------------------------
  auto* presets = app.add_subcommand("presets", "list available presets");

  // show-config ----------------------------------------------------------
  std::string show_preset;
  auto* show = app.add_subcommand("show-config", "print a preset's resolved config JSON");
  show->add_option("preset", show_preset)->required();
  show->add_option("--seed", seed, "run seed");

  // spectrum -------------------------------------------------------------
  std::string params_file, out_csv = "spectrum.csv", out_svg;
  double dom_a = -4.0, dom_b = 4.0;
  int grid_n = 1024;
  auto* spectrum = app.add_subcommand("spectrum", "Fourier spectrum of stored parameters");
  spectrum->add_option("params", params_file, "params sidecar JSON")->required();
  spectrum->add_option("--domain-min", dom_a)->capture_default_str();
  spectrum->add_option("--domain-max", dom_b)->capture_default_str();
  spectrum->add_option("--n", grid_n, "grid points")->capture_default_str();
  spectrum->add_option("--out", out_csv, "output CSV")->capture_default_str();
  spectrum->add_option("--svg", out_svg, "also render an SVG power plot");

  // flatness ---------------------------------------------------------------
  std::string dataset_file, loss = "mse", flat_out = "flatness.json";
  int probes = 1024, power_iters = 1000, top_k = 2;
  double power_tol = 1e-6;
  auto* flatness = app.add_subcommand("flatness", "Hessian flatness report at stored parameters");
  flatness->add_option("params", params_file, "params sidecar JSON")->required();
  flatness->add_option("dataset", dataset_file, "dataset CSV")->required();
  flatness->add_option("--loss", loss, "mse|bce|crossentropy")->capture_default_str();
  flatness->add_option("--probes", probes, "Hutchinson probes")->capture_default_str();
  flatness->add_option("--power-iters", power_iters)->capture_default_str();
  flatness->add_option("--power-tol", power_tol)->capture_default_str();
  flatness->add_option("--top-k", top_k, "eigenpairs to extract")->capture_default_str();
  flatness->add_option("--seed", seed)->capture_default_str();
  flatness->add_option("--out", flat_out, "output JSON")->capture_default_str();

  // flow-verify ---------------------------------------------------------
  auto* flow = app.add_subcommand("flow-verify",
                                  "tangent-kernel evolution checks (decay + one-step consistency)");
  flow->add_option("--seed", seed, "run seed")->capture_default_str();
  flow->add_option("--out", out_dir, "output directory")->capture_default_str();
  flow->add_option("--set", overrides, "dotted config override key=value")->take_all();

  CLI11_PARSE(app, argc, argv);

  if (presets->parsed()) {
    for (int i = 0; i < speclab_preset_count(); ++i)
      std::printf("%s\n", speclab_preset_name(i));
    return 0;
  }
  if (show->parsed()) {
    const char* json = speclab_preset_config_json(show_preset.c_str(), seed);
    if (!json) {
      std::fprintf(stderr, "error: %s\n", speclab_last_error());
      return 3;
    }
    std::printf("%s\n", json);
    return 0;
  }
  if (run->parsed()) {
    if (preset.empty() && config_file.empty()) {
      std::fprintf(stderr, "error: give a preset name or --config FILE\n");
      return 3;
    }
    auto ov = to_argv(overrides);
    speclab_report* report = nullptr;
    speclab_status status;
    if (!config_file.empty())
      status = speclab_run_config_file(config_file.c_str(), out_dir.c_str(), ov.data(),
                                       static_cast<int>(ov.size()), svg ? 1 : 0, &report);
    else
      status = speclab_run_preset(preset.c_str(), seed, out_dir.c_str(), ov.data(),
                                  static_cast<int>(ov.size()), svg ? 1 : 0, &report);
    return finish_run(status, report);
  }
  if (spectrum->parsed()) {
    speclab_status status =
        speclab_spectrum_to_csv(params_file.c_str(), dom_a, dom_b, grid_n, out_csv.c_str(),
                                out_svg.empty() ? nullptr : out_svg.c_str());
    if (status != SPECLAB_OK) {
      std::fprintf(stderr, "error: %s\n", speclab_last_error());
      return status == SPECLAB_ERROR_CONFIG || status == SPECLAB_ERROR_ARGS ? 3 : 2;
    }
    std::printf("wrote %s\n", out_csv.c_str());
    return 0;
  }
  if (flatness->parsed()) {
    speclab_status status = speclab_flatness_to_json(
        params_file.c_str(), dataset_file.c_str(), loss.c_str(), probes, power_iters, power_tol,
        top_k, seed, flat_out.c_str());
    if (status != SPECLAB_OK) {
      std::fprintf(stderr, "error: %s\n", speclab_last_error());
      return status == SPECLAB_ERROR_CONFIG || status == SPECLAB_ERROR_ARGS ? 3 : 2;
    }
    std::printf("wrote %s\n", flat_out.c_str());
    return 0;
  }
  if (flow->parsed()) {
    auto ov = to_argv(overrides);
    speclab_report* report = nullptr;
    speclab_status status = speclab_run_preset("flow_verify", seed, out_dir.c_str(), ov.data(),
                                               static_cast<int>(ov.size()), 0, &report);
    return finish_run(status, report);
  }
  return 0;
}
