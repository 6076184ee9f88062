#include "speclab/speclab.h"

#include <cstring>
#include <string>

#include "core/config.hpp"
#include "core/experiments.hpp"
#include "core/flatness.hpp"
#include "core/io.hpp"
#include "core/spectrum.hpp"

using namespace speclab;

struct speclab_report {
  RunReport report;
  std::string json_cache;
  std::vector<std::string> metric_names;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_string_buffer;

speclab_status fail(speclab_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

speclab_status classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return SPECLAB_ERROR_CONFIG;
  return SPECLAB_ERROR_RUN;
}

speclab_report* wrap_report(RunReport&& report) {
  auto* handle = new speclab_report{std::move(report), {}, {}};
  handle->json_cache = report_to_json(handle->report).dump(2);
  for (const auto& [k, v] : handle->report.metrics) {
    (void)v;
    handle->metric_names.push_back(k);
  }
  return handle;
}

speclab_status run_json_config(const nlohmann::json& base, const char* out_dir,
                               const char* const* overrides, int n_overrides, int emit_svg,
                               speclab_report** report_out) {
  std::vector<std::string> ovs;
  for (int i = 0; i < n_overrides; ++i) {
    if (!overrides || !overrides[i]) return fail(SPECLAB_ERROR_ARGS, "null override");
    ovs.emplace_back(overrides[i]);
  }
  RunConfig config = config_from_json(apply_overrides(base, ovs));
  RunReport report = run_experiment(config, out_dir, emit_svg != 0);
  bool failed = report.failed;
  std::string stage = report.failure_stage;
  if (report_out) *report_out = wrap_report(std::move(report));
  if (failed) return fail(SPECLAB_ERROR_RUN, "preset failed: " + stage);
  return SPECLAB_OK;
}

}  // namespace

extern "C" {

const char* speclab_version(void) { return "1.0.0"; }

const char* speclab_last_error(void) { return g_last_error.c_str(); }

int speclab_preset_count(void) { return static_cast<int>(preset_names().size()); }

const char* speclab_preset_name(int index) {
  const auto& names = preset_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[static_cast<size_t>(index)].c_str();
}

const char* speclab_preset_config_json(const char* preset, uint64_t seed) {
  if (!preset) {
    g_last_error = "null preset";
    return nullptr;
  }
  try {
    g_string_buffer = to_json(preset_config(preset, seed)).dump(2);
    return g_string_buffer.c_str();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

speclab_status speclab_run_preset(const char* preset, uint64_t seed, const char* out_dir,
                                  const char* const* overrides, int n_overrides, int emit_svg,
                                  speclab_report** report_out) {
  if (report_out) *report_out = nullptr;
  if (!preset || !out_dir) return fail(SPECLAB_ERROR_ARGS, "null preset or output directory");
  try {
    nlohmann::json base = to_json(preset_config(preset, seed));
    return run_json_config(base, out_dir, overrides, n_overrides, emit_svg, report_out);
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

speclab_status speclab_run_config_file(const char* config_path, const char* out_dir,
                                       const char* const* overrides, int n_overrides,
                                       int emit_svg, speclab_report** report_out) {
  if (report_out) *report_out = nullptr;
  if (!config_path || !out_dir) return fail(SPECLAB_ERROR_ARGS, "null config path or out_dir");
  try {
    RunConfig config = parse_config_text(read_text_file(config_path));
    return run_json_config(to_json(config), out_dir, overrides, n_overrides, emit_svg,
                           report_out);
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

const char* speclab_report_json(const speclab_report* report) {
  return report ? report->json_cache.c_str() : nullptr;
}

int speclab_report_failed(const speclab_report* report) {
  return report && report->report.failed ? 1 : 0;
}

const char* speclab_report_failure_stage(const speclab_report* report) {
  return report ? report->report.failure_stage.c_str() : nullptr;
}

double speclab_report_metric(const speclab_report* report, const char* key, int* found_out) {
  if (found_out) *found_out = 0;
  if (!report || !key) return 0.0;
  auto it = report->report.metrics.find(key);
  if (it == report->report.metrics.end()) return 0.0;
  if (found_out) *found_out = 1;
  return it->second;
}

int speclab_report_metric_count(const speclab_report* report) {
  return report ? static_cast<int>(report->metric_names.size()) : 0;
}

const char* speclab_report_metric_name(const speclab_report* report, int index) {
  if (!report || index < 0 || index >= static_cast<int>(report->metric_names.size()))
    return nullptr;
  return report->metric_names[static_cast<size_t>(index)].c_str();
}

void speclab_report_free(speclab_report* report) { delete report; }

speclab_status speclab_spectrum_to_csv(const char* params_json_path, double domain_min,
                                       double domain_max, int n_points, const char* out_csv,
                                       const char* out_svg) {
  if (!params_json_path || !out_csv) return fail(SPECLAB_ERROR_ARGS, "null path");
  try {
    NetworkParams params = load_params(params_json_path);
    GridSpec grid{domain_min, domain_max, n_points};
    Spectrum spec = network_spectrum(params, grid);
    save_spectrum_csv(out_csv, spec);
    if (out_svg) {
      std::vector<std::pair<std::string, std::vector<double>>> series;
      series.emplace_back("power", std::vector<double>(spec.power.data(),
                                                       spec.power.data() + spec.power.size()));
      svg_line_plot(out_svg, spec.freqs, series, "network power spectrum", true);
    }
    return SPECLAB_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

speclab_status speclab_flatness_to_json(const char* params_json_path,
                                        const char* dataset_csv_path, const char* loss,
                                        int n_probes, int power_iters, double power_tol,
                                        int top_k, uint64_t seed, const char* out_json) {
  if (!params_json_path || !dataset_csv_path || !loss || !out_json)
    return fail(SPECLAB_ERROR_ARGS, "null path or loss");
  try {
    NetworkParams params = load_params(params_json_path);
    Dataset data = load_dataset_csv(dataset_csv_path);
    FlatnessConfig config;
    config.n_probes = n_probes;
    config.power_max_iters = power_iters;
    config.power_tol = power_tol;
    config.top_k = top_k;
    config.seed = seed;
    FlatnessReport report = flatness_report(params, data, loss_from_name(loss), config);
    nlohmann::json j;
    j["trace_estimate"] = report.trace_estimate;
    j["trace_std_error"] = report.trace_std_error;
    j["expected_eigenvalue"] = report.expected_eigenvalue;
    j["spectral_norm"] = report.spectral_norm;
    j["top_eigenvalues"] = report.top_eigenvalues;
    j["param_count"] = report.param_count;
    j["dataset_size"] = report.dataset_size;
    j["n_probes"] = report.n_probes;
    j["n_power_iters"] = report.n_power_iters;
    j["spectral_converged"] = report.spectral_converged;
    j["loss_at_params"] = report.loss_at_params;
    j["not_at_minimum_warning"] = report.not_at_minimum_warning;
    j["config"] = {{"loss", loss},           {"n_probes", n_probes},
                   {"power_iters", power_iters}, {"power_tol", power_tol},
                   {"top_k", top_k},         {"seed", seed}};
    write_text_file(out_json, j.dump(2) + "\n");
    return SPECLAB_OK;
  } catch (const std::exception& e) {
    return fail(classify(e), e.what());
  }
}

}  // extern "C"
