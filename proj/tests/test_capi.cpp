// Drives the shared library through the C header only, the way a foreign
// client (or the CLI) would.
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "speclab/speclab.h"

namespace fs = std::filesystem;

static int failures = 0;

#define EXPECT(cond)                                                    \
  do {                                                                  \
    if (!(cond)) {                                                      \
      std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond);       \
      ++failures;                                                       \
    }                                                                   \
  } while (0)

int main() {
  fs::path dir = fs::temp_directory_path() / "speclab_capi_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  EXPECT(std::strlen(speclab_version()) > 0);

  // Preset catalog
  EXPECT(speclab_preset_count() == 10);
  bool found_flow = false;
  for (int i = 0; i < speclab_preset_count(); ++i)
    if (std::string(speclab_preset_name(i)) == "flow_verify") found_flow = true;
  EXPECT(found_flow);
  EXPECT(speclab_preset_name(99) == nullptr);

  const char* config_json = speclab_preset_config_json("exp3a", 7);
  EXPECT(config_json != nullptr);
  EXPECT(std::string(config_json).find("\"preset\": \"exp3a\"") != std::string::npos);
  EXPECT(speclab_preset_config_json("bogus", 0) == nullptr);
  EXPECT(std::strlen(speclab_last_error()) > 0);

  // Unknown preset -> config error, no report
  speclab_report* report = nullptr;
  EXPECT(speclab_run_preset("bogus", 0, (dir / "x").c_str(), nullptr, 0, 0, &report) ==
         SPECLAB_ERROR_CONFIG);
  EXPECT(report == nullptr);

  // A small real run through the C surface
  const char* overrides[] = {
      "arch.hidden_widths=[12,12]",
      "train.max_epochs=300",
      "spectrum.grid={\"domain\":[-4.0,4.0],\"n\":256}",
  };
  speclab_status st = speclab_run_preset("exp3a", 0, (dir / "run").c_str(), overrides, 3, 0,
                                         &report);
  EXPECT(st == SPECLAB_OK);
  EXPECT(report != nullptr);
  EXPECT(speclab_report_failed(report) == 0);
  int found = 0;
  double bw = speclab_report_metric(report, "final_bandwidth", &found);
  EXPECT(found == 1);
  EXPECT(bw >= 0.0 && bw <= 1.0);
  EXPECT(speclab_report_metric_count(report) > 0);
  EXPECT(speclab_report_metric_name(report, 0) != nullptr);
  EXPECT(speclab_report_json(report) != nullptr);
  speclab_report_free(report);
  EXPECT(fs::exists(dir / "run" / "report.json"));

  // Config-file entry point (key = value text form)
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "preset = exp3a\n"
        << "seed = 1\n"
        << "arch.hidden_widths = [8,8]\n"
        << "train.max_epochs = 100\n";
  }
  report = nullptr;
  st = speclab_run_config_file((dir / "run.cfg").c_str(), (dir / "run2").c_str(), nullptr, 0, 0,
                               &report);
  EXPECT(st == SPECLAB_OK);
  speclab_report_free(report);

  // Spectrum + flatness over the params/dataset files the run just emitted.
  fs::path params = dir / "run" / "params_final.json";
  fs::path dataset = dir / "run" / "train_points.csv";
  EXPECT(fs::exists(params));
  EXPECT(fs::exists(dataset));
  st = speclab_spectrum_to_csv(params.c_str(), -4.0, 4.0, 256, (dir / "s.csv").c_str(),
                               (dir / "s.svg").c_str());
  EXPECT(st == SPECLAB_OK);
  EXPECT(fs::exists(dir / "s.csv"));
  EXPECT(fs::exists(dir / "s.svg"));

  st = speclab_flatness_to_json(params.c_str(), dataset.c_str(), "mse", 64, 100, 1e-6, 2, 0,
                                (dir / "flat.json").c_str());
  EXPECT(st == SPECLAB_OK);
  EXPECT(fs::exists(dir / "flat.json"));

  EXPECT(speclab_spectrum_to_csv("missing.json", -4, 4, 256, (dir / "s2.csv").c_str(),
                                 nullptr) != SPECLAB_OK);
  EXPECT(std::strlen(speclab_last_error()) > 0);

  if (failures == 0) std::printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
