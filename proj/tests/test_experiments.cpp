#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "core/experiments.hpp"
#include "core/io.hpp"

using namespace speclab;
namespace fsys = std::filesystem;

namespace {

fsys::path fresh_dir(const std::string& name) {
  auto dir = fsys::temp_directory_path() / "speclab_exp_test" / name;
  fsys::remove_all(dir);
  fsys::create_directories(dir);
  return dir;
}

// Small override set that makes any preset cheap enough for a unit test.
std::vector<std::string> shrink_overrides() {
  return {
      "arch.hidden_widths=[16,16]",
      "train.max_epochs=200",
      "train.telemetry_every=50",
      "exp1.depths=[2,3]",
      "exp1.activations=[\"relu\"]",
      "exp5.n_signals=2",
      "flatness.n_probes=16",
      "flatness.power_max_iters=50",
      "appendix.emit_heatmaps=false",
      "appendix.n_points=16",
      "flow.quad={\"domain\":[-4.0,4.0],\"n\":256}",
      "spectrum.grid={\"domain\":[-4.0,4.0],\"n\":256}",
  };
}

RunReport run_small(const std::string& preset, const fsys::path& dir,
                    std::vector<std::string> extra = {}) {
  RunConfig base = preset_config(preset, 0);
  auto ov = shrink_overrides();
  for (auto& e : extra) ov.push_back(std::move(e));
  RunConfig c = config_from_json(apply_overrides(to_json(base), ov));
  return run_experiment(c, dir, false);
}

}  // namespace

TEST_CASE("spearman handles exact order, reversal, and never-ties") {
  std::vector<double> k{5, 10, 15, 20, 25, 30};
  std::vector<double> inc{1, 2, 3, 4, 5, 6};
  std::vector<double> dec{6, 5, 4, 3, 2, 1};
  CHECK(spearman_rank_correlation(k, inc) == doctest::Approx(1.0));
  CHECK(spearman_rank_correlation(k, dec) == doctest::Approx(-1.0));

  double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> two_conv{100, 200, nan, nan, nan, nan};
  CHECK(spearman_rank_correlation(k, two_conv) == doctest::Approx(0.8451543).epsilon(1e-4));
  std::vector<double> all_never{nan, nan, nan, nan, nan, nan};
  CHECK(std::isnan(spearman_rank_correlation(k, all_never)));
}

TEST_CASE("preset catalog is stable and resolvable") {
  const auto& names = preset_names();
  CHECK(names.size() == 10);
  for (const auto& n : names) {
    RunConfig c = preset_config(n, 5);
    CHECK(c.preset == n);
    CHECK(c.seed == 5);
  }
}

TEST_CASE("report json round-trips") {
  auto dir = fresh_dir("report_roundtrip");
  RunReport r = run_small("flow_verify", dir);
  REQUIRE_FALSE(r.failed);
  RunReport back = report_from_json(report_to_json(r));
  CHECK(report_to_json(back) == report_to_json(r));
  CHECK(back.metrics == r.metrics);
}

TEST_CASE("reports list every artifact with its checksum") {
  auto dir = fresh_dir("artifacts");
  RunReport r = run_small("exp3a", dir);
  REQUIRE_FALSE(r.failed);
  CHECK_FALSE(r.artifacts.empty());
  for (const auto& a : r.artifacts) {
    CAPTURE(a.path);
    REQUIRE(fsys::exists(dir / a.path));
    CHECK(file_checksum(dir / a.path) == a.checksum);
  }
  CHECK(fsys::exists(dir / "report.json"));
}

TEST_CASE("identical preset and seed reproduce metrics and checksums") {
  auto dir1 = fresh_dir("repro1");
  auto dir2 = fresh_dir("repro2");
  RunReport a = run_small("exp3d", dir1);
  RunReport b = run_small("exp3d", dir2);
  REQUIRE_FALSE(a.failed);
  CHECK(a.metrics == b.metrics);
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (size_t i = 0; i < a.artifacts.size(); ++i) {
    CHECK(a.artifacts[i].path == b.artifacts[i].path);
    CHECK(a.artifacts[i].checksum == b.artifacts[i].checksum);
  }
}

TEST_CASE("rerunning from the resolved config reproduces the run byte-identically") {
  auto dir1 = fresh_dir("resolved1");
  auto dir2 = fresh_dir("resolved2");
  RunReport a = run_small("exp3a", dir1);
  REQUIRE_FALSE(a.failed);
  RunConfig from_report = config_from_json(a.resolved_config);
  RunReport b = run_experiment(from_report, dir2, false);
  CHECK(a.metrics == b.metrics);
  for (size_t i = 0; i < a.artifacts.size(); ++i)
    CHECK(a.artifacts[i].checksum == b.artifacts[i].checksum);
}

TEST_CASE("a failing stage marks the report failed and leaves a marker") {
  auto dir = fresh_dir("failing");
  RunConfig c = preset_config("exp3a", 0);
  c.train.max_epochs = 10;
  c.spectrum.tracked = {5.0};
  c.sampling.b = 3.0;
  c.sampling.a = 5.0;  // invalid domain -> sampling stage throws
  RunReport r = run_experiment(c, dir, false);
  CHECK(r.failed);
  CHECK_FALSE(r.failure_stage.empty());
  CHECK(fsys::exists(dir / "FAILED"));
  CHECK(fsys::exists(dir / "report.json"));
}

TEST_CASE("exp2 smoke run emits heatmaps and spearman metrics per cell") {
  auto dir = fresh_dir("exp2_smoke");
  RunReport r = run_small(
      "exp2_spectral_bias", dir,
      {"exp2.cells=[{\"name\":\"gaussian_xavier\",\"activation\":{\"kind\":\"gaussian\","
       "\"width\":0.1},\"init\":{\"kind\":\"xavier\"}}]",
       "sampling.count=64", "train.max_epochs=400",
       "spectrum.grid={\"domain\":[-0.3,0.3],\"n\":128}"});
  REQUIRE_FALSE(r.failed);
  CHECK(fsys::exists(dir / "heatmap_gaussian_xavier.csv"));
  CHECK(fsys::exists(dir / "convergence_epochs_gaussian_xavier.csv"));
  CHECK(r.metrics.count("gaussian_xavier/final_loss") == 1);
  for (double k : {5.0, 10.0, 15.0, 20.0, 25.0, 30.0})
    CHECK(r.metrics.count("gaussian_xavier/converged/k" + std::to_string(int(k))) == 1);
}

TEST_CASE("exp5 smoke run aggregates table metrics and orderings") {
  auto dir = fresh_dir("exp5_smoke");
  // Replace the pretrained cell with xavier to keep the smoke test fast.
  RunReport r = run_small(
      "exp5_flat_minima", dir,
      {"exp5.cells=[{\"name\":\"relu_high\",\"activation\":{\"kind\":\"relu\"},\"init\":{"
       "\"kind\":\"xavier\"}},{\"name\":\"relu_low\",\"activation\":{\"kind\":\"relu\"},"
       "\"init\":{\"kind\":\"normal\",\"sigma\":0.03}},{\"name\":\"gaussian_high\","
       "\"activation\":{\"kind\":\"gaussian\",\"width\":0.1},\"init\":{\"kind\":\"xavier\"}},"
       "{\"name\":\"gaussian_low\",\"activation\":{\"kind\":\"gaussian\",\"width\":0.1},"
       "\"init\":{\"kind\":\"normal\",\"sigma\":0.03}}]",
       "train.max_epochs=300"});
  REQUIRE_FALSE(r.failed);
  CHECK(fsys::exists(dir / "table2_style.json"));
  CHECK(fsys::exists(dir / "flatness_reports.json"));
  CHECK(r.metrics.count("relu_high/mean_trace") == 1);
  CHECK(r.metrics.count("ordering/relu_trace_high_gt_low") == 1);
  CHECK(fsys::exists(dir / "landscape_relu_high.csv"));
}

TEST_CASE("flow_verify emits per-activation consistency reports") {
  auto dir = fresh_dir("flow_smoke");
  RunReport r = run_small("flow_verify", dir);
  REQUIRE_FALSE(r.failed);
  for (const std::string& act : {"relu", "gaussian", "sinusoid"}) {
    CHECK(fsys::exists(dir / ("velocity_" + act + ".csv")));
    CHECK(fsys::exists(dir / ("consistency_" + act + ".json")));
    CHECK(r.metrics.count(act + "/decay_ratio") == 1);
  }
}

TEST_CASE("svg emission adds well-formed plots when requested") {
  auto dir = fresh_dir("svg");
  RunConfig base = preset_config("exp3a", 0);
  auto ov = shrink_overrides();
  RunConfig c = config_from_json(apply_overrides(to_json(base), ov));
  RunReport r = run_experiment(c, dir, true);
  REQUIRE_FALSE(r.failed);
  CHECK(fsys::exists(dir / "spectra.svg"));
}
