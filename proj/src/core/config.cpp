#include "core/config.hpp"

#include <sstream>

namespace speclab {

using nlohmann::json;

ActivationKind activation_from_name(const std::string& name, double gaussian_width,
                                    double omega0) {
  if (name == "relu") return ActivationKind::relu();
  if (name == "gaussian") return ActivationKind::gaussian(gaussian_width);
  if (name == "sinusoid") return ActivationKind::sinusoid(omega0);
  if (name == "identity") return ActivationKind::identity();
  throw ConfigError("unknown activation: " + name);
}

namespace {

json activation_to_json(const ActivationKind& a) {
  json j;
  j["kind"] = a.name();
  if (a.kind == Activation::kGaussian) j["width"] = a.gaussian_width;
  if (a.kind == Activation::kSinusoid) j["omega0"] = a.omega0;
  return j;
}

ActivationKind activation_from_json(const json& j) {
  return activation_from_name(j.at("kind").get<std::string>(), j.value("width", 0.1),
                              j.value("omega0", 30.0));
}

json grid_to_json(const GridSpec& g) {
  return json{{"domain", {g.a, g.b}}, {"n", g.n}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.a = j.at("domain").at(0).get<double>();
  g.b = j.at("domain").at(1).get<double>();
  g.n = j.at("n").get<int>();
  return g;
}

json signal_to_json(const SignalSpec& s) {
  json terms = json::array();
  for (const Tone& t : s.terms)
    terms.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
  return json{{"dc", s.dc}, {"terms", terms}};
}

SignalSpec signal_from_json(const json& j) {
  SignalSpec s;
  s.dc = j.value("dc", 0.0);
  for (const json& t : j.value("terms", json::array())) {
    s.terms.push_back({t.at("amplitude").get<double>(), t.at("frequency").get<double>(),
                       t.value("phase", 0.0)});
  }
  return s;
}

json sampling_to_json(const SamplingSpec& s) {
  json j;
  j["domain"] = {s.a, s.b};
  j["mode"] = s.mode == SamplingSpec::Mode::kCount ? "count" : "step";
  j["count"] = s.count;
  j["step"] = s.step;
  j["offset"] = s.offset;
  j["noise_std"] = s.noise_std;
  return j;
}

SamplingSpec sampling_from_json(const json& j) {
  SamplingSpec s;
  s.a = j.at("domain").at(0).get<double>();
  s.b = j.at("domain").at(1).get<double>();
  std::string mode = j.value("mode", "count");
  if (mode == "count")
    s.mode = SamplingSpec::Mode::kCount;
  else if (mode == "step")
    s.mode = SamplingSpec::Mode::kStep;
  else
    throw ConfigError("unknown sampling mode: " + mode);
  s.count = j.value("count", 8);
  s.step = j.value("step", 1.0);
  s.offset = j.value("offset", 0.0);
  s.noise_std = j.value("noise_std", 0.0);
  return s;
}

json arch_to_json(const Architecture& a) {
  json j;
  j["input_dim"] = a.input_dim;
  j["hidden_widths"] = a.hidden_widths;
  j["output_dim"] = a.output_dim;
  j["activation"] = activation_to_json(a.activation);
  return j;
}

Architecture arch_from_json(const json& j) {
  Architecture a;
  a.input_dim = j.value("input_dim", 1);
  a.hidden_widths = j.value("hidden_widths", std::vector<int>{});
  a.output_dim = j.value("output_dim", 1);
  a.activation = activation_from_json(j.at("activation"));
  return a;
}

std::string label_kind_name(RandomLabelKind k) {
  switch (k) {
    case RandomLabelKind::kMseNoise:
      return "mse_noise";
    case RandomLabelKind::kBinary:
      return "binary";
    case RandomLabelKind::kMulticlass:
      return "multiclass";
  }
  return "?";
}

RandomLabelKind label_kind_from_name(const std::string& name) {
  if (name == "mse_noise") return RandomLabelKind::kMseNoise;
  if (name == "binary") return RandomLabelKind::kBinary;
  if (name == "multiclass") return RandomLabelKind::kMulticlass;
  throw ConfigError("unknown label kind: " + name);
}

json init_to_json(const InitScheme& s) {
  json j;
  switch (s.kind) {
    case InitKind::kXavier:
      j["kind"] = "xavier";
      break;
    case InitKind::kNormal:
      j["kind"] = "normal";
      j["sigma"] = s.sigma;
      break;
    case InitKind::kSitzmann:
      j["kind"] = "sitzmann";
      j["omega0"] = s.omega0;
      break;
    case InitKind::kPretrained: {
      j["kind"] = "pretrained";
      json t;
      const PretrainTarget& target = s.pretrain.target;
      switch (target.kind) {
        case PretrainTargetKind::kSinusoid:
          t["kind"] = "sinusoid";
          t["frequency"] = target.frequency;
          t["amplitude"] = target.amplitude;
          break;
        case PretrainTargetKind::kDC:
          t["kind"] = "dc";
          t["level"] = target.level;
          break;
        case PretrainTargetKind::kRandomLabels:
          t["kind"] = "random_labels";
          t["label_kind"] = label_kind_name(target.label_kind);
          t["n_points"] = target.n_points;
          t["n_bins"] = target.n_bins;
          break;
      }
      j["pretrain"] = {{"target", t},
                       {"max_epochs", s.pretrain.budget.max_epochs},
                       {"loss_tol", s.pretrain.budget.loss_tol},
                       {"domain", {s.pretrain.domain_a, s.pretrain.domain_b}},
                       {"grid_points", s.pretrain.grid_points},
                       {"lr", s.pretrain.lr},
                       {"telemetry_every", s.pretrain.telemetry_every}};
      break;
    }
  }
  return j;
}

InitScheme init_from_json(const json& j) {
  InitScheme s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "xavier") {
    s.kind = InitKind::kXavier;
  } else if (kind == "normal") {
    s.kind = InitKind::kNormal;
    s.sigma = j.value("sigma", 0.03);
  } else if (kind == "sitzmann") {
    s.kind = InitKind::kSitzmann;
    s.omega0 = j.value("omega0", 30.0);
  } else if (kind == "pretrained") {
    s.kind = InitKind::kPretrained;
    const json& p = j.at("pretrain");
    const json& t = p.at("target");
    std::string tk = t.at("kind").get<std::string>();
    if (tk == "sinusoid") {
      s.pretrain.target.kind = PretrainTargetKind::kSinusoid;
      s.pretrain.target.frequency = t.at("frequency").get<double>();
      s.pretrain.target.amplitude = t.value("amplitude", 1.0);
    } else if (tk == "dc") {
      s.pretrain.target.kind = PretrainTargetKind::kDC;
      s.pretrain.target.level = t.value("level", 0.0);
    } else if (tk == "random_labels") {
      s.pretrain.target.kind = PretrainTargetKind::kRandomLabels;
      s.pretrain.target.label_kind = label_kind_from_name(t.at("label_kind").get<std::string>());
      s.pretrain.target.n_points = t.value("n_points", 64);
      s.pretrain.target.n_bins = t.value("n_bins", 4);
    } else {
      throw ConfigError("unknown pretrain target: " + tk);
    }
    s.pretrain.budget.max_epochs = p.value("max_epochs", 200000L);
    s.pretrain.budget.loss_tol = p.value("loss_tol", 1e-3);
    s.pretrain.domain_a = p.at("domain").at(0).get<double>();
    s.pretrain.domain_b = p.at("domain").at(1).get<double>();
    s.pretrain.grid_points = p.value("grid_points", 512);
    s.pretrain.lr = p.value("lr", 0.0);
    s.pretrain.telemetry_every = p.value("telemetry_every", 1000L);
  } else {
    throw ConfigError("unknown init kind: " + kind);
  }
  return s;
}

json train_to_json(const TrainConfig& t) {
  json j;
  j["lr"] = t.lr;
  j["max_epochs"] = t.max_epochs;
  j["batch_size"] = t.batch_size;
  j["loss"] = loss_name(t.loss);
  j["stop_tol"] = t.stop_tol;
  j["telemetry_every"] = t.telemetry_every;
  return j;
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.lr = j.value("lr", 1e-4);
  t.max_epochs = j.value("max_epochs", 200000L);
  t.batch_size = j.value("batch_size", 0);
  t.loss = loss_from_name(j.value("loss", "mse"));
  t.stop_tol = j.value("stop_tol", 1e-3);
  t.telemetry_every = j.value("telemetry_every", 1000L);
  return t;
}

json cell_to_json(const ExperimentCell& c) {
  return json{{"name", c.name},
              {"activation", activation_to_json(c.activation)},
              {"init", init_to_json(c.init)},
              {"hidden_widths", c.hidden_widths},
              {"lr", c.lr},
              {"lr_safety", c.lr_safety},
              {"max_epochs", c.max_epochs}};
}

ExperimentCell cell_from_json(const json& j) {
  ExperimentCell c;
  c.name = j.at("name").get<std::string>();
  c.activation = activation_from_json(j.at("activation"));
  c.init = init_from_json(j.at("init"));
  c.hidden_widths = j.value("hidden_widths", std::vector<int>{});
  c.lr = j.value("lr", 0.0);
  c.lr_safety = j.value("lr_safety", 0.0);
  c.max_epochs = j.value("max_epochs", 0L);
  return c;
}

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["signal"] = signal_to_json(c.signal);
  j["sampling"] = sampling_to_json(c.sampling);
  j["arch"] = arch_to_json(c.arch);
  j["init"] = init_to_json(c.init);
  j["train"] = train_to_json(c.train);
  j["lr_auto_safety"] = c.lr_auto_safety;

  j["spectrum"] = {{"grid", grid_to_json(c.spectrum.grid)},
                   {"cutoff", c.spectrum.cutoff},
                   {"low_threshold", c.spectrum.low_threshold},
                   {"high_threshold", c.spectrum.high_threshold},
                   {"tracked", c.spectrum.tracked},
                   {"convergence_threshold", c.spectrum.convergence_threshold}};
  j["test"] = {{"domain", {c.test.a, c.test.b}}, {"n", c.test.n}};
  j["flow"] = {{"quad", grid_to_json(c.flow.quad)},   {"k_max", c.flow.k_max},
               {"lr", c.flow.lr},                     {"lr_sweep", c.flow.lr_sweep},
               {"activations", c.flow.activations},   {"width", c.flow.width},
               {"depth", c.flow.depth}};
  j["flatness"] = {{"n_probes", c.flatness.n_probes},
                   {"power_max_iters", c.flatness.power_max_iters},
                   {"power_tol", c.flatness.power_tol},
                   {"top_k", c.flatness.top_k}};
  j["landscape"] = {{"extent", c.landscape_extent}, {"resolution", c.landscape_resolution}};

  j["exp1"] = {{"depths", c.exp1.depths}, {"activations", c.exp1.activations}};
  json cells2 = json::array();
  for (const auto& cell : c.exp2.cells) cells2.push_back(cell_to_json(cell));
  j["exp2"] = {{"cells", cells2}};
  json cells5 = json::array();
  for (const auto& cell : c.exp5.cells) cells5.push_back(cell_to_json(cell));
  j["exp5"] = {{"n_signals", c.exp5.n_signals}, {"cells", cells5}};
  j["appendix"] = {{"label_kinds", c.appendix.label_kinds},
                   {"n_points", c.appendix.n_points},
                   {"n_bins", c.appendix.n_bins},
                   {"histogram_bins", c.appendix.histogram_bins},
                   {"emit_heatmaps", c.appendix.emit_heatmaps},
                   {"heatmap_max_epochs", c.appendix.heatmap_max_epochs}};
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    c.preset = j.value("preset", "");
    c.seed = j.value("seed", 0ull);
    if (j.contains("signal")) c.signal = signal_from_json(j.at("signal"));
    if (j.contains("sampling")) c.sampling = sampling_from_json(j.at("sampling"));
    if (j.contains("arch")) c.arch = arch_from_json(j.at("arch"));
    if (j.contains("init")) c.init = init_from_json(j.at("init"));
    if (j.contains("train")) c.train = train_from_json(j.at("train"));
    c.lr_auto_safety = j.value("lr_auto_safety", 0.0);
    if (j.contains("spectrum")) {
      const json& s = j.at("spectrum");
      c.spectrum.grid = grid_from_json(s.at("grid"));
      c.spectrum.cutoff = s.value("cutoff", 0.5);
      c.spectrum.low_threshold = s.value("low_threshold", 0.05);
      c.spectrum.high_threshold = s.value("high_threshold", 0.20);
      c.spectrum.tracked = s.value("tracked", std::vector<double>{});
      c.spectrum.convergence_threshold = s.value("convergence_threshold", 0.1);
    }
    if (j.contains("test")) {
      const json& t = j.at("test");
      c.test.a = t.at("domain").at(0).get<double>();
      c.test.b = t.at("domain").at(1).get<double>();
      c.test.n = t.value("n", 512);
    }
    if (j.contains("flow")) {
      const json& f = j.at("flow");
      c.flow.quad = grid_from_json(f.at("quad"));
      c.flow.k_max = f.value("k_max", 40.0);
      c.flow.lr = f.value("lr", 1e-4);
      c.flow.lr_sweep = f.value("lr_sweep", std::vector<double>{1e-3, 1e-4, 1e-5});
      c.flow.activations =
          f.value("activations", std::vector<std::string>{"relu", "gaussian", "sinusoid"});
      c.flow.width = f.value("width", 64);
      c.flow.depth = f.value("depth", 2);
    }
    if (j.contains("flatness")) {
      const json& f = j.at("flatness");
      c.flatness.n_probes = f.value("n_probes", 1024);
      c.flatness.power_max_iters = f.value("power_max_iters", 1000);
      c.flatness.power_tol = f.value("power_tol", 1e-6);
      c.flatness.top_k = f.value("top_k", 2);
    }
    if (j.contains("landscape")) {
      c.landscape_extent = j.at("landscape").value("extent", 0.5);
      c.landscape_resolution = j.at("landscape").value("resolution", 41);
    }
    if (j.contains("exp1")) {
      c.exp1.depths = j.at("exp1").value("depths", std::vector<int>{2, 3, 4, 5, 6});
      c.exp1.activations = j.at("exp1").value(
          "activations", std::vector<std::string>{"relu", "gaussian", "sinusoid"});
    }
    if (j.contains("exp2")) {
      c.exp2.cells.clear();
      for (const json& cell : j.at("exp2").value("cells", json::array()))
        c.exp2.cells.push_back(cell_from_json(cell));
    }
    if (j.contains("exp5")) {
      c.exp5.n_signals = j.at("exp5").value("n_signals", 20);
      c.exp5.cells.clear();
      for (const json& cell : j.at("exp5").value("cells", json::array()))
        c.exp5.cells.push_back(cell_from_json(cell));
    }
    if (j.contains("appendix")) {
      const json& a = j.at("appendix");
      c.appendix.label_kinds = a.value(
          "label_kinds", std::vector<std::string>{"mse_noise", "binary", "multiclass"});
      c.appendix.n_points = a.value("n_points", 64);
      c.appendix.n_bins = a.value("n_bins", 4);
      c.appendix.histogram_bins = a.value("histogram_bins", 32);
      c.appendix.emit_heatmaps = a.value("emit_heatmaps", true);
      c.appendix.heatmap_max_epochs = a.value("heatmap_max_epochs", 40000L);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

json apply_overrides(json j, const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + ov);
    std::string key = ov.substr(0, eq);
    std::string value = ov.substr(eq + 1);
    // Strip surrounding whitespace from the key path.
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!key.empty() && key.front() == ' ') key.erase(key.begin());

    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // bare word: keep as string
    }

    json* node = &j;
    size_t pos = 0;
    for (;;) {
      size_t dot = key.find('.', pos);
      std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
      if (part.empty()) throw ConfigError("empty path component in override: " + ov);
      if (dot == std::string::npos) {
        (*node)[part] = parsed;
        break;
      }
      node = &(*node)[part];
      pos = dot + 1;
    }
  }
  return j;
}

RunConfig parse_config_text(const std::string& text) {
  // JSON first; otherwise dotted key = value lines.
  try {
    return config_from_json(json::parse(text));
  } catch (const json::exception&) {
  }
  std::vector<std::string> assignments;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    bool blank = true;
    for (char ch : line)
      if (!isspace(static_cast<unsigned char>(ch))) blank = false;
    if (blank) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line is not key = value: " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      while (!s.empty() && isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    };
    trim(key);
    trim(value);
    assignments.push_back(key + "=" + value);
  }
  // Overlay onto an empty object so partial files stay usable; defaults fill
  // the rest through config_from_json.
  return config_from_json(apply_overrides(json::object(), assignments));
}

namespace {

void flatten_json(const json& j, const std::string& prefix, std::ostringstream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten_json(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else {
    out << prefix << " = " << j.dump() << "\n";
  }
}

}  // namespace

std::string config_to_text(const RunConfig& config) {
  std::ostringstream out;
  flatten_json(to_json(config), "", out);
  return out.str();
}

}  // namespace speclab
