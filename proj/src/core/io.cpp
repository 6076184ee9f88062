#include "core/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace speclab {

using nlohmann::json;

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

std::string file_checksum(const fs::path& path) { return fnv1a64_hex(read_text_file(path)); }

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream ss;
  for (size_t i = 0; i < header.size(); ++i) ss << (i ? "," : "") << header[i];
  ss << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) ss << (i ? "," : "") << fmt(row[i]);
    ss << "\n";
  }
  write_text_file(path, ss.str());
}

void save_params(const fs::path& path, const NetworkParams& params) {
  params.validate();
  fs::path bin = path;
  bin.replace_extension(".bin");

  Eigen::VectorXd flat = params.flatten();
  std::string blob(reinterpret_cast<const char*>(flat.data()),
                   static_cast<size_t>(flat.size()) * sizeof(double));
  // The blob is declared little-endian; this writer targets little-endian hosts.
  write_text_file(bin, blob);

  json arch;
  arch["input_dim"] = params.arch.input_dim;
  arch["hidden_widths"] = params.arch.hidden_widths;
  arch["output_dim"] = params.arch.output_dim;
  arch["activation"] = {{"kind", params.arch.activation.name()},
                        {"gaussian_width", params.arch.activation.gaussian_width},
                        {"omega0", params.arch.activation.omega0}};
  json side;
  side["format"] = "speclab-params-v1";
  side["architecture"] = arch;
  side["param_count"] = params.param_count();
  side["byte_order"] = "little";
  side["blob"] = bin.filename().string();
  write_text_file(path, side.dump(2) + "\n");
}

NetworkParams load_params(const fs::path& path) {
  json side = json::parse(read_text_file(path));
  if (side.value("format", "") != "speclab-params-v1")
    throw ConfigError("not a speclab params file: " + path.string());
  Architecture arch;
  const json& a = side.at("architecture");
  arch.input_dim = a.at("input_dim").get<int>();
  arch.hidden_widths = a.at("hidden_widths").get<std::vector<int>>();
  arch.output_dim = a.at("output_dim").get<int>();
  const json& act = a.at("activation");
  std::string kind = act.at("kind").get<std::string>();
  if (kind == "relu")
    arch.activation = ActivationKind::relu();
  else if (kind == "gaussian")
    arch.activation = ActivationKind::gaussian(act.at("gaussian_width").get<double>());
  else if (kind == "sinusoid")
    arch.activation = ActivationKind::sinusoid(act.at("omega0").get<double>());
  else if (kind == "identity")
    arch.activation = ActivationKind::identity();
  else
    throw ConfigError("unknown activation kind: " + kind);

  fs::path bin = path;
  bin = bin.parent_path() / side.at("blob").get<std::string>();
  std::string blob = read_text_file(bin);
  std::int64_t count = arch.param_count();
  if (blob.size() != static_cast<size_t>(count) * sizeof(double))
    throw ConfigError("params blob size does not match the architecture");
  Eigen::VectorXd flat(count);
  std::memcpy(flat.data(), blob.data(), blob.size());
  return NetworkParams::unflatten(arch, flat);
}

void save_dataset_csv(const fs::path& path, const Dataset& data) {
  std::vector<std::string> header;
  for (Eigen::Index c = 0; c < data.xs.cols(); ++c) header.push_back("x" + std::to_string(c));
  for (Eigen::Index c = 0; c < data.ys.cols(); ++c) header.push_back("y" + std::to_string(c));
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < data.xs.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index c = 0; c < data.xs.cols(); ++c) row.push_back(data.xs(i, c));
    for (Eigen::Index c = 0; c < data.ys.cols(); ++c) row.push_back(data.ys(i, c));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

Dataset load_dataset_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty dataset file: " + path.string());
  int xdim = 0, ydim = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (!col.empty() && col[0] == 'x')
        ++xdim;
      else if (!col.empty() && col[0] == 'y')
        ++ydim;
      else
        throw ConfigError("dataset header columns must be x*/y*: " + col);
    }
  }
  if (xdim == 0 || ydim == 0) throw ConfigError("dataset needs x and y columns");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != xdim + ydim)
      throw ConfigError("dataset row width mismatch in " + path.string());
    rows.push_back(std::move(row));
  }
  Dataset d;
  d.xs.resize(static_cast<Eigen::Index>(rows.size()), xdim);
  d.ys.resize(static_cast<Eigen::Index>(rows.size()), ydim);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < xdim; ++c) d.xs(static_cast<Eigen::Index>(i), c) = rows[i][c];
    for (int c = 0; c < ydim; ++c) d.ys(static_cast<Eigen::Index>(i), c) = rows[i][xdim + c];
  }
  d.validate();
  return d;
}

void save_spectrum_csv(const fs::path& path, const Spectrum& spec) {
  std::vector<std::vector<double>> rows;
  for (size_t m = 0; m < spec.freqs.size(); ++m)
    rows.push_back({spec.freqs[m], spec.coeffs[static_cast<Eigen::Index>(m)].real(),
                    spec.coeffs[static_cast<Eigen::Index>(m)].imag(),
                    spec.power[static_cast<Eigen::Index>(m)]});
  write_csv(path, {"k", "re", "im", "power"}, rows);
}

void save_heatmap_csv(const fs::path& path, const ConvergenceHeatmap& heatmap,
                      bool magnitude_only) {
  std::vector<std::string> header{"epoch"};
  for (double k : heatmap.tracked_freqs) {
    std::ostringstream ss;
    ss << "k=" << k;
    header.push_back(ss.str());
  }
  const Eigen::MatrixXd& e = magnitude_only ? heatmap.mag_errors : heatmap.errors;
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    std::vector<double> row{static_cast<double>(heatmap.epochs[static_cast<size_t>(r)])};
    for (Eigen::Index c = 0; c < e.cols(); ++c) row.push_back(e(r, c));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void save_loss_csv(const fs::path& path, const std::vector<double>& epoch_losses) {
  std::vector<std::vector<double>> rows;
  for (size_t e = 0; e < epoch_losses.size(); ++e)
    rows.push_back({static_cast<double>(e), epoch_losses[e]});
  write_csv(path, {"epoch", "loss"}, rows);
}

void save_velocity_csv(const fs::path& path, const FourierVelocity& fv) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < fv.xi.size(); ++i) {
    auto v = fv.values[static_cast<Eigen::Index>(i)];
    rows.push_back({fv.xi[i] / (2.0 * M_PI), v.real(), v.imag(), std::abs(v)});
  }
  write_csv(path, {"k", "re", "im", "abs"}, rows);
}

void save_landscape_csv(const fs::path& path, const LandscapeSlice& slice) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < slice.alphas.size(); ++i)
    for (Eigen::Index j = 0; j < slice.betas.size(); ++j)
      rows.push_back({slice.alphas[i], slice.betas[j], slice.losses(i, j)});
  write_csv(path, {"alpha", "beta", "loss"}, rows);
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Blue -> white -> red map on t in [0, 1].
std::string color_of(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    double u = t * 2.0;
    r = static_cast<int>(30 + u * 225);
    g = static_cast<int>(60 + u * 195);
    b = 255;
  } else {
    double u = (t - 0.5) * 2.0;
    r = 255;
    g = static_cast<int>(255 - u * 195);
    b = static_cast<int>(255 - u * 225);
  }
  std::ostringstream ss;
  ss << "rgb(" << r << "," << g << "," << b << ")";
  return ss.str();
}

constexpr int kW = 720, kH = 420, kMargin = 50;

struct SvgDoc {
  std::ostringstream body;
  std::string finish(const std::string& title) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
        << "font-family=\"sans-serif\">" << xml_escape(title) << "</text>\n";
    out << body.str();
    out << "</svg>\n";
    return out.str();
  }
};

}  // namespace

void svg_line_plot(const fs::path& path, const std::vector<double>& xs,
                   const std::vector<std::pair<std::string, std::vector<double>>>& series,
                   const std::string& title, bool log_y) {
  if (xs.empty() || series.empty()) throw ConfigError("svg_line_plot needs data");
  double xmin = *std::min_element(xs.begin(), xs.end());
  double xmax = *std::max_element(xs.begin(), xs.end());
  double ymin = 1e300, ymax = -1e300;
  auto yval = [&](double v) { return log_y ? std::log10(std::max(v, 1e-18)) : v; };
  for (const auto& [name, ys] : series)
    for (double v : ys) {
      ymin = std::min(ymin, yval(v));
      ymax = std::max(ymax, yval(v));
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  auto px = [&](double x) { return kMargin + (x - xmin) / (xmax - xmin) * (kW - 2 * kMargin); };
  auto py = [&](double y) {
    return kH - kMargin - (yval(y) - ymin) / (ymax - ymin) * (kH - 2 * kMargin);
  };

  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  SvgDoc doc;
  doc.body << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kW - 2 * kMargin
           << "\" height=\"" << kH - 2 * kMargin
           << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";
  int idx = 0;
  for (const auto& [name, ys] : series) {
    doc.body << "<polyline fill=\"none\" stroke=\"" << palette[idx % 6]
             << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < xs.size() && i < ys.size(); ++i)
      doc.body << px(xs[i]) << "," << py(ys[i]) << " ";
    doc.body << "\"/>\n";
    doc.body << "<text x=\"" << kW - kMargin + 4 << "\" y=\"" << kMargin + 16 * idx + 10
             << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << palette[idx % 6]
             << "\">" << xml_escape(name) << "</text>\n";
    ++idx;
  }
  write_text_file(path, doc.finish(title));
}

void svg_heatmap(const fs::path& path, const ConvergenceHeatmap& heatmap,
                 const std::string& title) {
  const Eigen::Index rows = heatmap.errors.rows();
  const Eigen::Index cols = heatmap.errors.cols();
  if (rows == 0 || cols == 0) throw ConfigError("svg_heatmap needs data");
  double cap = 1.0;  // linear map of clipped relative error
  double cw = static_cast<double>(kW - 2 * kMargin) / rows;
  double ch = static_cast<double>(kH - 2 * kMargin) / cols;
  SvgDoc doc;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double t = std::clamp(heatmap.errors(r, c) / cap, 0.0, 1.0);
      // epoch on x, frequency on y (lowest frequency at the bottom)
      double x = kMargin + r * cw;
      double y = kH - kMargin - (c + 1) * ch;
      doc.body << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw + 0.5
               << "\" height=\"" << ch + 0.5 << "\" fill=\"" << color_of(t) << "\"/>\n";
    }
  for (Eigen::Index c = 0; c < cols; ++c) {
    doc.body << "<text x=\"8\" y=\"" << kH - kMargin - c * ch - ch / 2
             << "\" font-size=\"10\" font-family=\"sans-serif\">k=" << heatmap.tracked_freqs[c]
             << "</text>\n";
  }
  write_text_file(path, doc.finish(title));
}

void svg_landscape(const fs::path& path, const LandscapeSlice& slice, const std::string& title) {
  const Eigen::Index n = slice.alphas.size();
  double lmin = slice.losses.minCoeff();
  double lmax = slice.losses.maxCoeff();
  if (lmax == lmin) lmax = lmin + 1;
  double cell = static_cast<double>(std::min(kW, kH) - 2 * kMargin) / n;
  SvgDoc doc;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double t = (slice.losses(i, j) - lmin) / (lmax - lmin);
      doc.body << "<rect x=\"" << kMargin + i * cell << "\" y=\""
               << kH - kMargin - (j + 1) * cell << "\" width=\"" << cell + 0.5 << "\" height=\""
               << cell + 0.5 << "\" fill=\"" << color_of(t) << "\"/>\n";
    }
  write_text_file(path, doc.finish(title));
}

}  // namespace speclab
