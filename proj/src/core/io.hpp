#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "core/net.hpp"
#include "core/signals.hpp"
#include "core/spectrum.hpp"
#include "core/flatness.hpp"
#include "core/flow.hpp"

namespace speclab {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, const std::string& content);
std::string read_text_file(const fs::path& path);

/// FNV-1a 64-bit digest, hex encoded; the artifact content checksum.
std::string fnv1a64_hex(const std::string& bytes);
std::string file_checksum(const fs::path& path);

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Trained parameters: little-endian float64 blob in flat layout plus a JSON
/// sidecar carrying the architecture. `path` names the sidecar; the blob gets
/// the same stem with a .bin extension.
void save_params(const fs::path& path, const NetworkParams& params);
NetworkParams load_params(const fs::path& path);

/// Dataset CSV: header x0..x{d-1},y0..y{m-1}, one row per point.
void save_dataset_csv(const fs::path& path, const Dataset& data);
Dataset load_dataset_csv(const fs::path& path);

void save_spectrum_csv(const fs::path& path, const Spectrum& spec);
void save_heatmap_csv(const fs::path& path, const ConvergenceHeatmap& heatmap,
                      bool magnitude_only = false);
void save_loss_csv(const fs::path& path, const std::vector<double>& epoch_losses);
void save_velocity_csv(const fs::path& path, const FourierVelocity& fv);
void save_landscape_csv(const fs::path& path, const LandscapeSlice& slice);

// Minimal SVG emitters; each writes a single-root, well-formed document.
void svg_line_plot(const fs::path& path, const std::vector<double>& xs,
                   const std::vector<std::pair<std::string, std::vector<double>>>& series,
                   const std::string& title, bool log_y = false);
void svg_heatmap(const fs::path& path, const ConvergenceHeatmap& heatmap,
                 const std::string& title);
void svg_landscape(const fs::path& path, const LandscapeSlice& slice, const std::string& title);

}  // namespace speclab
