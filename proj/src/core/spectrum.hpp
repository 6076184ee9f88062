#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "core/net.hpp"
#include "core/signals.hpp"
#include "core/train.hpp"

namespace speclab {

/// Uniform grid on a compact interval K = [a, b]: x_m = a + m*(b-a)/n,
/// m = 0..n-1. Functions are treated as extended by zero outside K, so the
/// grid transform below approximates the mollified Fourier transform.
struct GridSpec {
  double a = -4.0;
  double b = 4.0;
  int n = 1024;

  double spacing() const { return (b - a) / n; }
  double length() const { return b - a; }
  Eigen::VectorXd points() const;
  void validate() const;
};

/// One-sided discrete spectrum: freqs k_m = m/(b-a) cycles per unit,
/// m = 0..n/2; coeffs are Delta * sum_j samples_j * exp(-2*pi*i*k_m*x_j).
struct Spectrum {
  GridSpec grid;
  std::vector<double> freqs;
  Eigen::VectorXcd coeffs;
  Eigen::VectorXd power;  // |coeffs|^2

  int bin_of(double k) const;  // nearest bin index
  /// Two-sided power sum (conjugate symmetry of real inputs made explicit).
  double total_power_two_sided() const;
};

Spectrum dft(const Eigen::VectorXd& samples, const GridSpec& grid);
/// O(n^2) evaluation of the same transform; oracle for the fast path.
Spectrum dft_direct(const Eigen::VectorXd& samples, const GridSpec& grid);
/// Inverse of dft for real signals; reproduces the samples.
Eigen::VectorXd reconstruct(const Spectrum& spec);

Spectrum network_spectrum(const NetworkParams& params, const GridSpec& grid);

struct BandwidthEnergy {
  double fraction = 0.0;   // share of non-DC power above the cutoff
  bool degenerate = false; // no non-DC power at all
};
BandwidthEnergy bandwidth_energy(const Spectrum& spec, double cutoff);

/// Per tracked frequency: |pred(k) - target(k)| / |target(k)| on complex
/// coefficients at the nearest bin. Throws on untrackable (zero) targets.
std::vector<double> frequency_error(const Spectrum& pred, const Spectrum& target,
                                    const std::vector<double>& tracked);
/// Magnitude-only variant: ||pred| - |target|| / |target|.
std::vector<double> frequency_error_magnitude(const Spectrum& pred, const Spectrum& target,
                                              const std::vector<double>& tracked);

struct ConvergenceHeatmap {
  std::vector<double> tracked_freqs;
  std::vector<long> epochs;
  Eigen::MatrixXd errors;      // epoch x freq, complex relative error
  Eigen::MatrixXd mag_errors;  // epoch x freq, magnitude-only error
};

/// Builds the heatmap from recorded training snapshots.
ConvergenceHeatmap track_convergence(const TrainTrace& trace, const Spectrum& target,
                                     const GridSpec& grid, const std::vector<double>& tracked);

/// Online variant: feed this as the telemetry callback to avoid storing
/// parameter snapshots. Produces the same heatmap as track_convergence.
class SpectrumTracker {
 public:
  SpectrumTracker(Spectrum target, GridSpec grid, std::vector<double> tracked);
  bool observe(long epoch, const NetworkParams& params);
  ConvergenceHeatmap heatmap() const;

 private:
  Spectrum target_;
  GridSpec grid_;
  std::vector<double> tracked_;
  std::vector<long> epochs_;
  std::vector<std::vector<double>> rows_, mag_rows_;
};

/// Earliest snapshot epoch from which the error stays below threshold for all
/// later snapshots; nullopt when it never does.
std::vector<std::optional<long>> convergence_epochs(const ConvergenceHeatmap& heatmap,
                                                    double threshold);

/// max |second central difference| against the spectral bound
/// 4*pi^2 * sum_k k^2 |g_hat(k)| (two-sided, discrete measure 1/(b-a)).
struct SecondDerivativeBound {
  double lhs_max = 0.0;
  double rhs_bound = 0.0;
  bool holds = false;
};
SecondDerivativeBound second_derivative_bound_check(const Eigen::VectorXd& samples,
                                                    const GridSpec& grid);
SecondDerivativeBound second_derivative_bound_check(const NetworkParams& params,
                                                    const GridSpec& grid);

struct GradientHistogram {
  std::vector<double> edges;  // n_bins + 1 edges
  std::vector<long> counts;
  double min = 0.0, max = 0.0;
  double range = 0.0;  // bandwidth proxy: width of the observed gradient range
};
GradientHistogram input_gradient_histogram(const NetworkParams& params, const Dataset& data,
                                           int n_bins);

}  // namespace speclab
