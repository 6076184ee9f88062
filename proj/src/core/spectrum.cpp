#include "core/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

using cd = std::complex<double>;

Eigen::VectorXd GridSpec::points() const {
  validate();
  Eigen::VectorXd xs(n);
  for (int m = 0; m < n; ++m) xs[m] = a + m * (b - a) / n;
  return xs;
}

void GridSpec::validate() const {
  if (!(b > a)) throw ConfigError("grid requires b > a");
  if (n < 2) throw ConfigError("grid requires n >= 2");
}

int Spectrum::bin_of(double k) const {
  double raw = k * grid.length();
  int m = static_cast<int>(std::lround(raw));
  if (m < 0 || m >= static_cast<int>(freqs.size()))
    throw ConfigError("frequency outside the one-sided spectrum range");
  return m;
}

double Spectrum::total_power_two_sided() const {
  // Real input: bins 1..n/2-1 appear twice; DC and Nyquist once.
  double total = power[0];
  int half = static_cast<int>(power.size()) - 1;
  for (int m = 1; m < half; ++m) total += 2.0 * power[m];
  if (half >= 1) total += (grid.n % 2 == 0) ? power[half] : 2.0 * power[half];
  return total;
}

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT, forward sign convention exp(-2*pi*i*jm/n).
void fft_radix2(std::vector<cd>& v) {
  const size_t n = v.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v[i], v[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * M_PI / static_cast<double>(len);
    cd wl(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      cd w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        cd u = v[i + j];
        cd t = v[i + j + len / 2] * w;
        v[i + j] = u + t;
        v[i + j + len / 2] = u - t;
        w *= wl;
      }
    }
  }
}

Spectrum assemble(const GridSpec& grid, const std::vector<cd>& bins) {
  Spectrum s;
  s.grid = grid;
  const int half = grid.n / 2;
  const double delta = grid.spacing();
  s.freqs.resize(half + 1);
  s.coeffs.resize(half + 1);
  s.power.resize(half + 1);
  for (int m = 0; m <= half; ++m) {
    // Continuous-transform scaling Delta and the grid-origin phase shift.
    double k = m / grid.length();
    cd phase(std::cos(-2.0 * M_PI * k * grid.a), std::sin(-2.0 * M_PI * k * grid.a));
    cd c = delta * phase * bins[m];
    s.freqs[m] = k;
    s.coeffs[m] = c;
    s.power[m] = std::norm(c);
  }
  return s;
}

}  // namespace

Spectrum dft(const Eigen::VectorXd& samples, const GridSpec& grid) {
  grid.validate();
  if (samples.size() != grid.n) throw ShapeError("sample count does not match the grid");
  if (!is_pow2(grid.n)) return dft_direct(samples, grid);
  std::vector<cd> v(grid.n);
  for (int j = 0; j < grid.n; ++j) v[j] = cd(samples[j], 0.0);
  fft_radix2(v);
  return assemble(grid, v);
}

Spectrum dft_direct(const Eigen::VectorXd& samples, const GridSpec& grid) {
  grid.validate();
  if (samples.size() != grid.n) throw ShapeError("sample count does not match the grid");
  std::vector<cd> bins(grid.n, cd(0.0));
  for (int m = 0; m <= grid.n / 2; ++m) {
    cd acc(0.0);
    for (int j = 0; j < grid.n; ++j) {
      double angle = -2.0 * M_PI * static_cast<double>(m) * j / grid.n;
      acc += samples[j] * cd(std::cos(angle), std::sin(angle));
    }
    bins[m] = acc;
  }
  return assemble(grid, bins);
}

Eigen::VectorXd reconstruct(const Spectrum& spec) {
  // s_j = (1/(b-a)) * sum over the full two-sided spectrum of
  // g_hat(k) exp(2*pi*i*k*x_j); negative bins are conjugates of positive ones.
  const GridSpec& grid = spec.grid;
  const int n = grid.n;
  const int half = static_cast<int>(spec.freqs.size()) - 1;
  Eigen::VectorXd samples(n);
  for (int j = 0; j < n; ++j) {
    double x = grid.a + j * grid.length() / n;
    double acc = 0.0;
    for (int m = 0; m <= half; ++m) {
      double k = spec.freqs[m];
      cd e(std::cos(2.0 * M_PI * k * x), std::sin(2.0 * M_PI * k * x));
      double term = (spec.coeffs[m] * e).real();
      bool shared = (m == 0) || (n % 2 == 0 && m == half);
      acc += shared ? term : 2.0 * term;
    }
    samples[j] = acc / grid.length();
  }
  return samples;
}

Spectrum network_spectrum(const NetworkParams& params, const GridSpec& grid) {
  if (params.arch.input_dim != 1 || params.arch.output_dim != 1)
    throw ShapeError("network_spectrum requires a scalar 1-D network");
  Eigen::VectorXd xs = grid.points();
  Eigen::MatrixXd X(xs.size(), 1);
  X.col(0) = xs;
  Eigen::VectorXd samples = forward(params, X).col(0);
  return dft(samples, grid);
}

BandwidthEnergy bandwidth_energy(const Spectrum& spec, double cutoff) {
  if (cutoff < 0.0 || cutoff > spec.freqs.back())
    throw ConfigError("bandwidth cutoff outside grid range");
  double above = 0.0, nondc = 0.0;
  for (size_t m = 1; m < spec.freqs.size(); ++m) {
    nondc += spec.power[m];
    if (spec.freqs[m] > cutoff) above += spec.power[m];
  }
  if (nondc <= 0.0) return {0.0, true};
  return {above / nondc, false};
}

std::vector<double> frequency_error(const Spectrum& pred, const Spectrum& target,
                                    const std::vector<double>& tracked) {
  if (pred.grid.n != target.grid.n || pred.grid.a != target.grid.a || pred.grid.b != target.grid.b)
    throw ConfigError("frequency_error requires spectra on the same grid");
  std::vector<double> errors;
  errors.reserve(tracked.size());
  for (double k : tracked) {
    int m = target.bin_of(k);
    double denom = std::abs(target.coeffs[m]);
    if (denom == 0.0)
      throw ConfigError("untrackable frequency: target coefficient vanishes at k=" +
                        std::to_string(k));
    errors.push_back(std::abs(pred.coeffs[m] - target.coeffs[m]) / denom);
  }
  return errors;
}

std::vector<double> frequency_error_magnitude(const Spectrum& pred, const Spectrum& target,
                                              const std::vector<double>& tracked) {
  std::vector<double> errors;
  errors.reserve(tracked.size());
  for (double k : tracked) {
    int m = target.bin_of(k);
    double denom = std::abs(target.coeffs[m]);
    if (denom == 0.0)
      throw ConfigError("untrackable frequency: target coefficient vanishes at k=" +
                        std::to_string(k));
    errors.push_back(std::abs(std::abs(pred.coeffs[m]) - denom) / denom);
  }
  return errors;
}

ConvergenceHeatmap track_convergence(const TrainTrace& trace, const Spectrum& target,
                                     const GridSpec& grid, const std::vector<double>& tracked) {
  if (trace.snapshots.empty())
    throw ConfigError("track_convergence requires a training run with snapshots");
  SpectrumTracker tracker(target, grid, tracked);
  for (const auto& [epoch, params] : trace.snapshots) tracker.observe(epoch, params);
  return tracker.heatmap();
}

SpectrumTracker::SpectrumTracker(Spectrum target, GridSpec grid, std::vector<double> tracked)
    : target_(std::move(target)), grid_(grid), tracked_(std::move(tracked)) {}

bool SpectrumTracker::observe(long epoch, const NetworkParams& params) {
  Spectrum s = network_spectrum(params, grid_);
  epochs_.push_back(epoch);
  rows_.push_back(frequency_error(s, target_, tracked_));
  mag_rows_.push_back(frequency_error_magnitude(s, target_, tracked_));
  return true;
}

ConvergenceHeatmap SpectrumTracker::heatmap() const {
  ConvergenceHeatmap h;
  h.tracked_freqs = tracked_;
  h.epochs = epochs_;
  h.errors.resize(static_cast<Eigen::Index>(rows_.size()),
                  static_cast<Eigen::Index>(tracked_.size()));
  h.mag_errors.resizeLike(h.errors);
  for (size_t r = 0; r < rows_.size(); ++r)
    for (size_t c = 0; c < tracked_.size(); ++c) {
      h.errors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows_[r][c];
      h.mag_errors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = mag_rows_[r][c];
    }
  return h;
}

std::vector<std::optional<long>> convergence_epochs(const ConvergenceHeatmap& heatmap,
                                                    double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("convergence threshold must be positive");
  const Eigen::Index rows = heatmap.errors.rows();
  const Eigen::Index cols = heatmap.errors.cols();
  std::vector<std::optional<long>> out(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    // Suffix criterion: the error must stay below threshold from that row on.
    std::optional<long> first;
    for (Eigen::Index r = rows - 1; r >= 0; --r) {
      if (heatmap.errors(r, c) < threshold)
        first = heatmap.epochs[static_cast<size_t>(r)];
      else
        break;
    }
    out[static_cast<size_t>(c)] = first;
  }
  return out;
}

SecondDerivativeBound second_derivative_bound_check(const Eigen::VectorXd& samples,
                                                    const GridSpec& grid) {
  grid.validate();
  if (samples.size() != grid.n) throw ShapeError("sample count does not match the grid");
  const double delta = grid.spacing();
  double lhs = 0.0;
  for (int j = 1; j + 1 < grid.n; ++j) {
    double dd = (samples[j - 1] - 2.0 * samples[j] + samples[j + 1]) / (delta * delta);
    lhs = std::max(lhs, std::abs(dd));
  }
  Spectrum s = dft(samples, grid);
  const int half = grid.n / 2;
  double rhs = 0.0;
  for (int m = 0; m <= half; ++m) {
    double k2 = s.freqs[m] * s.freqs[m];
    double term = k2 * std::abs(s.coeffs[m]);
    bool shared = (m == 0) || (grid.n % 2 == 0 && m == half);
    rhs += shared ? term : 2.0 * term;
  }
  rhs *= 4.0 * M_PI * M_PI / grid.length();
  return {lhs, rhs, lhs <= rhs * (1.0 + 1e-6)};
}

SecondDerivativeBound second_derivative_bound_check(const NetworkParams& params,
                                                    const GridSpec& grid) {
  Eigen::VectorXd xs = grid.points();
  Eigen::MatrixXd X(xs.size(), 1);
  X.col(0) = xs;
  Eigen::VectorXd samples = forward(params, X).col(0);
  return second_derivative_bound_check(samples, grid);
}

GradientHistogram input_gradient_histogram(const NetworkParams& params, const Dataset& data,
                                           int n_bins) {
  if (params.arch.input_dim != 1) throw ShapeError("gradient histogram requires 1-D inputs");
  if (n_bins < 1) throw ConfigError("histogram requires n_bins >= 1");
  Eigen::VectorXd grads = input_gradient_batch(params, data.xs).col(0);
  GradientHistogram h;
  h.min = grads.minCoeff();
  h.max = grads.maxCoeff();
  h.range = h.max - h.min;
  double width = h.range > 0.0 ? h.range : 1.0;
  h.edges.resize(n_bins + 1);
  for (int i = 0; i <= n_bins; ++i) h.edges[i] = h.min + width * i / n_bins;
  h.counts.assign(n_bins, 0);
  for (Eigen::Index i = 0; i < grads.size(); ++i) {
    int bin = static_cast<int>((grads[i] - h.min) / width * n_bins);
    bin = std::clamp(bin, 0, n_bins - 1);
    ++h.counts[static_cast<size_t>(bin)];
  }
  return h;
}

}  // namespace speclab
