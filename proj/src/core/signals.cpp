#include "core/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/rng.hpp"

namespace speclab {

double SignalSpec::eval(double x) const {
  double y = dc;
  for (const Tone& t : terms) y += t.amplitude * std::sin(2.0 * M_PI * t.frequency * x + t.phase);
  return y;
}

double SignalSpec::max_frequency() const {
  double k = 0.0;
  for (const Tone& t : terms) k = std::max(k, t.frequency);
  return k;
}

void SignalSpec::validate() const {
  for (const Tone& t : terms)
    if (t.frequency < 0.0) throw ConfigError("signal term frequencies must be nonnegative");
}

std::vector<double> SamplingSpec::points() const {
  validate();
  std::vector<double> xs;
  if (mode == Mode::kCount) {
    for (int i = 0; i < count; ++i) xs.push_back(a + i * (b - a) / (count - 1));
  } else {
    // Indexed form avoids accumulation drift; slack keeps b-aligned endpoints.
    for (int i = 0;; ++i) {
      double x = a + offset + i * step;
      if (x > b + 1e-9 * step) break;
      xs.push_back(x);
    }
    if (xs.size() < 2) throw ConfigError("step sampling produced fewer than 2 points");
  }
  return xs;
}

void SamplingSpec::validate() const {
  if (!(b > a)) throw ConfigError("sampling domain requires b > a");
  if (mode == Mode::kCount && count < 2) throw ConfigError("sampling count must be >= 2");
  if (mode == Mode::kStep && !(step > 0.0)) throw ConfigError("sampling step must be positive");
  if (noise_std < 0.0) throw ConfigError("noise_std must be nonnegative");
}

void Dataset::validate() const {
  if (xs.rows() < 1 || xs.rows() != ys.rows())
    throw ShapeError("dataset requires matching, nonempty xs and ys");
  if (!xs.allFinite() || !ys.allFinite()) throw NumericalDivergence("dataset holds non-finite values");
}

double eval_signal(const SignalSpec& spec, double x) { return spec.eval(x); }

Eigen::VectorXd eval_signal(const SignalSpec& spec, const Eigen::VectorXd& xs) {
  Eigen::VectorXd ys(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) ys[i] = spec.eval(xs[i]);
  return ys;
}

Dataset sample_dataset(const SignalSpec& spec, const SamplingSpec& sampling, std::uint64_t seed) {
  spec.validate();
  std::vector<double> pts = sampling.points();
  Dataset d;
  d.xs.resize(static_cast<Eigen::Index>(pts.size()), 1);
  d.ys.resize(static_cast<Eigen::Index>(pts.size()), 1);
  Rng rng = Rng(seed).stream(0x5161 /* "signal" noise stream */);
  for (size_t i = 0; i < pts.size(); ++i) {
    d.xs(static_cast<Eigen::Index>(i), 0) = pts[i];
    double y = spec.eval(pts[i]);
    if (sampling.noise_std > 0.0) y += sampling.noise_std * rng.normal();
    d.ys(static_cast<Eigen::Index>(i), 0) = y;
  }
  return d;
}

SignalSpec random_two_tone_signal(std::uint64_t seed) {
  Rng rng = Rng(seed).stream(0x2707 /* two-tone stream */);
  double w1 = rng.uniform(0.01, 1.0);
  double w2 = rng.uniform(0.01, 1.0);
  double a1 = rng.uniform(1.0, 10.0);
  double a2 = rng.uniform(1.0, 10.0);
  SignalSpec s;
  s.terms = {{a1, w1, 0.0}, {a2, w2, 0.0}};
  return s;
}

double nyquist_frequency(const SamplingSpec& sampling) {
  std::vector<double> pts = sampling.points();
  Eigen::VectorXd xs = Eigen::Map<Eigen::VectorXd>(pts.data(), static_cast<Eigen::Index>(pts.size()));
  return nyquist_frequency(xs);
}

double nyquist_frequency(const Eigen::VectorXd& xs) {
  if (xs.size() < 2) throw ConfigError("nyquist_frequency requires >= 2 points");
  double h = xs[1] - xs[0];
  for (Eigen::Index i = 1; i + 1 < xs.size(); ++i) {
    double hi = xs[i + 1] - xs[i];
    if (std::abs(hi - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw ConfigError("nyquist_frequency requires equidistant samples");
  }
  if (!(h > 0.0)) throw ConfigError("sample spacing must be positive");
  return 1.0 / (2.0 * h);
}

Dataset random_label_dataset(int n_points, RandomLabelKind kind, int n_bins, double a, double b,
                             std::uint64_t seed) {
  if (n_points < 2) throw ConfigError("random_label_dataset requires n_points >= 2");
  if (kind == RandomLabelKind::kMulticlass && n_bins < 2)
    throw ConfigError("multiclass labels require n_bins >= 2");

  Rng rng = Rng(seed).stream(0x1ABE1 /* label stream */);
  std::vector<double> draws(n_points);
  for (double& v : draws) v = rng.normal();

  Dataset d;
  d.xs.resize(n_points, 1);
  for (int i = 0; i < n_points; ++i) d.xs(i, 0) = a + i * (b - a) / (n_points - 1);

  switch (kind) {
    case RandomLabelKind::kMseNoise: {
      d.ys.resize(n_points, 1);
      for (int i = 0; i < n_points; ++i) d.ys(i, 0) = draws[i];
      break;
    }
    case RandomLabelKind::kBinary: {
      d.ys.resize(n_points, 1);
      for (int i = 0; i < n_points; ++i) d.ys(i, 0) = draws[i] > 0.0 ? 1.0 : 0.0;
      break;
    }
    case RandomLabelKind::kMulticlass: {
      // Quantile binning by rank: equal-occupancy bins when n_bins divides n.
      std::vector<int> order(n_points);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int i, int j) { return draws[i] < draws[j]; });
      d.ys = Eigen::MatrixXd::Zero(n_points, n_bins);
      for (int rank = 0; rank < n_points; ++rank) {
        int bin = std::min(n_bins - 1, rank * n_bins / n_points);
        d.ys(order[rank], bin) = 1.0;
      }
      break;
    }
  }
  return d;
}

}  // namespace speclab
