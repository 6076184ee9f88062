#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "core/common.hpp"

namespace speclab {

/// One sinusoidal term: amplitude * sin(2*pi*frequency*x + phase).
/// Frequencies are in cycles per unit input throughout the project.
struct Tone {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
};

struct SignalSpec {
  std::vector<Tone> terms;
  double dc = 0.0;

  double eval(double x) const;
  double max_frequency() const;
  void validate() const;
};

struct SamplingSpec {
  enum class Mode { kCount, kStep };

  double a = -4.0;
  double b = 4.0;
  Mode mode = Mode::kCount;
  int count = 8;         // kCount: a + i*(b-a)/(count-1)
  double step = 1.0;     // kStep: a + offset, a + offset + step, ... <= b
  double offset = 0.0;
  double noise_std = 0.0;

  std::vector<double> points() const;
  void validate() const;
};

struct Dataset {
  Eigen::MatrixXd xs;  // n x input_dim
  Eigen::MatrixXd ys;  // n x output_dim

  int size() const { return static_cast<int>(xs.rows()); }
  void validate() const;
};

enum class RandomLabelKind { kMseNoise, kBinary, kMulticlass };

double eval_signal(const SignalSpec& spec, double x);
Eigen::VectorXd eval_signal(const SignalSpec& spec, const Eigen::VectorXd& xs);

/// Equidistant samples of the signal, plus optional i.i.d. normal noise on ys.
Dataset sample_dataset(const SignalSpec& spec, const SamplingSpec& sampling, std::uint64_t seed);

/// a1*sin(2*pi*w1*x) + a2*sin(2*pi*w2*x) with w ~ U(0.01, 1) and a ~ U(1, 10).
SignalSpec random_two_tone_signal(std::uint64_t seed);

/// 1/(2*spacing) for equidistant sampling; rejects irregular designs.
double nyquist_frequency(const SamplingSpec& sampling);
double nyquist_frequency(const Eigen::VectorXd& xs);

/// Equidistant xs on [a, b] with labels drawn per kind from one normal sample
/// per point: raw draws (mse_noise), 0/1 threshold at zero (binary), or
/// quantile-binned one-hot rows (multiclass).
Dataset random_label_dataset(int n_points, RandomLabelKind kind, int n_bins, double a, double b,
                             std::uint64_t seed);

}  // namespace speclab
