#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "core/net.hpp"
#include "core/signals.hpp"
#include "core/spectrum.hpp"
#include "core/train.hpp"

namespace speclab {

/// K(theta, x, x') = D_theta g(x) . D_theta g(x'), evaluated exactly.
struct TangentKernelMatrix {
  Eigen::VectorXd xs_rows;
  Eigen::VectorXd xs_cols;
  Eigen::MatrixXd values;
};

TangentKernelMatrix tangent_kernel(const NetworkParams& params, const Eigen::VectorXd& xs_rows,
                                   const Eigen::VectorXd& xs_cols);

/// d/dt F[g](xi) under gradient flow, per angular frequency xi = 2*pi*k.
struct FourierVelocity {
  std::vector<double> xi;
  Eigen::VectorXcd values;
};

/// Evaluates the flow-side integral over K on the quadrature grid (the
/// integrand is zero outside K):
///   dF/dt(xi) = -(1/n) sum_i integral exp(-i*x*xi) K(x, x_i) c'(g(x_i), y_i) dx.
/// The quadrature weights each grid point by the spacing, so at bin
/// frequencies the result coincides with dft of the pointwise velocity.
FourierVelocity fourier_velocity(const NetworkParams& params, const Dataset& data, LossKind loss,
                                 const std::vector<double>& xi_grid, const GridSpec& quad);

/// Angular frequencies of all one-sided grid bins: 2*pi*m/(b-a).
std::vector<double> bin_angular_frequencies(const GridSpec& grid, double k_max = -1.0);

/// Pointwise function-space velocity on the quadrature grid (test hook for
/// the dft equivalence of the two evolution-equation forms).
Eigen::VectorXd function_space_velocity(const NetworkParams& params, const Dataset& data,
                                        LossKind loss, const GridSpec& quad);

struct DecayProfile {
  double low_mean = 0.0;   // bottom decile of |xi|
  double mid_mean = 0.0;   // middle decile
  double high_mean = 0.0;  // top decile
  double ratio_high_low = 0.0;
};

/// Riemann-Lebesgue check: declared confirmed when ratio_high_low < 0.1.
DecayProfile decay_profile(const FourierVelocity& fv);

struct FlowConsistencyReport {
  double lr = 0.0;
  double rel_error_low_band = 0.0;  // bins with k <= 4x the data Nyquist
  double rel_error_overall = 0.0;
  double decay_ratio = 0.0;
  double low_band_k_max = 0.0;
};

/// Compares lr * fourier_velocity against the realized spectrum change of one
/// full-batch GD step, as complex vectors over shared bins.
FlowConsistencyReport flow_consistency_check(const NetworkParams& params, const Dataset& data,
                                             LossKind loss, double lr, const GridSpec& grid);

}  // namespace speclab
