#include "core/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace speclab {

using cd = std::complex<double>;

TangentKernelMatrix tangent_kernel(const NetworkParams& params, const Eigen::VectorXd& xs_rows,
                                   const Eigen::VectorXd& xs_cols) {
  if (params.arch.output_dim != 1)
    throw ShapeError("tangent_kernel requires a scalar output network");
  Eigen::MatrixXd Xr(xs_rows.size(), 1), Xc(xs_cols.size(), 1);
  Xr.col(0) = xs_rows;
  Xc.col(0) = xs_cols;
  Eigen::MatrixXd Jr = param_jacobian(params, Xr);
  TangentKernelMatrix K;
  K.xs_rows = xs_rows;
  K.xs_cols = xs_cols;
  if (xs_rows.size() == xs_cols.size() && xs_rows == xs_cols) {
    K.values.noalias() = Jr * Jr.transpose();
  } else {
    Eigen::MatrixXd Jc = param_jacobian(params, Xc);
    K.values.noalias() = Jr * Jc.transpose();
  }
  return K;
}

namespace {

// Per-point cost derivatives c'(g(x_i), y_i), without the 1/n factor.
Eigen::VectorXd cost_derivatives(const NetworkParams& params, const Dataset& data,
                                 LossKind loss) {
  Eigen::MatrixXd outputs = forward(params, data.xs);
  auto [value, cot] = loss_and_output_cotangent(outputs, data.ys, loss);
  (void)value;
  if (cot.cols() != 1) throw ShapeError("flow analysis requires scalar outputs");
  return cot.col(0) * static_cast<double>(data.size());
}

}  // namespace

Eigen::VectorXd function_space_velocity(const NetworkParams& params, const Dataset& data,
                                        LossKind loss, const GridSpec& quad) {
  if (params.arch.input_dim != 1 || params.arch.output_dim != 1)
    throw ShapeError("flow analysis requires a scalar 1-D network");
  for (Eigen::Index i = 0; i < data.xs.rows(); ++i) {
    double x = data.xs(i, 0);
    if (x < quad.a - 1e-12 || x > quad.b + 1e-12)
      throw ConfigError("dataset point outside the compact quadrature domain K");
  }
  TangentKernelMatrix K = tangent_kernel(params, quad.points(), data.xs.col(0));
  Eigen::VectorXd dc = cost_derivatives(params, data, loss);
  return -(K.values * dc) / static_cast<double>(data.size());
}

FourierVelocity fourier_velocity(const NetworkParams& params, const Dataset& data, LossKind loss,
                                 const std::vector<double>& xi_grid, const GridSpec& quad) {
  Eigen::VectorXd v = function_space_velocity(params, data, loss, quad);
  Eigen::VectorXd xs = quad.points();
  const double delta = quad.spacing();
  FourierVelocity fv;
  fv.xi = xi_grid;
  fv.values.resize(static_cast<Eigen::Index>(xi_grid.size()));
  for (size_t q = 0; q < xi_grid.size(); ++q) {
    double xi = xi_grid[q];
    cd acc(0.0);
    for (Eigen::Index m = 0; m < xs.size(); ++m) {
      double angle = -xi * xs[m];
      acc += v[m] * cd(std::cos(angle), std::sin(angle));
    }
    fv.values[static_cast<Eigen::Index>(q)] = acc * delta;
  }
  return fv;
}

std::vector<double> bin_angular_frequencies(const GridSpec& grid, double k_max) {
  std::vector<double> xi;
  int half = grid.n / 2;
  for (int m = 0; m <= half; ++m) {
    double k = m / grid.length();
    if (k_max >= 0.0 && k > k_max + 1e-12) break;
    xi.push_back(2.0 * M_PI * k);
  }
  return xi;
}

DecayProfile decay_profile(const FourierVelocity& fv) {
  const size_t n = fv.xi.size();
  if (n < 10) throw ConfigError("decay_profile needs at least 10 frequencies");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t i, size_t j) { return std::abs(fv.xi[i]) < std::abs(fv.xi[j]); });
  size_t decile = std::max<size_t>(1, n / 10);
  auto band_mean = [&](size_t begin, size_t count) {
    double acc = 0.0;
    for (size_t i = begin; i < begin + count; ++i)
      acc += std::abs(fv.values[static_cast<Eigen::Index>(order[i])]);
    return acc / count;
  };
  DecayProfile p;
  p.low_mean = band_mean(0, decile);
  p.mid_mean = band_mean(n / 2 - decile / 2, decile);
  p.high_mean = band_mean(n - decile, decile);
  p.ratio_high_low = (p.low_mean > 0.0) ? p.high_mean / p.low_mean : 0.0;
  return p;
}

FlowConsistencyReport flow_consistency_check(const NetworkParams& params, const Dataset& data,
                                             LossKind loss, double lr, const GridSpec& grid) {
  if (!(lr > 0.0) || lr > 1e-3)
    throw ConfigError("flow_consistency_check expects 0 < lr <= 1e-3");

  Spectrum before = network_spectrum(params, grid);

  // One full-batch GD step on the mean loss, matching the train module.
  LossValueAndGrad g = loss_value_and_grad(params, data, loss);
  Eigen::VectorXd theta = params.flatten() - lr * g.grad;
  NetworkParams stepped = NetworkParams::unflatten(params.arch, theta);
  Spectrum after = network_spectrum(stepped, grid);

  std::vector<double> xi = bin_angular_frequencies(grid);
  FourierVelocity fv = fourier_velocity(params, data, loss, xi, grid);

  Eigen::VectorXcd realized = after.coeffs - before.coeffs;
  Eigen::VectorXcd predicted = lr * fv.values;

  double data_nyquist = nyquist_frequency(Eigen::VectorXd(data.xs.col(0)));
  double low_k = 4.0 * data_nyquist;

  auto rel_error = [&](double k_cap) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index m = 0; m < realized.size(); ++m) {
      double k = before.freqs[static_cast<size_t>(m)];
      if (k_cap >= 0.0 && k > k_cap + 1e-12) break;
      num += std::norm(realized[m] - predicted[m]);
      den += std::norm(predicted[m]);
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
  };

  FlowConsistencyReport report;
  report.lr = lr;
  report.rel_error_low_band = rel_error(low_k);
  report.rel_error_overall = rel_error(-1.0);
  report.decay_ratio = decay_profile(fv).ratio_high_low;
  report.low_band_k_max = low_k;
  return report;
}

}  // namespace speclab
