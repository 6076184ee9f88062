#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "core/net.hpp"
#include "core/signals.hpp"
#include "core/train.hpp"

namespace speclab {

using LinearOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Hessian-vector product by central differences of the loss gradient, with
/// u = v/|v| and eps = 1e-3*(1 + |theta|); exact to O(eps^2) for smooth losses.
Eigen::VectorXd hvp(const NetworkParams& params, const Dataset& data, LossKind loss,
                    const Eigen::VectorXd& v);

/// The same product as a reusable operator (captures copies of its inputs).
LinearOp make_hvp_operator(const NetworkParams& params, const Dataset& data, LossKind loss);

/// Column-by-column Hessian via hvp, symmetrized as (H + H^T)/2. Guarded to
/// P <= 5000; oracle-grade only.
Eigen::MatrixXd dense_hessian(const NetworkParams& params, const Dataset& data, LossKind loss);

struct TraceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int n_probes = 0;
};

/// Hutchinson estimator: mean of z^T H z over Rademacher probes z.
TraceEstimate hutchinson_trace(const LinearOp& op, int P, int n_probes, std::uint64_t seed);

struct SpectralNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration; converged when the relative Rayleigh-quotient change
/// drops below tol. For symmetric H, |Rayleigh quotient| at termination is
/// the largest-magnitude eigenvalue, i.e. the spectral norm.
SpectralNormResult spectral_norm(const LinearOp& op, int P, int max_iters, double tol,
                                 std::uint64_t seed);

struct EigenPairResult {
  double value = 0.0;
  Eigen::VectorXd vector;
  bool converged = false;
  int iterations = 0;
};

/// Deflated power iteration: each round projects out previously found
/// eigenvectors. Pairs come out ordered by descending |eigenvalue|.
std::vector<EigenPairResult> top_eigenpairs(const LinearOp& op, int P, int count, int max_iters,
                                            double tol, std::uint64_t seed);

struct FlatnessConfig {
  int n_probes = 1024;
  int power_max_iters = 1000;
  double power_tol = 1e-6;
  int top_k = 2;
  std::uint64_t seed = 0;
};

struct FlatnessReport {
  double trace_estimate = 0.0;
  double trace_std_error = 0.0;
  double expected_eigenvalue = 0.0;  // trace / P
  double spectral_norm = 0.0;
  std::vector<double> top_eigenvalues;
  std::int64_t param_count = 0;
  int dataset_size = 0;
  int n_probes = 0;
  int n_power_iters = 0;
  bool spectral_converged = false;
  double loss_at_params = 0.0;
  bool not_at_minimum_warning = false;
};

/// Assembles all flatness metrics at the given parameters. Warns (does not
/// fail) when the training loss sits above loss_tol.
FlatnessReport flatness_report(const NetworkParams& params, const Dataset& data, LossKind loss,
                               const FlatnessConfig& config, double loss_tol = 1e-3);

/// Top eigenvectors alongside the report, for landscape directions.
FlatnessReport flatness_report(const NetworkParams& params, const Dataset& data, LossKind loss,
                               const FlatnessConfig& config, double loss_tol,
                               std::vector<Eigen::VectorXd>* top_vectors);

struct LandscapeSlice {
  Eigen::VectorXd alphas;
  Eigen::VectorXd betas;
  Eigen::MatrixXd losses;  // alphas.size() x betas.size()
  Eigen::VectorXd v1, v2;  // orthonormal directions actually used
  double extent = 0.0;
  int shrink_count = 0;
};

/// L(theta* + alpha v1 + beta v2) on a symmetric grid. The extent halves (up
/// to 10 times) until the maximum loss on the slice is within 10x the center.
LandscapeSlice landscape_slice(const NetworkParams& params, const Dataset& data, LossKind loss,
                               const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                               double extent, int resolution);

}  // namespace speclab
