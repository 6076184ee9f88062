#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace speclab {

enum class Activation { kReLU, kGaussian, kSinusoid, kIdentity };

/// Hidden-layer nonlinearity. The output layer is always affine.
struct ActivationKind {
  Activation kind = Activation::kReLU;
  double gaussian_width = 0.1;  // s in exp(-z^2 / (2 s^2))
  double omega0 = 30.0;         // radians per unit pre-activation

  static ActivationKind relu() { return {Activation::kReLU}; }
  static ActivationKind gaussian(double s) { return {Activation::kGaussian, s}; }
  static ActivationKind sinusoid(double w0) { return {Activation::kSinusoid, 0.1, w0}; }
  static ActivationKind identity() { return {Activation::kIdentity}; }

  double apply(double z) const;
  /// Pointwise derivative; the ReLU subgradient at z == 0 is fixed to 0.
  double derivative(double z) const;

  void apply_inplace(Eigen::MatrixXd& z) const;
  Eigen::MatrixXd derivative_of(const Eigen::MatrixXd& z) const;

  std::string name() const;
  void validate() const;
};

struct Architecture {
  int input_dim = 1;
  std::vector<int> hidden_widths;
  int output_dim = 1;
  ActivationKind activation;

  /// Number of affine layers = hidden count + 1.
  int num_layers() const { return static_cast<int>(hidden_widths.size()) + 1; }
  /// (fan_out, fan_in) of affine layer l.
  std::pair<int, int> layer_shape(int l) const;
  std::int64_t param_count() const;
  void validate() const;
};

/// All weights and biases of a fully-connected network. Weight matrices are
/// fan_out x fan_in. The flat layout is layer-major: for each layer, weight
/// entries in row-major order followed by the bias; it depends only on the
/// architecture.
struct NetworkParams {
  Architecture arch;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static NetworkParams zeros(const Architecture& arch);

  Eigen::VectorXd flatten() const;
  static NetworkParams unflatten(const Architecture& arch, const Eigen::VectorXd& flat);

  std::int64_t param_count() const { return arch.param_count(); }
  void validate() const;
};

/// Structured gradient with the same shapes as NetworkParams.
struct ParamGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static ParamGradients zeros(const Architecture& arch);
  Eigen::VectorXd flatten(const Architecture& arch) const;
  void axpy_into(NetworkParams& params, double scale) const;  // params += scale * grads
};

/// Pre-activations and activations of every layer for a batch; as[0] is the input.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> zs;  // per affine layer, n x fan_out
  std::vector<Eigen::MatrixXd> as;  // as[l] feeds layer l; as.back() is the output
};

/// Batched evaluation; X is n x input_dim, result is n x output_dim.
Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& X);
Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& x);
/// Scalar-output convenience for 1-D inputs.
double forward1d(const NetworkParams& params, double x);

ForwardTrace forward_trace(const NetworkParams& params, const Eigen::MatrixXd& X);

/// Gradient of sum_i cotangent(i,:) . f(x_i) with respect to every parameter.
ParamGradients backprop(const NetworkParams& params, const ForwardTrace& trace,
                        const Eigen::MatrixXd& cotangent);

/// Exact gradient of the scalar output with respect to every parameter, in
/// flat layout. Requires output_dim == 1.
Eigen::VectorXd param_gradient(const NetworkParams& params, const Eigen::VectorXd& x);

/// Per-sample parameter gradients: row i is param_gradient at X.row(i).
/// Requires output_dim == 1.
Eigen::MatrixXd param_jacobian(const NetworkParams& params, const Eigen::MatrixXd& X);

/// Gradient of the mean over output components with respect to the input.
Eigen::VectorXd input_gradient(const NetworkParams& params, const Eigen::VectorXd& x);
/// Batched version; row i is input_gradient at X.row(i).
Eigen::MatrixXd input_gradient_batch(const NetworkParams& params, const Eigen::MatrixXd& X);

}  // namespace speclab
