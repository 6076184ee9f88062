#include "core/net.hpp"

#include <cmath>

namespace speclab {

double ActivationKind::apply(double z) const {
  switch (kind) {
    case Activation::kReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::kGaussian:
      return std::exp(-z * z / (2.0 * gaussian_width * gaussian_width));
    case Activation::kSinusoid:
      return std::sin(omega0 * z);
    case Activation::kIdentity:
      return z;
  }
  return z;
}

double ActivationKind::derivative(double z) const {
  switch (kind) {
    case Activation::kReLU:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kGaussian: {
      double s2 = gaussian_width * gaussian_width;
      return -z / s2 * std::exp(-z * z / (2.0 * s2));
    }
    case Activation::kSinusoid:
      return omega0 * std::cos(omega0 * z);
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

void ActivationKind::apply_inplace(Eigen::MatrixXd& z) const {
  switch (kind) {
    case Activation::kReLU:
      z = z.cwiseMax(0.0);
      return;
    case Activation::kGaussian: {
      double inv = 1.0 / (2.0 * gaussian_width * gaussian_width);
      z = (-z.array().square() * inv).exp().matrix();
      return;
    }
    case Activation::kSinusoid:
      z = (z.array() * omega0).sin().matrix();
      return;
    case Activation::kIdentity:
      return;
  }
}

Eigen::MatrixXd ActivationKind::derivative_of(const Eigen::MatrixXd& z) const {
  switch (kind) {
    case Activation::kReLU:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kGaussian: {
      double s2 = gaussian_width * gaussian_width;
      return (-z.array() / s2 * (-z.array().square() / (2.0 * s2)).exp()).matrix();
    }
    case Activation::kSinusoid:
      return (omega0 * (omega0 * z.array()).cos()).matrix();
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

std::string ActivationKind::name() const {
  switch (kind) {
    case Activation::kReLU:
      return "relu";
    case Activation::kGaussian:
      return "gaussian";
    case Activation::kSinusoid:
      return "sinusoid";
    case Activation::kIdentity:
      return "identity";
  }
  return "?";
}

void ActivationKind::validate() const {
  if (kind == Activation::kGaussian && !(gaussian_width > 0.0))
    throw ConfigError("gaussian activation width must be positive");
  if (kind == Activation::kSinusoid && !(omega0 > 0.0))
    throw ConfigError("sinusoid omega0 must be positive");
}

std::pair<int, int> Architecture::layer_shape(int l) const {
  int layers = num_layers();
  if (l < 0 || l >= layers) throw ShapeError("layer index out of range");
  int fan_in = (l == 0) ? input_dim : hidden_widths[l - 1];
  int fan_out = (l == layers - 1) ? output_dim : hidden_widths[l];
  return {fan_out, fan_in};
}

std::int64_t Architecture::param_count() const {
  std::int64_t p = 0;
  for (int l = 0; l < num_layers(); ++l) {
    auto [out, in] = layer_shape(l);
    p += static_cast<std::int64_t>(out) * in + out;
  }
  return p;
}

void Architecture::validate() const {
  if (input_dim < 1 || output_dim < 1)
    throw ShapeError("architecture dimensions must be positive");
  for (int w : hidden_widths)
    if (w < 1) throw ShapeError("hidden widths must be positive");
  activation.validate();
}

NetworkParams NetworkParams::zeros(const Architecture& arch) {
  arch.validate();
  NetworkParams p;
  p.arch = arch;
  for (int l = 0; l < arch.num_layers(); ++l) {
    auto [out, in] = arch.layer_shape(l);
    p.weights.push_back(Eigen::MatrixXd::Zero(out, in));
    p.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return p;
}

Eigen::VectorXd NetworkParams::flatten() const {
  Eigen::VectorXd flat(param_count());
  std::int64_t off = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    const auto& W = weights[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) flat[off++] = W(r, c);
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat[off++] = biases[l][r];
  }
  return flat;
}

NetworkParams NetworkParams::unflatten(const Architecture& arch, const Eigen::VectorXd& flat) {
  if (flat.size() != arch.param_count())
    throw ShapeError("flat parameter vector has wrong length");
  NetworkParams p = zeros(arch);
  std::int64_t off = 0;
  for (int l = 0; l < arch.num_layers(); ++l) {
    auto& W = p.weights[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = flat[off++];
    for (Eigen::Index r = 0; r < p.biases[l].size(); ++r) p.biases[l][r] = flat[off++];
  }
  return p;
}

void NetworkParams::validate() const {
  arch.validate();
  if (static_cast<int>(weights.size()) != arch.num_layers() || weights.size() != biases.size())
    throw ShapeError("parameter list does not match architecture layer count");
  for (int l = 0; l < arch.num_layers(); ++l) {
    auto [out, in] = arch.layer_shape(l);
    if (weights[l].rows() != out || weights[l].cols() != in || biases[l].size() != out)
      throw ShapeError("layer " + std::to_string(l) + " has mismatched shape");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw NumericalDivergence("layer " + std::to_string(l) + " holds non-finite parameters");
  }
}

ParamGradients ParamGradients::zeros(const Architecture& arch) {
  ParamGradients g;
  for (int l = 0; l < arch.num_layers(); ++l) {
    auto [out, in] = arch.layer_shape(l);
    g.weights.push_back(Eigen::MatrixXd::Zero(out, in));
    g.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return g;
}

Eigen::VectorXd ParamGradients::flatten(const Architecture& arch) const {
  Eigen::VectorXd flat(arch.param_count());
  std::int64_t off = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    const auto& W = weights[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) flat[off++] = W(r, c);
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat[off++] = biases[l][r];
  }
  return flat;
}

void ParamGradients::axpy_into(NetworkParams& params, double scale) const {
  for (size_t l = 0; l < weights.size(); ++l) {
    params.weights[l].noalias() += scale * weights[l];
    params.biases[l].noalias() += scale * biases[l];
  }
}

ForwardTrace forward_trace(const NetworkParams& params, const Eigen::MatrixXd& X) {
  if (X.cols() != params.arch.input_dim)
    throw ShapeError("input has " + std::to_string(X.cols()) + " columns, layer 0 expects " +
                     std::to_string(params.arch.input_dim));
  ForwardTrace t;
  int layers = params.arch.num_layers();
  t.zs.reserve(layers);
  t.as.reserve(layers + 1);
  t.as.push_back(X);
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = t.as.back() * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    t.zs.push_back(z);
    if (l + 1 < layers) params.arch.activation.apply_inplace(z);
    t.as.push_back(std::move(z));
  }
  return t;
}

Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& X) {
  if (X.cols() != params.arch.input_dim)
    throw ShapeError("input has " + std::to_string(X.cols()) + " columns, layer 0 expects " +
                     std::to_string(params.arch.input_dim));
  int layers = params.arch.num_layers();
  Eigen::MatrixXd a = X;
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = a * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    if (l + 1 < layers) params.arch.activation.apply_inplace(z);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& x) {
  Eigen::MatrixXd out = forward(params, Eigen::MatrixXd(x.transpose()));
  return out.row(0).transpose();
}

double forward1d(const NetworkParams& params, double x) {
  Eigen::VectorXd xv(1);
  xv[0] = x;
  return forward(params, xv)[0];
}

ParamGradients backprop(const NetworkParams& params, const ForwardTrace& trace,
                        const Eigen::MatrixXd& cotangent) {
  int layers = params.arch.num_layers();
  if (cotangent.rows() != trace.as[0].rows() || cotangent.cols() != params.arch.output_dim)
    throw ShapeError("cotangent shape does not match network output");
  ParamGradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  Eigen::MatrixXd delta = cotangent;  // d(objective)/d z_l, starting at the output layer
  for (int l = layers - 1; l >= 0; --l) {
    g.weights[l].noalias() = delta.transpose() * trace.as[l];
    g.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * params.weights[l]).cwiseProduct(
          params.arch.activation.derivative_of(trace.zs[l - 1]));
    }
  }
  return g;
}

Eigen::VectorXd param_gradient(const NetworkParams& params, const Eigen::VectorXd& x) {
  if (params.arch.output_dim != 1)
    throw ShapeError("param_gradient requires a scalar output network");
  ForwardTrace t = forward_trace(params, Eigen::MatrixXd(x.transpose()));
  return backprop(params, t, Eigen::MatrixXd::Ones(1, 1)).flatten(params.arch);
}

Eigen::MatrixXd param_jacobian(const NetworkParams& params, const Eigen::MatrixXd& X) {
  if (params.arch.output_dim != 1)
    throw ShapeError("param_jacobian requires a scalar output network");
  const int layers = params.arch.num_layers();
  const Eigen::Index n = X.rows();
  ForwardTrace t = forward_trace(params, X);

  // Per-layer deltas for the scalar output, all samples at once.
  std::vector<Eigen::MatrixXd> deltas(layers);
  deltas[layers - 1] = Eigen::MatrixXd::Ones(n, 1);
  for (int l = layers - 1; l > 0; --l) {
    deltas[l - 1] = (deltas[l] * params.weights[l])
                        .cwiseProduct(params.arch.activation.derivative_of(t.zs[l - 1]));
  }

  Eigen::MatrixXd J(n, params.param_count());
  std::int64_t off = 0;
  for (int l = 0; l < layers; ++l) {
    auto [out, in] = params.arch.layer_shape(l);
    const Eigen::MatrixXd& d = deltas[l];
    const Eigen::MatrixXd& a = t.as[l];
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int o = 0; o < out; ++o) {
        double dv = d(i, o);
        for (int c = 0; c < in; ++c) J(i, off + static_cast<std::int64_t>(o) * in + c) = dv * a(i, c);
      }
    }
    off += static_cast<std::int64_t>(out) * in;
    for (Eigen::Index i = 0; i < n; ++i)
      for (int o = 0; o < out; ++o) J(i, off + o) = d(i, o);
    off += out;
  }
  return J;
}

Eigen::MatrixXd input_gradient_batch(const NetworkParams& params, const Eigen::MatrixXd& X) {
  int layers = params.arch.num_layers();
  ForwardTrace t = forward_trace(params, X);
  // Mean over output components: cotangent 1/output_dim on each.
  Eigen::MatrixXd delta =
      Eigen::MatrixXd::Constant(X.rows(), params.arch.output_dim, 1.0 / params.arch.output_dim);
  for (int l = layers - 1; l > 0; --l) {
    delta = (delta * params.weights[l])
                .cwiseProduct(params.arch.activation.derivative_of(t.zs[l - 1]));
  }
  return delta * params.weights[0];
}

Eigen::VectorXd input_gradient(const NetworkParams& params, const Eigen::VectorXd& x) {
  return input_gradient_batch(params, Eigen::MatrixXd(x.transpose())).row(0).transpose();
}

}  // namespace speclab
