#include "core/flatness.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"

namespace speclab {

Eigen::VectorXd hvp(const NetworkParams& params, const Dataset& data, LossKind loss,
                    const Eigen::VectorXd& v) {
  double vnorm = v.norm();
  if (!(vnorm > 0.0)) throw ConfigError("hvp requires a nonzero direction");
  Eigen::VectorXd theta = params.flatten();
  double eps = 1e-3 * (1.0 + theta.norm());
  Eigen::VectorXd u = v / vnorm;
  Eigen::VectorXd gp =
      loss_value_and_grad(NetworkParams::unflatten(params.arch, theta + eps * u), data, loss).grad;
  Eigen::VectorXd gm =
      loss_value_and_grad(NetworkParams::unflatten(params.arch, theta - eps * u), data, loss).grad;
  Eigen::VectorXd result = (gp - gm) * (vnorm / (2.0 * eps));
  if (!result.allFinite()) throw NumericalDivergence("hvp produced non-finite values");
  return result;
}

LinearOp make_hvp_operator(const NetworkParams& params, const Dataset& data, LossKind loss) {
  return [params, data, loss](const Eigen::VectorXd& v) { return hvp(params, data, loss, v); };
}

Eigen::MatrixXd dense_hessian(const NetworkParams& params, const Dataset& data, LossKind loss) {
  const Eigen::Index P = params.param_count();
  if (P > 5000) throw ConfigError("dense_hessian is guarded to P <= 5000");
  Eigen::MatrixXd H(P, P);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(P);
  for (Eigen::Index j = 0; j < P; ++j) {
    e[j] = 1.0;
    H.col(j) = hvp(params, data, loss, e);
    e[j] = 0.0;
  }
  return 0.5 * (H + H.transpose());
}

TraceEstimate hutchinson_trace(const LinearOp& op, int P, int n_probes, std::uint64_t seed) {
  if (n_probes < 1) throw ConfigError("hutchinson_trace requires n_probes >= 1");
  Rng rng = Rng(seed).stream(0x7A);
  double sum = 0.0, sumsq = 0.0;
  Eigen::VectorXd z(P);
  for (int p = 0; p < n_probes; ++p) {
    for (int i = 0; i < P; ++i) z[i] = rng.rademacher();
    double q = z.dot(op(z));
    sum += q;
    sumsq += q * q;
  }
  TraceEstimate est;
  est.n_probes = n_probes;
  est.value = sum / n_probes;
  if (n_probes > 1) {
    double var = (sumsq - sum * sum / n_probes) / (n_probes - 1);
    est.std_error = std::sqrt(std::max(0.0, var) / n_probes);
  }
  return est;
}

SpectralNormResult spectral_norm(const LinearOp& op, int P, int max_iters, double tol,
                                 std::uint64_t seed) {
  if (max_iters < 1) throw ConfigError("spectral_norm requires max_iters >= 1");
  Rng rng = Rng(seed).stream(0x9E);
  Eigen::VectorXd v(P);
  for (int i = 0; i < P; ++i) v[i] = rng.normal();
  v.normalize();
  SpectralNormResult result;
  double rayleigh = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::VectorXd hv = op(v);
    double r = v.dot(hv);
    result.iterations = it;
    double hvnorm = hv.norm();
    if (hvnorm < 1e-300) {  // operator annihilated the iterate: zero map
      result.value = 0.0;
      result.converged = true;
      return result;
    }
    v = hv / hvnorm;
    if (it > 1 && std::abs(r - rayleigh) < tol * std::max(std::abs(r), 1e-300)) {
      rayleigh = r;
      result.converged = true;
      break;
    }
    rayleigh = r;
  }
  result.value = std::abs(rayleigh);
  return result;
}

std::vector<EigenPairResult> top_eigenpairs(const LinearOp& op, int P, int count, int max_iters,
                                            double tol, std::uint64_t seed) {
  if (count < 1 || count > 8) throw ConfigError("top_eigenpairs supports 1..8 pairs");
  std::vector<EigenPairResult> pairs;
  Rng rng = Rng(seed).stream(0xE1);
  for (int pair_idx = 0; pair_idx < count; ++pair_idx) {
    Eigen::VectorXd v(P);
    for (int i = 0; i < P; ++i) v[i] = rng.normal();
    auto project_out = [&](Eigen::VectorXd& w) {
      for (const auto& found : pairs) w -= found.vector.dot(w) * found.vector;
    };
    project_out(v);
    v.normalize();
    EigenPairResult pr;
    double rayleigh = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
      Eigen::VectorXd hv = op(v);
      project_out(hv);
      double r = v.dot(hv);
      pr.iterations = it;
      double hvnorm = hv.norm();
      if (hvnorm < 1e-300) {
        pr.converged = true;
        rayleigh = 0.0;
        break;
      }
      v = hv / hvnorm;
      if (it > 1 && std::abs(r - rayleigh) < tol * std::max(std::abs(r), 1e-300)) {
        rayleigh = r;
        pr.converged = true;
        break;
      }
      rayleigh = r;
    }
    pr.value = rayleigh;
    pr.vector = v;
    pairs.push_back(std::move(pr));
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPairResult& a,
                                                  const EigenPairResult& b) {
    return std::abs(a.value) > std::abs(b.value);
  });
  return pairs;
}

FlatnessReport flatness_report(const NetworkParams& params, const Dataset& data, LossKind loss,
                               const FlatnessConfig& config, double loss_tol) {
  return flatness_report(params, data, loss, config, loss_tol, nullptr);
}

FlatnessReport flatness_report(const NetworkParams& params, const Dataset& data, LossKind loss,
                               const FlatnessConfig& config, double loss_tol,
                               std::vector<Eigen::VectorXd>* top_vectors) {
  const int P = static_cast<int>(params.param_count());
  LinearOp op = make_hvp_operator(params, data, loss);

  FlatnessReport report;
  report.param_count = P;
  report.dataset_size = data.size();
  report.loss_at_params = loss_value(params, data, loss);
  report.not_at_minimum_warning = report.loss_at_params >= loss_tol;

  TraceEstimate trace = hutchinson_trace(op, P, config.n_probes, config.seed);
  report.trace_estimate = trace.value;
  report.trace_std_error = trace.std_error;
  report.n_probes = trace.n_probes;
  report.expected_eigenvalue = trace.value / P;

  SpectralNormResult sn =
      spectral_norm(op, P, config.power_max_iters, config.power_tol, config.seed);
  report.spectral_norm = sn.value;
  report.n_power_iters = sn.iterations;
  report.spectral_converged = sn.converged;

  auto pairs =
      top_eigenpairs(op, P, config.top_k, config.power_max_iters, config.power_tol, config.seed);
  for (const auto& p : pairs) {
    report.top_eigenvalues.push_back(p.value);
    if (top_vectors) top_vectors->push_back(p.vector);
  }
  return report;
}

LandscapeSlice landscape_slice(const NetworkParams& params, const Dataset& data, LossKind loss,
                               const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                               double extent, int resolution) {
  if (!(v1.norm() > 0.0) || !(v2.norm() > 0.0))
    throw ConfigError("landscape_slice requires nonzero directions");
  if (resolution < 3) throw ConfigError("landscape_slice requires resolution >= 3");
  if (resolution % 2 == 0) ++resolution;  // keep (0, 0) on the grid

  LandscapeSlice slice;
  slice.v1 = v1.normalized();
  Eigen::VectorXd u2 = v2 - slice.v1.dot(v2) * slice.v1;
  if (u2.norm() < 1e-12 * v2.norm())
    throw ConfigError("landscape directions are linearly dependent");
  slice.v2 = u2.normalized();

  const Eigen::VectorXd theta = params.flatten();
  const double center_loss = loss_value(params, data, loss);

  auto eval_slice = [&](double ext) {
    Eigen::VectorXd offs(resolution);
    for (int i = 0; i < resolution; ++i)
      offs[i] = -ext + 2.0 * ext * i / (resolution - 1);
    offs[(resolution - 1) / 2] = 0.0;
    Eigen::MatrixXd losses(resolution, resolution);
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j) {
        if (offs[i] == 0.0 && offs[j] == 0.0) {
          losses(i, j) = center_loss;
          continue;
        }
        Eigen::VectorXd p = theta + offs[i] * slice.v1 + offs[j] * slice.v2;
        losses(i, j) =
            loss_value(NetworkParams::unflatten(params.arch, p), data, loss);
      }
    return std::make_pair(offs, losses);
  };

  double ext = extent;
  for (int shrink = 0; shrink <= 10; ++shrink) {
    auto [offs, losses] = eval_slice(ext);
    double max_loss = losses.maxCoeff();
    bool acceptable = !(max_loss > 10.0 * std::max(center_loss, 1e-12)) || shrink == 10;
    if (acceptable) {
      slice.alphas = offs;
      slice.betas = offs;
      slice.losses = losses;
      slice.extent = ext;
      slice.shrink_count = shrink;
      return slice;
    }
    ext *= 0.5;
  }
  throw Error("unreachable: landscape extent loop");
}

}  // namespace speclab
