#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace speclab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor/layer shape violations; the message names the offending layer.
struct ShapeError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// NaN/Inf surfaced by an optimizer or estimator; carries epoch context when known.
struct NumericalDivergence : Error {
  using Error::Error;
};

/// Pretraining exhausted its budget with loss still far from tolerance.
struct PretrainDiverged : Error {
  std::vector<double> loss_trace;
  PretrainDiverged(const std::string& msg, std::vector<double> trace)
      : Error(msg), loss_trace(std::move(trace)) {}
};

/// Worker cap: min(hardware threads, SPECLAB_THREADS when set).
int max_threads();

/// Runs fn(0..n-1) on up to max_threads() workers. Results must not depend on
/// execution order; the first exception thrown is rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace speclab
