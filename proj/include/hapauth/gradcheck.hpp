#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hapauth/tensor.hpp"

namespace hapauth::ad {

struct GradCheckOptions {
  double eps = 1e-5;
  // Coordinates compared; all of them when the parameter set is smaller.
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  // Redraw coordinates whose +-eps probes flip any relu input sign.
  bool avoid_relu_kinks = true;
  std::size_t max_redraws = 10000;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Compares backward() of `loss_fn` against central differences
// (f(θ+eps) - f(θ-eps)) / (2 eps) on sampled coordinates of `params`.
// loss_fn must rebuild its graph from the current parameter values on every call.
GradCheckResult grad_check(const std::function<Tensor<double>()>& loss_fn, std::vector<Tensor<double>> params,
                           const GradCheckOptions& opts = {});

}  // namespace hapauth::ad
