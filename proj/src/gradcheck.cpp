#include "hapauth/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hapauth/rng.hpp"

namespace hapauth::ad {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<Tensor<double>()>& loss_fn, std::vector<Tensor<double>> params,
                           const GradCheckOptions& opts) {
  for (auto& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  std::uint64_t base_signs = 0;
  {
    ReluSignTrace trace;
    loss_fn().backward();
    base_signs = trace.digest();
  }

  std::vector<std::size_t> offsets{0};
  for (const auto& p : params) offsets.push_back(offsets.back() + p.size());
  const std::size_t total = offsets.back();

  auto probe = [&](std::size_t flat, double delta, std::uint64_t& signs) {
    auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
    const std::size_t which = static_cast<std::size_t>(it - offsets.begin()) - 1;
    auto data = params[which].data();
    const std::size_t local = flat - offsets[which];
    const double saved = data[local];
    data[local] = saved + delta;
    ReluSignTrace trace;
    const double value = loss_fn().item();
    signs = trace.digest();
    data[local] = saved;
    return value;
  };
  auto analytic_at = [&](std::size_t flat) {
    auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
    const std::size_t which = static_cast<std::size_t>(it - offsets.begin()) - 1;
    return params[which].grad()[flat - offsets[which]];
  };

  GradCheckResult result;
  auto check = [&](std::size_t flat) {
    std::uint64_t plus_signs = 0;
    std::uint64_t minus_signs = 0;
    const double fp = probe(flat, opts.eps, plus_signs);
    const double fm = probe(flat, -opts.eps, minus_signs);
    if (opts.avoid_relu_kinks && (plus_signs != base_signs || minus_signs != base_signs)) {
      ++result.skipped_kinks;
      return false;
    }
    const double numeric = (fp - fm) / (2.0 * opts.eps);
    result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic_at(flat), numeric));
    ++result.checked;
    return true;
  };

  if (total <= opts.samples) {
    for (std::size_t i = 0; i < total; ++i) check(i);
    return result;
  }
  Rng rng(opts.seed);
  std::set<std::size_t> tried;
  while (result.checked < opts.samples && result.skipped_kinks <= opts.max_redraws && tried.size() < total) {
    const std::size_t flat = rng.below(total);
    if (!tried.insert(flat).second) continue;
    check(flat);
  }
  return result;
}

}  // namespace hapauth::ad
