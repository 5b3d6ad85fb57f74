#pragma once

#include "mrrnn/errors.hpp"
#include "mrrnn/neural/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mrrnn::neural {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index worst_entry = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares analytic gradients against central finite differences.
///
/// `loss` is a generic callable `loss(const ParameterSet<S>&, GradientSet<S>*) -> S`.
/// It is invoked once in double precision with a gradient sink, and twice per
/// entry in extended precision (no sink) for the numeric side, so rounding in
/// the difference quotient stays far below the step size.
template <typename Loss>
GradientCheckResult check_gradients(const ParameterSet<double>& params, Loss&& loss,
                                    double step = 1e-5) {
  using Wide = long double;
  GradientSet<double> analytic = params.zeros_like();
  const double base = loss(params, &analytic);
  if (!std::isfinite(base) || !analytic.all_finite()) {
    throw NumericalError("check_gradients: non-finite loss or gradient");
  }
  ParameterSet<Wide> probe = params.template cast<Wide>();
  GradientCheckResult result;
  for (std::size_t p = 0; p < probe.size(); ++p) {
    auto& m = probe.at(p);
    for (Index k = 0; k < m.size(); ++k) {
      const Wide saved = m.data()[k];
      m.data()[k] = saved + Wide(step);
      const Wide up = loss(probe, static_cast<GradientSet<Wide>*>(nullptr));
      m.data()[k] = saved - Wide(step);
      const Wide down = loss(probe, static_cast<GradientSet<Wide>*>(nullptr));
      m.data()[k] = saved;
      const double numeric = static_cast<double>((up - down) / (Wide(2) * Wide(step)));
      const double exact = analytic.at(p).data()[k];
      if (!std::isfinite(numeric)) throw NumericalError("check_gradients: non-finite difference");
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double rel = std::abs(exact - numeric) / denom;
      ++result.entries_checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = probe.name(p);
        result.worst_entry = k;
        result.analytic = exact;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mrrnn::neural
