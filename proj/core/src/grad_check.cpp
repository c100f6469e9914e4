#include "weakshot/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "weakshot/errors.hpp"

namespace weakshot {

double grad_check(const std::function<double(std::span<const double>)>& loss,
                  std::span<const double> point, std::span<const double> analytic_grad,
                  double eps) {
  if (point.size() != analytic_grad.size())
    throw shape_error("grad_check: point and gradient sizes differ");
  if (eps <= 0.0) throw config_error("grad_check: eps must be > 0");

  std::vector<double> probe(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double up = loss(probe);
    probe[i] = saved - eps;
    const double down = loss(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw numeric_error("grad_check: non-finite loss at coordinate " + std::to_string(i));
    const double numeric = (up - down) / (2.0 * eps);
    const double analytic = analytic_grad[i];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace weakshot
