#pragma once

#include <functional>
#include <span>

namespace weakshot {

// Central-difference check of analytic_grad against loss evaluated around point.
// Returns the worst relative error  |a - n| / max(|a|, |n|, 1e-8)  over all coordinates.
// Throws numeric_error if the loss comes back non-finite at any probe.
double grad_check(const std::function<double(std::span<const double>)>& loss,
                  std::span<const double> point, std::span<const double> analytic_grad,
                  double eps = 1e-5);

}  // namespace weakshot
