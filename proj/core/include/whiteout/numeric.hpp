#pragma once

namespace whiteout {

double normal_cdf(double x);
double normal_sf(double x);  // 1 - Phi(x) without cancellation

// Two-sided p-value for a t statistic; dof <= 0 means the Gaussian limit.
double two_sided_t_pvalue(double t, double dof);

// Adaptive Simpson on [a, b].
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40);

}  // namespace whiteout

#include "whiteout/numeric_impl.hpp"
