#pragma once

#include "robustreg/linalg.hpp"
#include "robustreg/loss.hpp"
#include "robustreg/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace robustreg {

inline constexpr double kMadDenominator = 0.6745;

inline double mad_scale_or_zero(const std::vector<double>& r) {
  const double med = median(r);
  std::vector<double> dev(r.size());
  for (size_t i = 0; i < r.size(); ++i) dev[i] = std::fabs(r[i] - med);
  return median(std::move(dev)) / kMadDenominator;
}

// median(|r - median(r)|) / 0.6745; errors when the spread is zero.
inline double mad_scale(const std::vector<double>& r) {
  const double s = mad_scale_or_zero(r);
  if (s <= 0.0) throw FitError("mad_scale: degenerate scale (zero MAD)");
  return s;
}

inline double mad_scale(const Vector& r) { return mad_scale(to_std(r)); }
inline double mad_scale_or_zero(const Vector& r) {
  return mad_scale_or_zero(to_std(r));
}

// Bisquare loss rescaled to sup 1, so the M-scale target 0.5 is literal.
inline double bounded_rho(double t, double c) {
  const double a = std::fabs(t);
  if (a >= c) return 1.0;
  const double u = 1.0 - (t / c) * (t / c);
  return 1.0 - u * u * u;
}

struct MScaleSpec {
  double c = kBisquareC_bp50;
  double delta = 0.5;
  int max_iter = 200;
  double rel_tol = 1e-10;
  // Degrees-of-freedom correction: the implicit equation is solved with
  // target delta * (n - dof) instead of delta * n. Regression pipelines pass
  // the fitted coefficient count here; 0 keeps the plain location form.
  int dof = 0;
};

namespace detail {

inline double m_scale_target(const MScaleSpec& spec, int n) {
  const int denom = n - spec.dof;
  if (denom < 1) throw FitError("m_scale: too few observations for dof");
  return spec.delta * denom;
}

// One evaluation of the defining sum at scale s.
inline double m_scale_sum(const std::vector<double>& r, double c, double s) {
  double acc = 0.0;
  for (double ri : r) acc += bounded_rho(ri / s, c);
  return acc;
}

}  // namespace detail

// The unique sigma > 0 with sum_i bounded_rho(r_i/sigma) = target, found by
// the damped fixed point sigma_{k+1}^2 = sigma_k^2 * sum/target, started at
// the MAD (mean |r|/0.7979 when the MAD degenerates).
inline double m_scale(const std::vector<double>& r, const MScaleSpec& spec = {}) {
  const int n = static_cast<int>(r.size());
  if (n == 0) throw FitError("m_scale: empty input");
  const double target = detail::m_scale_target(spec, n);

  int nonzero = 0;
  double abs_sum = 0.0;
  for (double ri : r) {
    if (ri != 0.0) ++nonzero;
    abs_sum += std::fabs(ri);
  }
  // f(0+) = #nonzero residuals; a root needs that to exceed the target.
  if (static_cast<double>(nonzero) <= target)
    throw FitError("m_scale: too many zero residuals");

  double sigma = mad_scale_or_zero(r);
  if (sigma <= 0.0) sigma = abs_sum / n / 0.7979;
  if (sigma <= 0.0) throw FitError("m_scale: all residuals zero");

  for (int it = 0; it < spec.max_iter; ++it) {
    const double sum = detail::m_scale_sum(r, spec.c, sigma);
    const double next = sigma * std::sqrt(sum / target);
    const double rel = std::fabs(next / sigma - 1.0);
    sigma = next;
    if (rel < spec.rel_tol) return sigma;
  }
  throw FitError("m_scale: no convergence in " + std::to_string(spec.max_iter) +
                 " iterations");
}

inline double m_scale(const Vector& r, const MScaleSpec& spec = {}) {
  return m_scale(to_std(r), spec);
}

}  // namespace robustreg
