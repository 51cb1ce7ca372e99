#pragma once

#include "robustreg/linalg.hpp"
#include "robustreg/loss.hpp"
#include "robustreg/scale.hpp"
#include "robustreg/types.hpp"

#include <cmath>

namespace robustreg {

namespace detail {

inline bool near_exact_fit(const Vector& r, const Vector& y) {
  const double yref = std::max(1.0, y.cwiseAbs().maxCoeff());
  return r.cwiseAbs().maxCoeff() <= 1e-9 * yref;
}

inline RegressionFit make_fit(MethodId m, const Dataset& d, Vector beta,
                              Vector weights, double scale, double objective,
                              int iterations, bool converged) {
  RegressionFit f;
  f.method = m;
  f.coefficients = std::move(beta);
  f.residuals = residuals(d, f.coefficients);
  f.weights = std::move(weights);
  f.scale = scale;
  f.objective = objective;
  f.iterations = iterations;
  f.converged = converged;
  return f;
}

}  // namespace detail

inline RegressionFit fit_ols(const Dataset& d) {
  Vector w = Vector::Ones(d.n());
  Vector beta = wls_solve(d, w);
  Vector r = residuals(d, beta);
  return detail::make_fit(MethodId::ols, d, std::move(beta), std::move(w),
                          mad_scale_or_zero(r), r.squaredNorm(), 1, true);
}

// L1 fit by reweighting with 1/max(|r|, 1e-8); stops on stalled objective.
inline RegressionFit fit_lad(const Dataset& d) {
  constexpr double kFloor = 1e-8;
  constexpr int kMaxIter = 500;
  constexpr double kTol = 1e-8;

  Vector beta = wls_solve(d, Vector::Ones(d.n()));
  Vector r = residuals(d, beta);
  double objective = r.cwiseAbs().sum();
  Vector w(d.n());
  int it = 0;
  bool converged = false;
  for (; it < kMaxIter; ++it) {
    for (int i = 0; i < d.n(); ++i)
      w(i) = 1.0 / std::max(std::fabs(r(i)), kFloor);
    beta = wls_solve(d, w);
    r = residuals(d, beta);
    const double next = r.cwiseAbs().sum();
    const bool stalled = std::fabs(objective - next) < kTol * (1.0 + objective);
    objective = next;
    if (stalled) {
      converged = true;
      ++it;
      break;
    }
  }
  w /= w.maxCoeff();  // report weights on the [0,1] scale
  return detail::make_fit(MethodId::lad, d, std::move(beta), std::move(w),
                          mad_scale_or_zero(r), objective, it, converged);
}

struct IrlsConfig {
  PsiSpec psi;
  int max_iter = 200;
  double tol = 1e-8;  // relative coefficient change
};

// M-estimate with the scale frozen at the MAD of the initial residuals.
// Huber starts from OLS; the redescending bisquare starts from LAD to avoid
// bad local minima.
inline RegressionFit fit_m(const Dataset& d, const IrlsConfig& cfg) {
  const MethodId id = cfg.psi.family == PsiFamily::huber ? MethodId::m_huber
                                                         : MethodId::m_tukey;
  RegressionFit init =
      cfg.psi.family == PsiFamily::huber ? fit_ols(d) : fit_lad(d);
  Vector beta = init.coefficients;
  Vector r = init.residuals;
  const double sigma = mad_scale_or_zero(r);
  if (sigma <= 0.0 || detail::near_exact_fit(r, d.y())) {
    // Initial fit is already exact (up to solver rounding); iterating at the
    // leftover scale would standardize noise to O(1). Weights are the t=0
    // limit 1.
    return detail::make_fit(id, d, std::move(beta), Vector::Ones(d.n()), 0.0,
                            0.0, 0, true);
  }

  auto loss_sum = [&](const Vector& res) {
    double acc = 0.0;
    for (int i = 0; i < d.n(); ++i) acc += rho(cfg.psi, res(i) / sigma);
    return acc;
  };

  double objective = loss_sum(r);
  Vector w(d.n());
  int it = 0;
  bool converged = false;
  for (; it < cfg.max_iter; ++it) {
    for (int i = 0; i < d.n(); ++i) w(i) = irls_weight(cfg.psi, r(i) / sigma);
    Vector next = wls_solve(d, w);
    const double step = (next - beta).cwiseAbs().maxCoeff();
    beta = std::move(next);
    r = residuals(d, beta);
    const double next_obj = loss_sum(r);
    if (next_obj > objective * (1.0 + 1e-12) + 1e-12) {
      // IRLS majorization guarantees descent; a rise means numerical trouble.
      objective = next_obj;
      break;
    }
    objective = next_obj;
    if (step < cfg.tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
      converged = true;
      ++it;
      break;
    }
  }
  for (int i = 0; i < d.n(); ++i) w(i) = irls_weight(cfg.psi, r(i) / sigma);
  return detail::make_fit(id, d, std::move(beta), std::move(w), sigma,
                          objective, it, converged);
}

inline RegressionFit fit_m_huber(const Dataset& d) {
  return fit_m(d, IrlsConfig{PsiSpec::huber()});
}

inline RegressionFit fit_m_tukey(const Dataset& d) {
  return fit_m(d, IrlsConfig{PsiSpec::bisquare()});
}

}  // namespace robustreg
