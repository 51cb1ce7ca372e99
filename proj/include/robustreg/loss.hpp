#pragma once

#include <cmath>
#include <stdexcept>

namespace robustreg {

enum class PsiFamily { huber, bisquare };

// 95%-efficiency tuning constants.
inline constexpr double kHuberC = 1.345;
inline constexpr double kBisquareC = 4.685;
// Bisquare constant giving a 0.5 breakdown M-scale.
inline constexpr double kBisquareC_bp50 = 1.56;

struct PsiSpec {
  PsiFamily family = PsiFamily::huber;
  double c = kHuberC;

  static PsiSpec huber(double c = kHuberC) { return {PsiFamily::huber, c}; }
  static PsiSpec bisquare(double c = kBisquareC) {
    return {PsiFamily::bisquare, c};
  }
};

inline double rho(const PsiSpec& s, double t) {
  const double c = s.c;
  const double a = std::fabs(t);
  if (s.family == PsiFamily::huber)
    return a <= c ? 0.5 * t * t : c * a - 0.5 * c * c;
  if (a >= c) return c * c / 6.0;
  const double u = 1.0 - (t / c) * (t / c);
  return c * c / 6.0 * (1.0 - u * u * u);
}

inline double psi(const PsiSpec& s, double t) {
  const double c = s.c;
  if (s.family == PsiFamily::huber) return std::clamp(t, -c, c);
  if (std::fabs(t) >= c) return 0.0;
  const double u = 1.0 - (t / c) * (t / c);
  return t * u * u;
}

// Derivative of psi; the Huber kink |t| = c maps to 0.
inline double psi_prime(const PsiSpec& s, double t) {
  const double c = s.c;
  if (s.family == PsiFamily::huber) return std::fabs(t) < c ? 1.0 : 0.0;
  if (std::fabs(t) >= c) return 0.0;
  const double v = (t / c) * (t / c);
  return (1.0 - v) * (1.0 - 5.0 * v);
}

// psi(t)/t with the limit value 1 at t = 0; lies in [0,1] for both families.
inline double irls_weight(const PsiSpec& s, double t) {
  if (t == 0.0) return 1.0;
  if (s.family == PsiFamily::huber) {
    const double a = std::fabs(t);
    return a <= s.c ? 1.0 : s.c / a;
  }
  if (std::fabs(t) >= s.c) return 0.0;
  const double u = 1.0 - (t / s.c) * (t / s.c);
  return u * u;
}

// Efficiency -> k1 table for the bisquare second-stage constant.
inline double bisquare_c_for_efficiency(double eff) {
  if (eff == 0.80) return 3.14;
  if (eff == 0.85) return 3.44;
  if (eff == 0.90) return 3.88;
  if (eff == 0.95) return 4.68;
  throw std::invalid_argument("no tabulated constant for efficiency value");
}

}  // namespace robustreg
