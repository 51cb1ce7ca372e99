#pragma once

#include "robustreg/rng.hpp"
#include "robustreg/types.hpp"

namespace test_helpers {

using robustreg::CounterRng;
using robustreg::Dataset;
using robustreg::Matrix;
using robustreg::Vector;

// y = beta0 + x * slopes + noise_scale * N(0,1), standard-normal covariates.
inline Dataset noisy_dataset(CounterRng& rng, int n, int p,
                             double noise_scale = 1.0) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  Vector y = x.rowwise().sum();
  for (int i = 0; i < n; ++i) y(i) += noise_scale * rng.normal();
  return Dataset(x, y, true);
}

// Points exactly on y = intercept + x * slope, covariates spread out.
inline Dataset line_dataset(int n, double intercept, double slope) {
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = i - n / 2.0;
    y(i) = intercept + slope * x(i, 0);
  }
  return Dataset(x, y, true);
}

}  // namespace test_helpers
