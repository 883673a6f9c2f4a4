// Copyright 2026 The tgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TGEN__GMM_HPP_
#define TGEN__GMM_HPP_

#include <array>
#include <vector>

#include "tgen/rng.hpp"

namespace tgen
{

// rho is squashed through tanh and this factor so |rho| stays strictly < 1.
constexpr double kRhoLimit = 0.999;
// log-scales from the heads are clamped to keep densities finite (sigma down
// to ~1e-7 stays representable in the float32 graph).
constexpr double kLogScaleMin = -16.0;
constexpr double kLogScaleMax = 8.0;
// Variance floor used by the training loss: fitting point-mass targets would
// otherwise push sigma against the clamp, where any residual mean error turns
// into an unbounded quadratic term and destabilizes the optimizer. Sampling
// uses the unfloored scales.
constexpr double kTrainSigmaFloor = 1e-2;

/// K-component Gaussian mixture over one vehicle attribute. Univariate heads
/// (heading, speed) use dim = 1; bivariate heads (position, size) use dim = 2
/// with a full 2x2 covariance from (sigma_x, sigma_y, rho).
struct GmmParams
{
  int dim = 1;  // 1 or 2

  struct Component
  {
    double weight_logit = 0.0;
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> sigma{1.0, 1.0};
    double rho = 0.0;  // |rho| < 1; unused when dim == 1
  };
  std::vector<Component> components;

  int component_count() const { return static_cast<int>(components.size()); }

  /// Mixture weights: softmax over the weight logits.
  std::vector<double> weights() const;

  /// Builds from the raw head output for one region: per component
  /// [logit, mu, log_sigma] (dim 1) or [logit, mu_x, mu_y, log_sx, log_sy,
  /// rho_raw] (dim 2). A positive sigma_floor composes as sqrt(s^2 + floor^2),
  /// matching the training-loss parameterization.
  static GmmParams from_raw(const double * raw, int k, int dim, double sigma_floor = 0.0);
};

/// log sum_k softmax(pi)_k N(x; mu_k, Sigma_k), via log-sum-exp.
double gmm_logpdf(const GmmParams & params, const double * x);
inline double gmm_logpdf(const GmmParams & params, double x) { return gmm_logpdf(params, &x); }

/// Draw: component by mixture weight, then the (possibly correlated) normal
/// via the Cholesky factor of the 2x2 covariance.
void gmm_sample(const GmmParams & params, Rng & rng, double * out);

}  // namespace tgen

#endif  // TGEN__GMM_HPP_
