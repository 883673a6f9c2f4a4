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

#include "tgen/gmm.hpp"

#include <algorithm>
#include <cmath>

#include "tgen/error.hpp"

namespace tgen
{

namespace
{

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

}  // namespace

std::vector<double> GmmParams::weights() const
{
  std::vector<double> w(components.size());
  double mx = components[0].weight_logit;
  for (const Component & c : components) {
    mx = std::max(mx, c.weight_logit);
  }
  double sum = 0.0;
  for (size_t i = 0; i < components.size(); ++i) {
    w[i] = std::exp(components[i].weight_logit - mx);
    sum += w[i];
  }
  for (double & v : w) {
    v /= sum;
  }
  return w;
}

GmmParams GmmParams::from_raw(const double * raw, int k, int dim, double sigma_floor)
{
  if (k < 1 || (dim != 1 && dim != 2)) {
    throw ShapeError("gmm: need K >= 1 and dim in {1, 2}");
  }
  auto scale = [&](double log_sigma) {
    const double s = std::exp(std::clamp(log_sigma, kLogScaleMin, kLogScaleMax));
    return std::hypot(s, sigma_floor);
  };
  GmmParams p;
  p.dim = dim;
  p.components.resize(k);
  const int stride = dim == 1 ? 3 : 6;
  for (int i = 0; i < k; ++i) {
    const double * r = raw + i * stride;
    Component & c = p.components[i];
    c.weight_logit = r[0];
    if (dim == 1) {
      c.mean[0] = r[1];
      c.sigma[0] = scale(r[2]);
    } else {
      c.mean[0] = r[1];
      c.mean[1] = r[2];
      c.sigma[0] = scale(r[3]);
      c.sigma[1] = scale(r[4]);
      c.rho = kRhoLimit * std::tanh(r[5]);
    }
  }
  return p;
}

double gmm_logpdf(const GmmParams & params, const double * x)
{
  if (params.components.empty()) {
    throw ShapeError("gmm_logpdf: no components");
  }
  const std::vector<double> w = params.weights();
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(params.components.size());
  for (size_t i = 0; i < params.components.size(); ++i) {
    const GmmParams::Component & c = params.components[i];
    double log_n;
    if (params.dim == 1) {
      const double z = (x[0] - c.mean[0]) / c.sigma[0];
      log_n = -0.5 * kLogTwoPi - std::log(c.sigma[0]) - 0.5 * z * z;
    } else {
      const double zx = (x[0] - c.mean[0]) / c.sigma[0];
      const double zy = (x[1] - c.mean[1]) / c.sigma[1];
      const double omr2 = 1.0 - c.rho * c.rho;
      const double q = (zx * zx - 2.0 * c.rho * zx * zy + zy * zy) / omr2;
      log_n = -kLogTwoPi - std::log(c.sigma[0]) - std::log(c.sigma[1]) -
              0.5 * std::log(omr2) - 0.5 * q;
    }
    terms[i] = std::log(std::max(w[i], 1e-300)) + log_n;
    mx = std::max(mx, terms[i]);
  }
  double sum = 0.0;
  for (double t : terms) {
    sum += std::exp(t - mx);
  }
  return mx + std::log(sum);
}

void gmm_sample(const GmmParams & params, Rng & rng, double * out)
{
  if (params.components.empty()) {
    throw ShapeError("gmm_sample: no components");
  }
  const std::vector<double> w = params.weights();
  const int k = rng.categorical(w);
  const GmmParams::Component & c = params.components[k];
  if (params.dim == 1) {
    out[0] = c.mean[0] + c.sigma[0] * rng.normal();
    return;
  }
  // Cholesky of [[sx^2, r sx sy], [r sx sy, sy^2]]
  const double n1 = rng.normal();
  const double n2 = rng.normal();
  out[0] = c.mean[0] + c.sigma[0] * n1;
  out[1] = c.mean[1] + c.sigma[1] * (c.rho * n1 + std::sqrt(1.0 - c.rho * c.rho) * n2);
}

}  // namespace tgen
