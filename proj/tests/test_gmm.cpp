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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "tgen/gmm.hpp"
#include "tgen/placement.hpp"

using namespace tgen;

namespace
{

GmmParams random_gmm(Rng & rng, int k, int dim)
{
  std::vector<double> raw;
  for (int i = 0; i < k; ++i) {
    raw.push_back(rng.uniform(-1.5, 1.5));            // weight logit
    if (dim == 1) {
      raw.push_back(rng.uniform(-3.0, 3.0));          // mu
      raw.push_back(rng.uniform(-1.0, 0.7));          // log sigma
    } else {
      raw.push_back(rng.uniform(-3.0, 3.0));
      raw.push_back(rng.uniform(-3.0, 3.0));
      raw.push_back(rng.uniform(-1.0, 0.7));
      raw.push_back(rng.uniform(-1.0, 0.7));
      raw.push_back(rng.uniform(-1.5, 1.5));          // rho raw
    }
  }
  return GmmParams::from_raw(raw.data(), k, dim);
}

// Simpson quadrature of exp(logpdf) over [-L, L].
double integrate_univariate(const GmmParams & p, double lim = 25.0, int n = 4000)
{
  const double h = 2.0 * lim / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -lim + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * std::exp(gmm_logpdf(p, x));
  }
  return sum * h / 3.0;
}

double integrate_bivariate(const GmmParams & p, double lim = 12.0, int n = 360)
{
  const double h = 2.0 * lim / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double wi = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (int j = 0; j <= n; ++j) {
      const double wj = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      const double x[2] = {-lim + i * h, -lim + j * h};
      sum += wi * wj * std::exp(gmm_logpdf(p, x));
    }
  }
  return sum * h * h / 9.0;
}

}  // namespace

TEST_CASE("logpdf: standard normal at the mode")
{
  std::vector<double> raw{0.0, 0.0, 0.0};  // w, mu = 0, log sigma = 0
  const GmmParams p = GmmParams::from_raw(raw.data(), 1, 1);
  CHECK(gmm_logpdf(p, 0.0) == doctest::Approx(-0.9189385332046727));
}

TEST_CASE("logpdf: mixture of identical components collapses")
{
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> one;
    one.push_back(0.3);
    const double mu = rng.uniform(-2.0, 2.0);
    const double ls = rng.uniform(-1.0, 1.0);
    one.push_back(mu);
    one.push_back(ls);
    const GmmParams single = GmmParams::from_raw(one.data(), 1, 1);

    std::vector<double> two{0.7, mu, ls, 0.7, mu, ls};
    const GmmParams pair = GmmParams::from_raw(two.data(), 2, 1);

    const double x = rng.uniform(-4.0, 4.0);
    CHECK(gmm_logpdf(pair, x) == doctest::Approx(gmm_logpdf(single, x)).epsilon(1e-12));
  }
}

TEST_CASE("logpdf: density integrates to one (quadrature oracle)")
{
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const GmmParams uni = random_gmm(rng, 1 + trial % 3, 1);
    CHECK(integrate_univariate(uni) == doctest::Approx(1.0).epsilon(1e-3));
  }
  for (int trial = 0; trial < 3; ++trial) {
    const GmmParams bi = random_gmm(rng, 1 + trial, 2);
    CHECK(integrate_bivariate(bi) == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("sample: degenerate spread concentrates at the mean")
{
  std::vector<double> raw{0.0, 2.5, std::log(1e-6)};
  const GmmParams p = GmmParams::from_raw(raw.data(), 1, 1);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    double x;
    gmm_sample(p, rng, &x);
    CHECK(std::abs(x - 2.5) < 1e-4);
  }
}

TEST_CASE("sample: Monte-Carlo moments of a single component")
{
  std::vector<double> raw{0.0, 2.0, std::log(3.0)};
  const GmmParams p = GmmParams::from_raw(raw.data(), 1, 1);
  Rng rng(7);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x;
    gmm_sample(p, rng, &x);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double stdev = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 2.0) < 0.03);
  CHECK(std::abs(stdev - 3.0) < 0.03);
}

TEST_CASE("sample: bivariate correlation is honored")
{
  // rho raw chosen so 0.999 * tanh(raw) = 0.8
  const double rho_raw = std::atanh(0.8 / kRhoLimit);
  std::vector<double> raw{0.0, 0.0, 0.0, 0.0, 0.0, rho_raw};
  const GmmParams p = GmmParams::from_raw(raw.data(), 1, 2);
  Rng rng(9);
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double v[2];
    gmm_sample(p, rng, v);
    sx += v[0];
    sy += v[1];
    sxx += v[0] * v[0];
    syy += v[1] * v[1];
    sxy += v[0] * v[1];
  }
  const double mx = sx / n, my = sy / n;
  const double corr =
    (sxy / n - mx * my) / std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
  CHECK(std::abs(corr - 0.8) < 0.02);
}

TEST_CASE("sample + logpdf consistency: empirical NLL matches an independent estimate")
{
  Rng rng(13);
  const GmmParams p = random_gmm(rng, 3, 2);
  // entropy estimate with an independent stream
  Rng indep(999);
  const int n = 100000;
  double indep_nll = 0.0;
  for (int i = 0; i < n; ++i) {
    double v[2];
    gmm_sample(p, indep, v);
    indep_nll -= gmm_logpdf(p, v);
  }
  indep_nll /= n;

  Rng own(4242);
  double own_nll = 0.0;
  for (int i = 0; i < n; ++i) {
    double v[2];
    gmm_sample(p, own, v);
    own_nll -= gmm_logpdf(p, v);
  }
  own_nll /= n;
  CHECK(own_nll == doctest::Approx(indep_nll).epsilon(0.01));
}

TEST_CASE("nll graph value agrees with the value-side logpdf")
{
  Rng rng(17);
  for (int dim : {1, 2}) {
    const int k = 3;
    const int stride = dim == 1 ? 3 : 6;
    for (int trial = 0; trial < 10; ++trial) {
      TensorT<double> raw = test::random_tensor(2, k * stride, rng, 1.2);
      std::vector<double> target;
      for (int r = 0; r < 2 * dim; ++r) {
        target.push_back(rng.uniform(-2.0, 2.0));
      }
      TapeT<double> tape;
      const int nll = gmm_nll_graph(tape, tape.leaf(raw), target, k, dim);
      for (int r = 0; r < 2; ++r) {
        std::vector<double> row(raw.data.begin() + r * k * stride,
                                raw.data.begin() + (r + 1) * k * stride);
        // the loss graph carries the training variance floor
        const GmmParams p = GmmParams::from_raw(row.data(), k, dim, kTrainSigmaFloor);
        const double expect = -gmm_logpdf(p, target.data() + r * dim);
        CHECK(tape.val(nll).at(r, 0) == doctest::Approx(expect).epsilon(1e-9));
      }
    }
  }
}
