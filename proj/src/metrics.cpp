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

#include "tgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tgen/error.hpp"

namespace tgen
{

AttributeSamples collect_attributes(const Snapshot & snap)
{
  AttributeSamples out;
  for (const PlacedVehicle & v : snap.vehicles) {
    out.pos.push_back({std::clamp(v.x / kPosNorm, -1.0, 1.0),
                       std::clamp(v.y / kPosNorm, -1.0, 1.0)});
    out.heading.push_back(v.heading / 3.14159265358979323846);
    out.speed.push_back(std::clamp(v.speed / kSpeedNorm, 0.0, 1.0));
    out.size.push_back({v.length / kLengthNorm, v.width / kWidthNorm});
  }
  return out;
}

namespace
{

// Gaussian kernel over half the L1 distance (total-variation form on
// normalized coordinates).
double kernel(const std::vector<double> & a, const std::vector<double> & b, double sigma)
{
  double l1 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    l1 += std::abs(a[i] - b[i]);
  }
  const double d = 0.5 * l1;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

double mean_kernel(const std::vector<std::vector<double>> & x,
                   const std::vector<std::vector<double>> & y, double sigma)
{
  double sum = 0.0;
  for (const auto & a : x) {
    for (const auto & b : y) {
      sum += kernel(a, b, sigma);
    }
  }
  return sum / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

std::vector<std::vector<double>> to_rows(const std::vector<double> & v)
{
  std::vector<std::vector<double>> rows;
  rows.reserve(v.size());
  for (double s : v) {
    rows.push_back({s});
  }
  return rows;
}

std::vector<std::vector<double>> to_rows(const std::vector<std::array<double, 2>> & v)
{
  std::vector<std::vector<double>> rows;
  rows.reserve(v.size());
  for (const auto & s : v) {
    rows.push_back({s[0], s[1]});
  }
  return rows;
}

}  // namespace

double mmd2(const std::vector<std::vector<double>> & x,
            const std::vector<std::vector<double>> & y, const MmdConfig & cfg)
{
  if (x.empty() || y.empty()) {
    throw EmptyError("mmd2: empty sample set");
  }
  if (x[0].size() != y[0].size()) {
    throw ShapeError("mmd2: dimensionality mismatch");
  }
  // Canonical argument order keeps the estimator bit-exactly symmetric
  // (summation order would otherwise differ in the low bits).
  if (y < x) {
    return mmd2(y, x, cfg);
  }
  if (cfg.biased) {
    // The V-statistic is >= 0; rounding can leave a tiny negative residue.
    return std::max(0.0, mean_kernel(x, x, cfg.sigma) + mean_kernel(y, y, cfg.sigma) -
                           2.0 * mean_kernel(x, y, cfg.sigma));
  }
  // Unbiased U-statistic: diagonal terms removed; may go negative.
  const size_t m = x.size();
  const size_t n = y.size();
  if (m < 2 || n < 2) {
    throw EmptyError("mmd2: unbiased estimator needs at least 2 samples per side");
  }
  double xx = 0.0, yy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) {
      if (i != j) {
        xx += kernel(x[i], x[j], cfg.sigma);
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i != j) {
        yy += kernel(y[i], y[j], cfg.sigma);
      }
    }
  }
  return xx / (static_cast<double>(m) * (m - 1)) + yy / (static_cast<double>(n) * (n - 1)) -
         2.0 * mean_kernel(x, y, cfg.sigma);
}

std::string MmdReport::csv() const
{
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "attribute,score\nPos,%.6f\nHeading,%.6f\nSpeed,%.6f\nSize,%.6f\n", pos,
                heading, speed, size);
  return buf;
}

std::string MmdReport::table() const
{
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-8s %-8s %-8s %-8s\n%-8.4f %-8.4f %-8.4f %-8.4f\n", "Pos", "Heading",
                "Speed", "Size", pos, heading, speed, size);
  return buf;
}

MmdReport scene_mmd_report(const std::vector<Snapshot> & real,
                           const std::vector<Snapshot> & gen, const MmdConfig & cfg)
{
  if (real.size() != gen.size()) {
    throw AlignError("scene_mmd_report: lists must pair one-to-one");
  }
  if (real.empty()) {
    throw EmptyError("scene_mmd_report: no scenario pairs");
  }
  MmdReport report;
  for (size_t i = 0; i < real.size(); ++i) {
    const AttributeSamples a = collect_attributes(real[i]);
    const AttributeSamples b = collect_attributes(gen[i]);
    if (a.pos.empty() || b.pos.empty()) {
      ++report.skipped;
      continue;
    }
    report.pos += mmd2(to_rows(a.pos), to_rows(b.pos), cfg);
    report.heading += mmd2(to_rows(a.heading), to_rows(b.heading), cfg);
    report.speed += mmd2(to_rows(a.speed), to_rows(b.speed), cfg);
    report.size += mmd2(to_rows(a.size), to_rows(b.size), cfg);
    ++report.pairs;
  }
  if (report.pairs == 0) {
    throw EmptyError("scene_mmd_report: every pair was empty");
  }
  report.pos /= report.pairs;
  report.heading /= report.pairs;
  report.speed /= report.pairs;
  report.size /= report.pairs;
  return report;
}

double scr(const Scenario & scenario, double iou_threshold)
{
  std::vector<char> collides(scenario.tracks.size(), 0);
  int total = 0;
  for (const VehicleTrack & t : scenario.tracks) {
    if (t.first_valid() >= 0) {
      ++total;
    }
  }
  if (total == 0) {
    return 0.0;
  }
  for (int t = 0; t < scenario.horizon; ++t) {
    for (size_t i = 0; i < scenario.tracks.size(); ++i) {
      const VehicleState & a = scenario.tracks[i].states[t];
      if (!a.valid) {
        continue;
      }
      const ObbBox box_a{Vec2{a.x, a.y}, a.heading, a.length, a.width};
      for (size_t j = i + 1; j < scenario.tracks.size(); ++j) {
        if (collides[i] && collides[j]) {
          continue;
        }
        const VehicleState & b = scenario.tracks[j].states[t];
        if (!b.valid) {
          continue;
        }
        const ObbBox box_b{Vec2{b.x, b.y}, b.heading, b.length, b.width};
        if (obb_iou(box_a, box_b) > iou_threshold) {
          collides[i] = 1;
          collides[j] = 1;
        }
      }
    }
  }
  int hit = 0;
  for (size_t i = 0; i < scenario.tracks.size(); ++i) {
    if (collides[i] && scenario.tracks[i].first_valid() >= 0) {
      ++hit;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

std::pair<double, double> ade_fde(const std::vector<Vec2> & pred, const std::vector<Vec2> & gt)
{
  if (pred.size() != gt.size()) {
    throw LengthError("ade_fde: length mismatch");
  }
  if (pred.empty()) {
    throw LengthError("ade_fde: empty sequences");
  }
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    sum += (pred[i] - gt[i]).norm();
  }
  const double ade = sum / static_cast<double>(pred.size());
  const double fde = (pred.back() - gt.back()).norm();
  return {ade, fde};
}

}  // namespace tgen
