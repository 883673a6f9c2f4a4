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

#ifndef TGEN__PLACEMENT_HPP_
#define TGEN__PLACEMENT_HPP_

#include <string>
#include <vector>

#include "tgen/encoder.hpp"
#include "tgen/gmm.hpp"
#include "tgen/rng.hpp"
#include "tgen/scenario.hpp"
#include "tgen/vectorize.hpp"

namespace tgen
{

// Attribute clamps applied to sampled vehicles.
constexpr double kMinVehicleLength = 1.0;
constexpr double kMaxVehicleLength = 15.0;
constexpr double kMinVehicleWidth = 0.5;
constexpr double kMaxVehicleWidth = 4.0;
// Local-position rectangle accepted around a region during sampling.
constexpr double kRegionHalfWidth = 2.5;
constexpr double kRegionMargin = 0.5;
// Attribute draws per region before the region is abandoned.
constexpr int kMaxAttributeResamples = 5;

/// Masked-reconstruction training example: input features with the vehicle
/// part zeroed at the masked rows, plus the ground truth needed by the loss.
struct MaskedExample
{
  int region_count = 0;
  std::vector<double> features;   // region_count x 19, masked rows zeroed
  std::vector<double> occupancy;  // ground-truth m per region
  std::vector<int> masked;        // masked row indices (all occupied in truth)
  // per masked row, aligned with `masked`
  std::vector<double> q;          // 2 per row
  std::vector<double> h;          // 1 per row
  std::vector<double> vel;        // 1 per row
  std::vector<double> bbox;       // 2 per row
};

/// Masks a uniform count in {1, ..., #occupied} of the occupied regions.
/// Throws EmptyError when nothing is occupied.
MaskedExample mask_regions(const std::vector<VectorFeature> & features, Rng & rng);

// ---------------------------------------------------------------------------
// Loss graphs (templated: float in production, double for gradient checks)
// ---------------------------------------------------------------------------

/// One occupancy logit per region.
template <class T, class Store>
int placement_logits_graph(TapeT<T> & tape, Store & store, const ModelConfig & cfg, int v_node)
{
  return mlp_apply(tape, store, "head.place", cfg.place_spec(), v_node);
}

/// Mixture negative log-likelihoods, one row per input row. `raw` is the head
/// output (rows x K*3 or rows x K*6), `target` holds dim values per row.
template <class T>
int gmm_nll_graph(TapeT<T> & tape, int raw, const std::vector<double> & target, int k, int dim)
{
  const int rows = tape.val(raw).rows();
  const int stride = dim == 1 ? 3 : 6;
  if (tape.val(raw).cols() != k * stride) {
    throw ShapeError("gmm_nll_graph: head width mismatch");
  }
  if (static_cast<int>(target.size()) != rows * dim) {
    throw ShapeError("gmm_nll_graph: target size mismatch");
  }

  // (rows x K*stride) -> (rows*K x stride): per-component parameter rows.
  const int flat = tape.reshape(raw, rows * k, stride);
  const int logits = tape.slice_cols(flat, 0, 1);

  // Component log-weights: log-softmax over each row's K logits.
  const int logit_rows = tape.reshape(logits, rows, k);
  const int log_pi = tape.log_softmax_rows(logit_rows);

  // Targets expanded K-fold to align with the flattened component rows.
  auto expand = [&](int col) {
    TensorT<T> t = TensorT<T>::zeros(rows * k, 1);
    for (int r = 0; r < rows; ++r) {
      for (int i = 0; i < k; ++i) {
        t.at(r * k + i, 0) = static_cast<T>(target[r * dim + col]);
      }
    }
    return tape.leaf(std::move(t));
  };

  // Scales carry the training variance floor: sigma_eff^2 = sigma^2 + floor^2.
  auto log_sd = [&](int ls_col) {
    const int ls = tape.clamp(ls_col, T(kLogScaleMin), T(kLogScaleMax));
    const int var = tape.add_scalar(tape.exp_op(tape.scale(ls, T(2))),
                                    T(kTrainSigmaFloor * kTrainSigmaFloor));
    return tape.scale(tape.log_op(var), T(0.5));
  };

  int log_n;  // (rows*K x 1)
  if (dim == 1) {
    const int mu = tape.slice_cols(flat, 1, 2);
    const int lsd = log_sd(tape.slice_cols(flat, 2, 3));
    const int z = tape.mul(tape.sub(expand(0), mu), tape.exp_op(tape.neg(lsd)));
    // -0.5 log(2 pi) - log sigma - z^2 / 2
    log_n = tape.add_scalar(
      tape.sub(tape.neg(tape.scale(tape.square(z), T(0.5))), lsd),
      T(-0.91893853320467274178));
  } else {
    const int mu_x = tape.slice_cols(flat, 1, 2);
    const int mu_y = tape.slice_cols(flat, 2, 3);
    const int lsd_x = log_sd(tape.slice_cols(flat, 3, 4));
    const int lsd_y = log_sd(tape.slice_cols(flat, 4, 5));
    const int rho = tape.scale(tape.tanh_op(tape.slice_cols(flat, 5, 6)), T(kRhoLimit));
    const int zx = tape.mul(tape.sub(expand(0), mu_x), tape.exp_op(tape.neg(lsd_x)));
    const int zy = tape.mul(tape.sub(expand(1), mu_y), tape.exp_op(tape.neg(lsd_y)));
    const int omr2 = tape.add_scalar(tape.neg(tape.square(rho)), T(1));  // 1 - rho^2
    const int quad = tape.sub(tape.add(tape.square(zx), tape.square(zy)),
                              tape.scale(tape.mul(rho, tape.mul(zx, zy)), T(2)));
    // -log(2 pi) - log sx - log sy - 0.5 log(1-rho^2) - quad / (2 (1-rho^2))
    int acc = tape.neg(tape.scale(tape.div(quad, omr2), T(0.5)));
    acc = tape.sub(acc, tape.scale(tape.log_op(omr2), T(0.5)));
    acc = tape.sub(acc, lsd_x);
    acc = tape.sub(acc, lsd_y);
    log_n = tape.add_scalar(acc, T(-1.8378770664093454836));
  }

  // log-likelihood per input row: LSE_k (log pi_k + log N_k); NLL = -that.
  const int joint = tape.add(tape.reshape(log_n, rows, k), log_pi);
  return tape.neg(tape.logsumexp_rows(joint));
}

/// Masked-reconstruction loss: occupancy BCE averaged over every region plus
/// the four attribute NLLs averaged over the masked rows.
template <class T, class Store>
int placement_loss_graph(TapeT<T> & tape, Store & store, const ModelConfig & cfg,
                         const MaskedExample & ex)
{
  const int rows = ex.region_count;
  std::vector<T> feat(ex.features.size());
  for (size_t i = 0; i < ex.features.size(); ++i) {
    feat[i] = static_cast<T>(ex.features[i]);
  }
  const int features = tape.leaf(TensorT<T>::from_rows(rows, kFeatureWidth, feat));
  auto [v, c] = encode_context(tape, store, cfg, features);
  (void)c;

  const int logits = placement_logits_graph(tape, store, cfg, v);
  std::vector<T> occ(rows);
  for (int i = 0; i < rows; ++i) {
    occ[i] = static_cast<T>(ex.occupancy[i]);
  }
  const int bce =
    tape.bce_with_logits(logits, tape.leaf(TensorT<T>::from_rows(rows, 1, occ)));

  if (ex.masked.empty()) {
    return bce;
  }
  const int k = cfg.mixture_components;
  const int gathered = tape.gather_rows(v, ex.masked);
  const int nll_pos = gmm_nll_graph(
    tape, mlp_apply(tape, store, "head.pos", cfg.bivariate_spec(), gathered), ex.q, k, 2);
  const int nll_heading = gmm_nll_graph(
    tape, mlp_apply(tape, store, "head.heading", cfg.univariate_spec(), gathered), ex.h, k, 1);
  const int nll_speed = gmm_nll_graph(
    tape, mlp_apply(tape, store, "head.speed", cfg.univariate_spec(), gathered), ex.vel, k, 1);
  const int nll_size = gmm_nll_graph(
    tape, mlp_apply(tape, store, "head.size", cfg.bivariate_spec(), gathered), ex.bbox, k, 2);
  const int nll =
    tape.mean_all(tape.add(tape.add(nll_pos, nll_heading), tape.add(nll_speed, nll_size)));
  return tape.add(bce, nll);
}

// ---------------------------------------------------------------------------
// Sampling (production, float32)
// ---------------------------------------------------------------------------

/// Forward evaluation of the placement model over one feature matrix.
struct PlacementEval
{
  Tensor logits;       // I x 1
  Tensor raw_pos;      // I x K*6
  Tensor raw_heading;  // I x K*3
  Tensor raw_speed;    // I x K*3
  Tensor raw_size;     // I x K*6
};

PlacementEval eval_placement(const ModelParams & model, const std::vector<double> & features,
                             int region_count);

struct SampledVehicle
{
  int region = -1;
  PlacedVehicle vehicle;
};

/// Draws a region from the softmax over candidate logits, then attributes from
/// that region's mixture heads. Resamples attributes up to kMaxAttributeResamples
/// times when the local position leaves the region rectangle, |h| exceeds pi/2,
/// or the new box overlaps an existing vehicle; then removes the region from
/// `candidates` and redraws. Throws ExhaustedError when no candidate is left.
SampledVehicle sample_vehicle(const PlacementEval & eval, const std::vector<Region> & regions,
                              std::vector<int> & candidates,
                              const std::vector<ObbBox> & existing, Rng & rng,
                              const std::string & id);

struct GenerationResult
{
  Snapshot snapshot;
  bool exhausted = false;  // placement ran out of candidate regions early
};

/// Autoregressive snapshot generation: encode, place one vehicle, re-encode.
/// Existing vehicles (augmentation) count toward the target `n` and seed the
/// context. Deterministic given `seed`.
GenerationResult generate_snapshot(const LaneMap & map, int n, uint64_t seed,
                                   const ModelParams & model,
                                   const Snapshot * existing = nullptr);

}  // namespace tgen

#endif  // TGEN__PLACEMENT_HPP_
