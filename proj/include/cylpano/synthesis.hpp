// Copyright 2026 The Cylpano Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// View synthesis by inverse warping, and the multi-scale training objective:
//
//   L = sum_scales ( sum_sources L_pixel + w_smooth * L_smooth
//                    + sum_sources lambda_e * L_exp )
//
// where w_smooth is lambda_s for the second-order depth smoothness term or
// lambda_m for the image-aware variant.

#ifndef CYLPANO_SYNTHESIS_HPP_
#define CYLPANO_SYNTHESIS_HPP_

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cylpano/geometry.hpp"
#include "cylpano/panorama.hpp"

namespace cylpano {

struct WarpResult {
  Panorama image;
  Mask valid;
};

// Rigid transform in matrix form, for inner loops.
struct RigidMotion {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;

  explicit RigidMotion(const Pose& pose)
      : rotation(pose.rotation_matrix()), translation(pose.translation) {}
};

// Default sampler boundary for a camera: wrap for full panoramas, invalid
// outside the image for crops.
HorizontalBoundary default_boundary(const CylindricalCamera& cam);

// Synthesizes target pixel (x, y) from `source` given its target-frame depth.
// Returns false when the sample is invalid. `extrapolate` is forwarded to
// the sampler.
bool warp_pixel(const Panorama& source, const CylindricalCamera& cam, int x,
                int y, double depth, const RigidMotion& motion,
                HorizontalBoundary boundary, std::span<double> out,
                bool extrapolate = false);

// Pulls every target pixel from `source`: unproject with the target depth,
// move into the source frame with `pose_source_in_target`, project, sample.
WarpResult inverse_warp(const Panorama& source, const DepthMap& target_depth,
                        const Pose& pose_source_in_target,
                        const CylindricalCamera& cam);
WarpResult inverse_warp(const Panorama& source, const DepthMap& target_depth,
                        const Pose& pose_source_in_target,
                        const CylindricalCamera& cam,
                        HorizontalBoundary boundary);

struct PhotometricLoss {
  double value = 0.0;
  std::size_t valid_pixels = 0;
  // Set when no pixel was valid; `value` is then 0.
  bool no_valid_pixels = false;
};

// Mean over valid pixels of E * mean_c |synth - target|. E = 1 without mask.
PhotometricLoss photometric_loss(const Panorama& target,
                                 const Panorama& synthesized, const Mask& valid,
                                 const ExplainabilityMask* mask = nullptr);

// Per-pixel |Dxx| + |Dxy| + |Dyx| + |Dyy|; pixels whose stencils touch an
// invalid depth contribute only the terms that are fully valid. Horizontal
// differences wrap when `wrap` is set; borders use one-sided stencils.
std::vector<double> smooth_terms_2nd(const DepthMap& depth, bool wrap = true);

// Mean of smooth_terms_2nd over valid pixels. Requires H, W >= 3.
double smooth_loss_2nd(const DepthMap& depth, bool wrap = true);

// exp(-mean_c |laplacian(I)|) per pixel.
std::vector<double> image_edge_weights(const Panorama& img);

// Mean over valid pixels of edge_weight * (|Dxx| + |Dxy| + |Dyy|).
double smooth_loss_image_aware(const DepthMap& depth, const Panorama& img);

// Mean of -log(E + 1e-8): cross-entropy of the mask against the label 1.
double explainability_loss(const ExplainabilityMask& mask);

enum class SmoothKind { kSecondOrder, kImageAware };

struct LossWeights {
  double lambda_s = 2.0;
  double lambda_e = 0.0;
  double lambda_m = 0.2;
  int scales = 4;
  SmoothKind smooth = SmoothKind::kSecondOrder;

  void validate() const;
  double smooth_weight() const {
    return smooth == SmoothKind::kSecondOrder ? lambda_s : lambda_m;
  }
};

struct LossTerms {
  double pixel = 0.0;
  double smooth = 0.0;
  double explain = 0.0;
  double total = 0.0;
};

struct LossBreakdown : LossTerms {
  std::vector<LossTerms> per_scale;  // index = scale
  bool no_valid_pixels = false;      // some (scale, source) had no valid pixel
};

// Smoothness value and, optionally, its subgradient w.r.t. every depth value
// (zero at invalid pixels). `image` is required for the image-aware kind.
double smooth_loss_and_gradient(const DepthMap& depth, const Panorama* image,
                                SmoothKind kind, bool wrap,
                                std::vector<double>* gradient);

// Precomputed image and mask pyramids for repeated objective evaluation.
class LossProblem {
 public:
  LossProblem(Panorama target, std::vector<Panorama> sources,
              const CylindricalCamera& cam, const LossWeights& weights,
              std::vector<ExplainabilityMask> masks = {},
              std::optional<HorizontalBoundary> boundary = std::nullopt);

  int scales() const { return weights_.scales; }
  std::size_t num_sources() const { return sources_.size(); }
  const LossWeights& weights() const { return weights_; }
  const CylindricalCamera& camera(int scale) const { return cameras_[scale]; }
  const Panorama& target(int scale) const { return target_[scale]; }
  const Panorama& source(std::size_t k, int scale) const {
    return sources_[k][scale];
  }
  const ExplainabilityMask* mask(std::size_t k, int scale) const;
  HorizontalBoundary boundary() const { return boundary_; }

  // Valid-pixel masks per [scale][source].
  using ValiditySet = std::vector<std::vector<Mask>>;

  // `depths[i]` is the depth at scale first_scale + i; scales below
  // `first_scale` are skipped.
  //
  // `used` receives the pixels that entered each photometric mean. With
  // `frozen`, exactly those pixels are used instead and samples that leave
  // the source continue its edge linearly; this keeps the objective smooth
  // for finite differencing.
  LossBreakdown evaluate(std::span<const DepthMap> depths,
                         std::span<const Pose> poses, int first_scale = 0,
                         const ValiditySet* frozen = nullptr,
                         ValiditySet* used = nullptr) const;
  // Builds the depth pyramid from the depth at `first_scale`.
  LossBreakdown evaluate(const DepthMap& depth, std::span<const Pose> poses,
                         int first_scale = 0) const;

  // Photometric loss of one source at one scale.
  PhotometricLoss pixel_loss(std::size_t source, int scale,
                             const DepthMap& depth, const Pose& pose,
                             const Mask* frozen = nullptr,
                             Mask* used = nullptr) const;

 private:
  LossWeights weights_;
  HorizontalBoundary boundary_;
  std::vector<CylindricalCamera> cameras_;
  std::vector<Panorama> target_;
  std::vector<std::vector<Panorama>> sources_;
  std::vector<std::vector<ExplainabilityMask>> masks_;
};

// One-shot evaluation of the objective. `depth_pyramid` must hold
// `weights.scales` levels; `masks` is empty or one per source.
LossBreakdown total_loss(const Panorama& target,
                         std::span<const Panorama> sources,
                         std::span<const DepthMap> depth_pyramid,
                         std::span<const Pose> poses,
                         const CylindricalCamera& cam,
                         const LossWeights& weights,
                         std::span<const ExplainabilityMask> masks = {});

}  // namespace cylpano

#endif  // CYLPANO_SYNTHESIS_HPP_
