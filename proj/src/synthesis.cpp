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

#include "cylpano/synthesis.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "cylpano/error.hpp"

namespace cylpano {

namespace {

constexpr double kExplainEpsilon = 1e-8;
constexpr int kMaxChannels = 16;

// ---------------------------------------------------------------------------
// Finite-difference stencils. Each stencil is a list of (dy, dx, coeff) taps
// relative to the pixel it belongs to.

struct Tap {
  int offset;
  double coeff;
};

struct AxisTaps {
  std::array<Tap, 3> taps{};
  int count = 0;
};

AxisTaps first_derivative(int i, int n, bool wrap) {
  if (n < 2) return {};
  if (wrap || (i > 0 && i < n - 1)) return {{{{-1, -0.5}, {1, 0.5}}}, 2};
  if (i == 0) return {{{{0, -1.0}, {1, 1.0}}}, 2};
  return {{{{-1, -1.0}, {0, 1.0}}}, 2};
}

AxisTaps second_derivative(int i, int n, bool wrap) {
  if (n < 3) return {};
  if (wrap || (i > 0 && i < n - 1)) {
    return {{{{-1, 1.0}, {0, -2.0}, {1, 1.0}}}, 3};
  }
  if (i == 0) return {{{{0, 1.0}, {1, -2.0}, {2, 1.0}}}, 3};
  return {{{{-2, 1.0}, {-1, -2.0}, {0, 1.0}}}, 3};
}

struct Stencil {
  std::array<std::array<int, 2>, 9> pos{};  // (y, x), already wrapped
  std::array<double, 9> coeff{};
  int count = 0;

  void add(int y, int x, double c) {
    pos[count] = {y, x};
    coeff[count] = c;
    ++count;
  }
};

int wrap_col(int x, int w) {
  const int m = x % w;
  return m < 0 ? m + w : m;
}

// Builds the xx, xy and yy stencils at (y, x). Stencils with no taps are
// unavailable for the grid size.
struct PixelStencils {
  Stencil xx, xy, yy;
};

PixelStencils build_stencils(int y, int x, int h, int w, bool wrap) {
  PixelStencils s;
  const AxisTaps sx = second_derivative(x, w, wrap);
  for (int k = 0; k < sx.count; ++k) {
    s.xx.add(y, wrap_col(x + sx.taps[k].offset, w), sx.taps[k].coeff);
  }
  const AxisTaps sy = second_derivative(y, h, false);
  for (int k = 0; k < sy.count; ++k) {
    s.yy.add(y + sy.taps[k].offset, x, sy.taps[k].coeff);
  }
  const AxisTaps fx = first_derivative(x, w, wrap);
  const AxisTaps fy = first_derivative(y, h, false);
  for (int a = 0; a < fy.count; ++a) {
    for (int b = 0; b < fx.count; ++b) {
      s.xy.add(y + fy.taps[a].offset, wrap_col(x + fx.taps[b].offset, w),
               fy.taps[a].coeff * fx.taps[b].coeff);
    }
  }
  return s;
}

// Returns false if any tap touches an invalid depth.
bool apply(const Stencil& s, const DepthMap& depth, double* value) {
  if (s.count == 0) return false;
  double acc = 0.0;
  for (int k = 0; k < s.count; ++k) {
    const auto [yy, xx] = s.pos[k];
    if (!depth.valid(yy, xx)) return false;
    acc += s.coeff[k] * depth.depth(yy, xx);
  }
  *value = acc;
  return true;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_same_size(const DepthMap& depth, int h, int w, const char* what) {
  if (depth.height() != h || depth.width() != w) {
    std::ostringstream os;
    os << what << ": depth " << depth.height() << "x" << depth.width()
       << " does not match image " << h << "x" << w;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

HorizontalBoundary default_boundary(const CylindricalCamera& cam) {
  return cam.cyclic() ? HorizontalBoundary::kWrap
                      : HorizontalBoundary::kInvalid;
}

bool warp_pixel(const Panorama& source, const CylindricalCamera& cam, int x,
                int y, double depth, const RigidMotion& motion,
                HorizontalBoundary boundary, std::span<double> out,
                bool extrapolate) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    std::fill(out.begin(), out.begin() + source.channels(), 0.0);
    return false;
  }
  const CylCoord q = cam.from_pixel(x, y);
  const Eigen::Vector3d p(depth * std::sin(q.theta), depth * q.h,
                          depth * std::cos(q.theta));
  const Eigen::Vector3d ps = motion.rotation * p + motion.translation;
  const double r2 = ps.x() * ps.x() + ps.z() * ps.z();
  if (!(r2 > 0.0)) {
    std::fill(out.begin(), out.begin() + source.channels(), 0.0);
    return false;
  }
  const double r = std::sqrt(r2);
  const PixelCoord px = cam.to_pixel({std::atan2(ps.x(), ps.z()), ps.y() / r});
  return sample_bilinear(source, px.x, px.y, boundary, out, extrapolate);
}

WarpResult inverse_warp(const Panorama& source, const DepthMap& target_depth,
                        const Pose& pose_source_in_target,
                        const CylindricalCamera& cam) {
  return inverse_warp(source, target_depth, pose_source_in_target, cam,
                      default_boundary(cam));
}

WarpResult inverse_warp(const Panorama& source, const DepthMap& target_depth,
                        const Pose& pose_source_in_target,
                        const CylindricalCamera& cam,
                        HorizontalBoundary boundary) {
  if (source.height() != cam.height() || source.width() != cam.width()) {
    throw InvalidArgument("inverse_warp: source size does not match camera");
  }
  check_same_size(target_depth, source.height(), source.width(),
                  "inverse_warp");
  if (source.channels() > kMaxChannels) {
    throw InvalidArgument("inverse_warp: too many channels");
  }
  const RigidMotion motion(pose_source_in_target);
  WarpResult result{Panorama(source.height(), source.width(), source.channels(),
                             source.cyclic()),
                    Mask(source.height(), source.width())};
  std::array<double, kMaxChannels> value{};
  for (int y = 0; y < source.height(); ++y) {
    for (int x = 0; x < source.width(); ++x) {
      if (!target_depth.valid(y, x)) continue;
      const bool ok = warp_pixel(source, cam, x, y, target_depth.depth(y, x),
                                 motion, boundary, value);
      if (!ok) continue;
      result.valid.set(y, x, true);
      for (int c = 0; c < source.channels(); ++c) {
        result.image.at(y, x, c) = value[c];
      }
    }
  }
  return result;
}

PhotometricLoss photometric_loss(const Panorama& target,
                                 const Panorama& synthesized, const Mask& valid,
                                 const ExplainabilityMask* mask) {
  if (!target.same_shape(synthesized) || valid.height() != target.height() ||
      valid.width() != target.width()) {
    throw InvalidArgument("photometric_loss: dimension mismatch");
  }
  if (mask && (mask->height() != target.height() ||
               mask->width() != target.width())) {
    throw InvalidArgument("photometric_loss: mask dimension mismatch");
  }
  const int nc = target.channels();
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!valid(y, x)) continue;
      double diff = 0.0;
      for (int c = 0; c < nc; ++c) {
        diff += std::abs(synthesized.at(y, x, c) - target.at(y, x, c));
      }
      const double e = mask ? (*mask)(y, x) : 1.0;
      sum += e * (diff / nc);
      ++n;
    }
  }
  PhotometricLoss loss;
  loss.valid_pixels = n;
  loss.no_valid_pixels = n == 0;
  loss.value = n == 0 ? 0.0 : sum / static_cast<double>(n);
  return loss;
}

std::vector<double> smooth_terms_2nd(const DepthMap& depth, bool wrap) {
  const int h = depth.height();
  const int w = depth.width();
  std::vector<double> terms(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(y, x)) continue;
      const PixelStencils s = build_stencils(y, x, h, w, wrap);
      double v = 0.0;
      double acc = 0.0;
      if (apply(s.xx, depth, &v)) acc += std::abs(v);
      if (apply(s.xy, depth, &v)) acc += 2.0 * std::abs(v);  // Dxy and Dyx
      if (apply(s.yy, depth, &v)) acc += std::abs(v);
      terms[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return terms;
}

double smooth_loss_2nd(const DepthMap& depth, bool wrap) {
  if (depth.height() < 3 || depth.width() < 3) {
    throw InvalidArgument("smooth_loss_2nd needs a depth map of at least 3x3");
  }
  return smooth_loss_and_gradient(depth, nullptr, SmoothKind::kSecondOrder,
                                  wrap, nullptr);
}

std::vector<double> image_edge_weights(const Panorama& img) {
  const int h = img.height();
  const int w = img.width();
  const int nc = img.channels();
  const bool wrap = img.cyclic();
  std::vector<double> weights(static_cast<std::size_t>(h) * w, 1.0);
  for (int y = 0; y < h; ++y) {
    const AxisTaps sy = second_derivative(y, h, false);
    for (int x = 0; x < w; ++x) {
      const AxisTaps sx = second_derivative(x, w, wrap);
      double mag = 0.0;
      for (int c = 0; c < nc; ++c) {
        double lap = 0.0;
        for (int k = 0; k < sx.count; ++k) {
          lap += sx.taps[k].coeff *
                 img.at(y, wrap_col(x + sx.taps[k].offset, w), c);
        }
        for (int k = 0; k < sy.count; ++k) {
          lap += sy.taps[k].coeff * img.at(y + sy.taps[k].offset, x, c);
        }
        mag += std::abs(lap);
      }
      weights[static_cast<std::size_t>(y) * w + x] = std::exp(-mag / nc);
    }
  }
  return weights;
}

double smooth_loss_image_aware(const DepthMap& depth, const Panorama& img) {
  check_same_size(depth, img.height(), img.width(), "smooth_loss_image_aware");
  return smooth_loss_and_gradient(depth, &img, SmoothKind::kImageAware,
                                  img.cyclic(), nullptr);
}

double smooth_loss_and_gradient(const DepthMap& depth, const Panorama* image,
                                SmoothKind kind, bool wrap,
                                std::vector<double>* gradient) {
  const int h = depth.height();
  const int w = depth.width();
  std::vector<double> edge;
  if (kind == SmoothKind::kImageAware) {
    if (image == nullptr) {
      throw InvalidArgument("image-aware smoothness needs an image");
    }
    check_same_size(depth, image->height(), image->width(), "smoothness");
    edge = image_edge_weights(*image);
  }
  const double xy_weight = kind == SmoothKind::kSecondOrder ? 2.0 : 1.0;

  const std::size_t n_valid = depth.validity().count();
  if (gradient) gradient->assign(static_cast<std::size_t>(h) * w, 0.0);
  if (n_valid == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n_valid);

  double sum = 0.0;
  auto accumulate = [&](const Stencil& s, double weight) {
    double v = 0.0;
    if (!apply(s, depth, &v)) return 0.0;
    if (gradient) {
      const double g = weight * sign(v) * inv_n;
      for (int k = 0; k < s.count; ++k) {
        (*gradient)[static_cast<std::size_t>(s.pos[k][0]) * w + s.pos[k][1]] +=
            g * s.coeff[k];
      }
    }
    return weight * std::abs(v);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(y, x)) continue;
      const double pw =
          edge.empty() ? 1.0 : edge[static_cast<std::size_t>(y) * w + x];
      const PixelStencils s = build_stencils(y, x, h, w, wrap);
      double acc = 0.0;
      acc += accumulate(s.xx, pw);
      acc += accumulate(s.xy, pw * xy_weight);
      acc += accumulate(s.yy, pw);
      sum += acc;
    }
  }
  return sum * inv_n;
}

double explainability_loss(const ExplainabilityMask& mask) {
  const auto weights = mask.weights();
  if (weights.empty()) return 0.0;
  double sum = 0.0;
  for (double e : weights) sum += -std::log(e + kExplainEpsilon);
  return sum / static_cast<double>(weights.size());
}

void LossWeights::validate() const {
  if (!(lambda_s >= 0.0) || !(lambda_e >= 0.0) || !(lambda_m >= 0.0)) {
    throw InvalidArgument("loss weights must be non-negative");
  }
  if (scales < 1) throw InvalidArgument("loss needs at least one scale");
}

LossProblem::LossProblem(Panorama target, std::vector<Panorama> sources,
                         const CylindricalCamera& cam,
                         const LossWeights& weights,
                         std::vector<ExplainabilityMask> masks,
                         std::optional<HorizontalBoundary> boundary)
    : weights_(weights), boundary_(boundary.value_or(default_boundary(cam))) {
  weights_.validate();
  if (target.height() != cam.height() || target.width() != cam.width()) {
    throw InvalidArgument("target size does not match camera");
  }
  if (target.channels() > kMaxChannels) {
    throw InvalidArgument("too many channels");
  }
  for (const Panorama& s : sources) {
    if (!s.same_shape(target)) {
      throw InvalidArgument("sources must share the target's dimensions");
    }
  }
  if (!masks.empty() && masks.size() != sources.size()) {
    throw InvalidArgument("need one explainability mask per source");
  }
  for (const ExplainabilityMask& m : masks) {
    if (m.height() != target.height() || m.width() != target.width()) {
      throw InvalidArgument("explainability mask size does not match target");
    }
  }

  for (int s = 0; s < weights_.scales; ++s) {
    cameras_.push_back(cam.downscaled(s));
  }
  target_ = downsample_pyramid(target, weights_.scales);
  for (const Panorama& src : sources) {
    sources_.push_back(downsample_pyramid(src, weights_.scales));
  }
  for (ExplainabilityMask& m : masks) {
    std::vector<ExplainabilityMask> levels{std::move(m)};
    for (int s = 1; s < weights_.scales; ++s) {
      levels.push_back(downsample_mask(levels.back()));
    }
    masks_.push_back(std::move(levels));
  }
}

const ExplainabilityMask* LossProblem::mask(std::size_t k, int scale) const {
  return masks_.empty() ? nullptr : &masks_[k][scale];
}

PhotometricLoss LossProblem::pixel_loss(std::size_t k, int scale,
                                        const DepthMap& depth, const Pose& pose,
                                        const Mask* frozen, Mask* used) const {
  const Panorama& tgt = target_[scale];
  const Panorama& src = sources_[k][scale];
  const CylindricalCamera& cam = cameras_[scale];
  check_same_size(depth, tgt.height(), tgt.width(), "pixel_loss");
  const ExplainabilityMask* m = mask(k, scale);
  const RigidMotion motion(pose);
  const int nc = tgt.channels();
  std::array<double, kMaxChannels> value{};
  if (used) *used = Mask(tgt.height(), tgt.width());

  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < tgt.height(); ++y) {
    for (int x = 0; x < tgt.width(); ++x) {
      if (!depth.valid(y, x)) continue;
      if (frozen && !(*frozen)(y, x)) continue;
      if (!warp_pixel(src, cam, x, y, depth.depth(y, x), motion, boundary_,
                      value, frozen != nullptr)) {
        continue;
      }
      if (used) used->set(y, x, true);
      double diff = 0.0;
      for (int c = 0; c < nc; ++c) diff += std::abs(value[c] - tgt.at(y, x, c));
      const double e = m ? (*m)(y, x) : 1.0;
      sum += e * (diff / nc);
      ++n;
    }
  }
  PhotometricLoss loss;
  loss.valid_pixels = n;
  loss.no_valid_pixels = n == 0;
  loss.value = n == 0 ? 0.0 : sum / static_cast<double>(n);
  return loss;
}

LossBreakdown LossProblem::evaluate(std::span<const DepthMap> depths,
                                    std::span<const Pose> poses,
                                    int first_scale, const ValiditySet* frozen,
                                    ValiditySet* used) const {
  if (first_scale < 0 || first_scale >= weights_.scales) {
    throw InvalidArgument("first scale out of range");
  }
  if (depths.size() != static_cast<std::size_t>(weights_.scales - first_scale)) {
    std::ostringstream os;
    os << "depth pyramid has " << depths.size() << " levels, expected "
       << (weights_.scales - first_scale);
    throw InvalidArgument(os.str());
  }
  if (poses.size() != sources_.size()) {
    throw InvalidArgument("need one pose per source");
  }

  if (used) used->assign(weights_.scales, std::vector<Mask>(sources_.size()));

  LossBreakdown out;
  out.per_scale.assign(weights_.scales, LossTerms{});
  for (int s = first_scale; s < weights_.scales; ++s) {
    const DepthMap& depth = depths[s - first_scale];
    LossTerms& terms = out.per_scale[s];
    for (std::size_t k = 0; k < sources_.size(); ++k) {
      const PhotometricLoss pl =
          pixel_loss(k, s, depth, poses[k], frozen ? &(*frozen)[s][k] : nullptr,
                     used ? &(*used)[s][k] : nullptr);
      out.no_valid_pixels = out.no_valid_pixels || pl.no_valid_pixels;
      terms.pixel += pl.value;
      if (const ExplainabilityMask* m = mask(k, s)) {
        terms.explain += explainability_loss(*m);
      }
    }
    terms.smooth = smooth_loss_and_gradient(depth, &target_[s], weights_.smooth,
                                            cameras_[s].cyclic(), nullptr);
    terms.total = terms.pixel + weights_.smooth_weight() * terms.smooth +
                  weights_.lambda_e * terms.explain;
    out.pixel += terms.pixel;
    out.smooth += terms.smooth;
    out.explain += terms.explain;
    out.total += terms.total;
  }
  return out;
}

LossBreakdown LossProblem::evaluate(const DepthMap& depth,
                                    std::span<const Pose> poses,
                                    int first_scale) const {
  const std::vector<DepthMap> pyramid =
      depth_pyramid(depth, weights_.scales - first_scale);
  return evaluate(pyramid, poses, first_scale);
}

LossBreakdown total_loss(const Panorama& target,
                         std::span<const Panorama> sources,
                         std::span<const DepthMap> depth_pyramid,
                         std::span<const Pose> poses,
                         const CylindricalCamera& cam,
                         const LossWeights& weights,
                         std::span<const ExplainabilityMask> masks) {
  LossProblem problem(
      target, std::vector<Panorama>(sources.begin(), sources.end()), cam,
      weights, std::vector<ExplainabilityMask>(masks.begin(), masks.end()));
  return problem.evaluate(depth_pyramid, poses);
}

}  // namespace cylpano
