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

#include "cylpano/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Geometry>

#include "cylpano/error.hpp"

namespace cylpano {

namespace {

constexpr double kQuarterTurn = kPi / 2.0;

int nearest_view(double theta) {
  int best = 0;
  double best_dist = std::abs(normalize_angle(theta));
  for (int k = 1; k < 4; ++k) {
    const double d = std::abs(normalize_angle(theta - k * kQuarterTurn));
    if (d < best_dist) {
      best = k;
      best_dist = d;
    }
  }
  return best;
}

double to_degrees(double rad) { return rad * 180.0 / kPi; }

}  // namespace

Panorama stitch_pinhole_to_cylinder(const PinholeRig& rig,
                                    const CylindricalCamera& out_cam) {
  rig.camera.validate();
  const int nc = rig.views[0].channels();
  for (const Panorama& v : rig.views) {
    if (v.height() != rig.camera.height_px || v.width() != rig.camera.width_px ||
        v.channels() != nc) {
      throw InvalidArgument("stitch: every view must match the rig camera "
                            "size and share a channel count");
    }
  }

  std::array<Eigen::Matrix3d, 4> to_view;
  for (int k = 0; k < 4; ++k) {
    to_view[k] = Eigen::AngleAxisd(-k * kQuarterTurn, Eigen::Vector3d::UnitY())
                     .toRotationMatrix();
  }

  const double w = rig.camera.width_px;
  const double h = rig.camera.height_px;
  Panorama out(out_cam.height(), out_cam.width(), nc, out_cam.cyclic());
  std::vector<double> value(nc);
  for (int y = 0; y < out_cam.height(); ++y) {
    for (int x = 0; x < out_cam.width(); ++x) {
      const CylCoord q = out_cam.from_pixel(x, y);
      const int k = nearest_view(q.theta);
      const Eigen::Vector3d ray(std::sin(q.theta), q.h, std::cos(q.theta));
      const PixelCoord px = pinhole_project(to_view[k] * ray, rig.camera);
      if (px.x < -0.5 || px.x > w - 0.5 || px.y < -0.5 || px.y > h - 0.5) {
        std::ostringstream os;
        os << "stitch: view " << k << " does not cover azimuth "
           << to_degrees(q.theta) << " deg at height " << q.h;
        throw CoverageError(os.str(), q.theta);
      }
      const double sx = std::clamp(px.x, 0.0, w - 1.0);
      const double sy = std::clamp(px.y, 0.0, h - 1.0);
      sample_bilinear(rig.views[k], sx, sy, HorizontalBoundary::kClamp, value);
      for (int c = 0; c < nc; ++c) out.at(y, x, c) = value[c];
    }
  }
  return out;
}

Panorama equirect_to_cylinder(const Panorama& equirect,
                              const CylindricalCamera& out_cam) {
  const double we = equirect.width();
  const double he = equirect.height();
  Panorama out(out_cam.height(), out_cam.width(), equirect.channels(),
               out_cam.cyclic());
  std::vector<double> value(equirect.channels());
  for (int y = 0; y < out_cam.height(); ++y) {
    for (int x = 0; x < out_cam.width(); ++x) {
      const CylCoord q = out_cam.from_pixel(x, y);
      const double lat = std::atan(q.h);
      const double ex = (q.theta / kTwoPi + 0.5) * we;
      const double ey = std::clamp((kPi / 2.0 - lat) / kPi * he, 0.0, he - 1.0);
      sample_bilinear(equirect, ex, ey, HorizontalBoundary::kWrap, value);
      for (int c = 0; c < equirect.channels(); ++c) out.at(y, x, c) = value[c];
    }
  }
  return out;
}

Panorama cylinder_to_equirect(const Panorama& cylinder,
                              const CylindricalCamera& cam, int out_height,
                              int out_width, Mask* covered) {
  if (cylinder.height() != cam.height() || cylinder.width() != cam.width()) {
    throw InvalidArgument("cylinder_to_equirect: image does not match camera");
  }
  Panorama out(out_height, out_width, cylinder.channels(), true);
  if (covered) *covered = Mask(out_height, out_width);
  std::vector<double> value(cylinder.channels());
  for (int y = 0; y < out_height; ++y) {
    const double lat = kPi / 2.0 - static_cast<double>(y) / out_height * kPi;
    if (std::abs(lat) >= kPi / 2.0) continue;
    for (int x = 0; x < out_width; ++x) {
      const double theta = (static_cast<double>(x) / out_width - 0.5) * kTwoPi;
      const PixelCoord px = cam.to_pixel({theta, std::tan(lat)});
      if (!sample_bilinear(cylinder, px.x, px.y, HorizontalBoundary::kWrap,
                           value)) {
        continue;
      }
      if (covered) covered->set(y, x, true);
      for (int c = 0; c < cylinder.channels(); ++c) out.at(y, x, c) = value[c];
    }
  }
  return out;
}

std::vector<int> detect_static_frames(std::span<const Pose> trajectory,
                                      const StaticThresholds& thresholds) {
  std::vector<int> out;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const Pose& a = trajectory[i - 1];
    const Pose& b = trajectory[i];
    const double dt = (b.translation - a.translation).norm();
    const Eigen::Matrix3d rel =
        a.rotation_matrix().transpose() * b.rotation_matrix();
    const double cos_angle = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double dr = std::acos(cos_angle);
    if (dt < thresholds.translation && dr < thresholds.rotation) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

Crop crop_fov(const Panorama& pano, const CylindricalCamera& cam,
              double fov_deg, double center_azimuth_deg) {
  if (!(fov_deg > 0.0 && fov_deg <= 360.0)) {
    std::ostringstream os;
    os << "crop: fov " << fov_deg << " deg outside (0, 360]";
    throw InvalidArgument(os.str());
  }
  if (!pano.cyclic() || !cam.cyclic()) {
    throw InvalidArgument("crop: input must be a full cyclic panorama");
  }
  if (pano.height() != cam.height() || pano.width() != cam.width()) {
    throw InvalidArgument("crop: image does not match camera");
  }
  const int w = pano.width();
  const int count = static_cast<int>(std::lround(fov_deg / 360.0 * w));
  if (count < 2) throw InvalidArgument("crop: fov narrower than two columns");
  const double center_col = (center_azimuth_deg / 360.0 + 0.5) * w;
  const int first = static_cast<int>(std::floor(center_col - 0.5 * count + 0.5));
  Crop crop{extract_columns(pano, first, count), cam.cropped(first, count),
            ((first % w) + w) % w};
  crop.image.set_cyclic(false);
  return crop;
}

DepthMap crop_depth(const DepthMap& depth, const Crop& crop) {
  const int w = depth.width();
  const int count = crop.image.width();
  DepthMap out(depth.height(), count, 0.0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < count; ++x) {
      const int src = (crop.first_column + x) % w;
      if (depth.valid(y, src)) out.set(y, x, depth.depth(y, src));
    }
  }
  return out;
}

SequencePlan make_sequences(std::span<const int> frame_ids, int seq_len,
                            int stride) {
  if (seq_len < 3 || seq_len % 2 == 0) {
    throw InvalidArgument("sequence length must be odd and >= 3");
  }
  if (stride < 1) throw InvalidArgument("sequence stride must be >= 1");
  SequencePlan plan;
  const int n = static_cast<int>(frame_ids.size());
  if (n < seq_len) {
    plan.too_few_frames = true;
    return plan;
  }
  for (int start = 0; start + seq_len <= n; start += stride) {
    bool contiguous = true;
    for (int i = start + 1; i < start + seq_len; ++i) {
      if (frame_ids[i] - frame_ids[i - 1] != 1) {
        contiguous = false;
        break;
      }
    }
    if (!contiguous) continue;
    SequenceWindow win;
    win.target = start + seq_len / 2;
    for (int i = start; i < start + seq_len; ++i) {
      win.frame_ids.push_back(frame_ids[i]);
      if (i != win.target) win.sources.push_back(i);
    }
    plan.windows.push_back(std::move(win));
  }
  return plan;
}

}  // namespace cylpano
