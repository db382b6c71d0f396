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

#include "cylpano/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Geometry>

#include "cylpano/error.hpp"

namespace cylpano {

double normalize_angle(double theta) {
  double t = theta - kTwoPi * std::floor((theta + kPi) / kTwoPi);
  // Rounding can land exactly on +pi.
  if (t >= kPi) t -= kTwoPi;
  if (t < -kPi) t += kTwoPi;
  return t;
}

CylindricalCamera::CylindricalCamera(int width_px, int height_px, double h_min,
                                     double h_max, double fov,
                                     double center_azimuth)
    : width_px_(width_px),
      height_px_(height_px),
      h_min_(h_min),
      h_max_(h_max),
      fov_(fov),
      center_azimuth_(center_azimuth) {
  if (width_px < 2 || height_px < 1) {
    std::ostringstream os;
    os << "cylindrical camera needs width >= 2 and height >= 1, got "
       << width_px << "x" << height_px;
    throw InvalidArgument(os.str());
  }
  if (!(h_min < h_max) || !std::isfinite(h_min) || !std::isfinite(h_max)) {
    throw InvalidArgument("cylindrical camera needs finite h_min < h_max");
  }
  if (!(fov > 0.0 && fov <= kTwoPi)) {
    throw InvalidArgument("cylindrical camera fov must lie in (0, 2*pi]");
  }
  if (!std::isfinite(center_azimuth)) {
    throw InvalidArgument("cylindrical camera center azimuth must be finite");
  }
  cyclic_ = fov == kTwoPi;
}

CylindricalCamera CylindricalCamera::with_square_pixels(int width_px,
                                                        int height_px) {
  if (width_px < 2) {
    throw InvalidArgument("cylindrical camera needs width >= 2");
  }
  const double h = kPi * height_px / width_px;
  return CylindricalCamera(width_px, height_px, -h, h);
}

PixelCoord CylindricalCamera::to_pixel(const CylCoord& q) const {
  const double rel = normalize_angle(q.theta - center_azimuth_);
  return {(rel / fov_ + 0.5) * width_px_,
          (h_max_ - q.h) / (h_max_ - h_min_) * height_px_};
}

CylCoord CylindricalCamera::from_pixel(double x, double y) const {
  return {normalize_angle(center_azimuth_ + (x / width_px_ - 0.5) * fov_),
          h_max_ - y / height_px_ * (h_max_ - h_min_)};
}

CylindricalCamera CylindricalCamera::downscaled(int levels) const {
  const int f = 1 << levels;
  if (width_px_ % f != 0 || height_px_ % f != 0) {
    throw InvalidArgument("camera size is not divisible by 2^levels");
  }
  CylindricalCamera cam(width_px_ / f, height_px_ / f, h_min_, h_max_, fov_,
                        center_azimuth_);
  cam.cyclic_ = cyclic_;
  return cam;
}

CylindricalCamera CylindricalCamera::cropped(int first_column,
                                             int count) const {
  if (!cyclic()) throw InvalidArgument("only full panoramas can be cropped");
  if (count < 2 || count > width_px_) {
    throw InvalidArgument("crop width out of range");
  }
  const double fov = kTwoPi * count / width_px_;
  const double center = normalize_angle(
      ((first_column + 0.5 * count) / width_px_ - 0.5) * kTwoPi);
  CylindricalCamera cam(count, height_px_, h_min_, h_max_, fov, center);
  // Even a full 360 degree crop is treated as an ordinary bounded image.
  cam.cyclic_ = false;
  return cam;
}

void PinholeCamera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("pinhole focal lengths must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw InvalidArgument("pinhole principal point must be finite");
  }
  if (width_px < 1 || height_px < 1) {
    throw InvalidArgument("pinhole image size must be positive");
  }
}

Eigen::Matrix3d euler_to_matrix(const Eigen::Vector3d& r) {
  const Eigen::Matrix3d rx =
      Eigen::AngleAxisd(r.x(), Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Matrix3d ry =
      Eigen::AngleAxisd(r.y(), Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d rz =
      Eigen::AngleAxisd(r.z(), Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return rx * ry * rz;
}

Eigen::Vector3d matrix_to_euler(const Eigen::Matrix3d& m) {
  // m = Rx(a) Ry(b) Rz(c):
  //   m(0,2) = sin b, m(0,0) = cos b cos c, m(0,1) = -cos b sin c,
  //   m(1,2) = -sin a cos b, m(2,2) = cos a cos b.
  const double sb = std::clamp(m(0, 2), -1.0, 1.0);
  const double cb = std::hypot(m(0, 0), m(0, 1));
  const double b = std::atan2(sb, cb);
  if (cb > 1e-12) {
    return {std::atan2(-m(1, 2), m(2, 2)), b, std::atan2(-m(0, 1), m(0, 0))};
  }
  // Gimbal lock: only a +/- c is determined; put it all in a.
  return {std::atan2(m(1, 0), m(1, 1)), b, 0.0};
}

Pose Pose::from_vector(const std::array<double, 6>& v) {
  Pose p;
  p.translation = {v[0], v[1], v[2]};
  p.rotation = {v[3], v[4], v[5]};
  return p;
}

Pose Pose::from_matrix(const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation) {
  Pose p;
  p.translation = translation;
  p.rotation = matrix_to_euler(rotation);
  return p;
}

std::array<double, 6> Pose::to_vector() const {
  return {translation.x(), translation.y(), translation.z(),
          rotation.x(),    rotation.y(),    rotation.z()};
}

Eigen::Matrix3d Pose::rotation_matrix() const {
  return euler_to_matrix(rotation);
}

Pose Pose::inverse() const {
  const Eigen::Matrix3d rt = rotation_matrix().transpose();
  return from_matrix(rt, -(rt * translation));
}

Pose Pose::operator*(const Pose& other) const {
  const Eigen::Matrix3d r = rotation_matrix();
  return from_matrix(r * other.rotation_matrix(),
                     r * other.translation + translation);
}

Point3 pose_transform(const Pose& pose, const Point3& p) {
  return pose.rotation_matrix() * p + pose.translation;
}

CylProjection cyl_project(const Point3& p) {
  const double r2 = p.x() * p.x() + p.z() * p.z();
  if (!(r2 > 0.0)) {
    throw DegeneratePoint("point lies on the cylinder axis");
  }
  const double r = std::sqrt(r2);
  return {{std::atan2(p.x(), p.z()), p.y() / r}, r};
}

Point3 cyl_unproject(const CylCoord& q, double depth) {
  if (!(depth > 0.0)) {
    std::ostringstream os;
    os << "depth must be positive, got " << depth;
    throw InvalidDepth(os.str());
  }
  return {depth * std::sin(q.theta), depth * q.h, depth * std::cos(q.theta)};
}

PixelCoord cyl_to_pixel(const CylCoord& q, const CylindricalCamera& cam) {
  return cam.to_pixel(q);
}

CylCoord pixel_to_cyl(double x, double y, const CylindricalCamera& cam) {
  return cam.from_pixel(x, y);
}

PixelCoord pinhole_project(const Point3& p, const PinholeCamera& cam) {
  if (!(p.z() > 0.0)) {
    throw BehindCamera("point is behind the pinhole camera");
  }
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

Point3 pinhole_unproject(double x, double y, double depth,
                         const PinholeCamera& cam) {
  if (!(depth > 0.0)) throw InvalidDepth("pinhole depth must be positive");
  return {(x - cam.cx) / cam.fx * depth, (y - cam.cy) / cam.fy * depth, depth};
}

}  // namespace cylpano
