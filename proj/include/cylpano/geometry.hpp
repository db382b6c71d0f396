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

// Camera models (cylindrical and pinhole), rigid-body poses and the transforms
// between pixel, sensor and world frames.
//
// Sensor frame: x right, y down, z forward. The cylinder axis is the sensor y
// axis; azimuth theta is measured from +z towards +x.

#ifndef CYLPANO_GEOMETRY_HPP_
#define CYLPANO_GEOMETRY_HPP_

#include <array>
#include <numbers>

#include <Eigen/Core>

namespace cylpano {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Point3 = Eigen::Vector3d;

// Point on the unit cylinder.
struct CylCoord {
  double theta = 0.0;  // radians, [-pi, pi) after normalization
  double h = 0.0;      // height on the unit cylinder
};

struct CylProjection {
  CylCoord coord;
  double depth = 0.0;  // radial distance sqrt(x^2 + z^2)
};

struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

// Wraps an angle into [-pi, pi).
double normalize_angle(double theta);

// Maps pixels to cylinder coordinates. A full camera spans 2*pi over
// `width_px` columns, with theta = -pi at column 0 and theta = 0 at the
// image center. Row 0 corresponds to h_max.
//
// A camera may also describe a horizontal crop of a full panorama (fov < 2*pi
// centered on `center_azimuth`); such cameras are not cyclic.
class CylindricalCamera {
 public:
  CylindricalCamera(int width_px, int height_px, double h_min, double h_max,
                    double fov = kTwoPi, double center_azimuth = 0.0);

  // Square pixels on the unit cylinder: h_max = -h_min = pi * H / W.
  static CylindricalCamera with_square_pixels(int width_px, int height_px);

  int width() const { return width_px_; }
  int height() const { return height_px_; }
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  double fov() const { return fov_; }
  double center_azimuth() const { return center_azimuth_; }
  bool cyclic() const { return cyclic_; }

  PixelCoord to_pixel(const CylCoord& q) const;
  CylCoord from_pixel(double x, double y) const;

  // Same angular extent at half resolution, `levels` times.
  CylindricalCamera downscaled(int levels) const;

  // Camera of `count` contiguous columns starting at `first_column` (cyclic
  // index into this camera). Requires a cyclic camera.
  CylindricalCamera cropped(int first_column, int count) const;

  bool operator==(const CylindricalCamera&) const = default;

 private:
  int width_px_;
  int height_px_;
  double h_min_;
  double h_max_;
  double fov_;
  double center_azimuth_;
  bool cyclic_ = true;
};

struct PinholeCamera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width_px = 1;
  int height_px = 1;

  // Throws InvalidArgument unless fx, fy > 0 and the principal point is finite.
  void validate() const;
};

// Rotation about z, then y, then x: R = Rx * Ry * Rz.
Eigen::Matrix3d euler_to_matrix(const Eigen::Vector3d& rotation);
Eigen::Vector3d matrix_to_euler(const Eigen::Matrix3d& rotation);

// 6-DoF rigid transform, stored as translation (meters) and z-y-x Euler
// angles (radians). Applying a pose maps p to R * p + t.
struct Pose {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }
  static Pose from_vector(const std::array<double, 6>& v);
  static Pose from_matrix(const Eigen::Matrix3d& rotation,
                          const Eigen::Vector3d& translation);

  // (t_x, t_y, t_z, r_x, r_y, r_z)
  std::array<double, 6> to_vector() const;
  Eigen::Matrix3d rotation_matrix() const;
  Pose inverse() const;
  // (a * b)(p) = a(b(p))
  Pose operator*(const Pose& other) const;
};

Point3 pose_transform(const Pose& pose, const Point3& p);

// theta = atan2(x, z), h = y / r, depth = r with r = sqrt(x^2 + z^2).
// Throws DegeneratePoint for points on the cylinder axis.
CylProjection cyl_project(const Point3& p);

// (d sin(theta), d h, d cos(theta)). Throws InvalidDepth for depth <= 0.
Point3 cyl_unproject(const CylCoord& q, double depth);

PixelCoord cyl_to_pixel(const CylCoord& q, const CylindricalCamera& cam);
CylCoord pixel_to_cyl(double x, double y, const CylindricalCamera& cam);

// Throws BehindCamera for z <= 0.
PixelCoord pinhole_project(const Point3& p, const PinholeCamera& cam);
Point3 pinhole_unproject(double x, double y, double depth,
                         const PinholeCamera& cam);

}  // namespace cylpano

#endif  // CYLPANO_GEOMETRY_HPP_
