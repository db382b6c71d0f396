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

#include <cmath>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "cylpano/error.hpp"
#include "cylpano/geometry.hpp"

namespace cylpano {
namespace {

TEST(CylProject, AxisExamples) {
  auto a = cyl_project({0, 0, 2});
  EXPECT_DOUBLE_EQ(a.coord.theta, 0.0);
  EXPECT_DOUBLE_EQ(a.coord.h, 0.0);
  EXPECT_DOUBLE_EQ(a.depth, 2.0);

  auto b = cyl_project({2, 0, 0});
  EXPECT_DOUBLE_EQ(b.coord.theta, kPi / 2);
  EXPECT_DOUBLE_EQ(b.coord.h, 0.0);
  EXPECT_DOUBLE_EQ(b.depth, 2.0);

  auto c = cyl_project({0, 1, 1});
  EXPECT_DOUBLE_EQ(c.coord.theta, 0.0);
  EXPECT_DOUBLE_EQ(c.coord.h, 1.0);
  EXPECT_DOUBLE_EQ(c.depth, 1.0);
}

TEST(CylProject, OnAxisIsDegenerate) {
  EXPECT_THROW(cyl_project({0, 3, 0}), DegeneratePoint);
  try {
    cyl_project({0, 0, 0});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegeneratePoint);
  }
}

TEST(CylUnproject, Examples) {
  Point3 p = cyl_unproject({0, 0}, 3);
  EXPECT_NEAR((p - Point3(0, 0, 3)).norm(), 0, 1e-15);
  Point3 q = cyl_unproject({kPi / 2, -0.5}, 2);
  EXPECT_NEAR((q - Point3(2, -1, 0)).norm(), 0, 1e-15);
}

TEST(CylUnproject, NonPositiveDepthThrows) {
  EXPECT_THROW(cyl_unproject({0, 0}, 0.0), InvalidDepth);
  EXPECT_THROW(cyl_unproject({0, 0}, -1.0), InvalidDepth);
  EXPECT_THROW(cyl_unproject({0, 0}, std::nan("")), InvalidDepth);
}

TEST(CylProject, RoundTripRandom) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(-kPi, kPi);
  std::uniform_real_distribution<double> hh(-2.0, 2.0);
  std::uniform_real_distribution<double> dd(1e-3, 100.0);
  for (int i = 0; i < 100000; ++i) {
    const CylCoord q{th(rng), hh(rng)};
    const double d = dd(rng);
    const CylProjection r = cyl_project(cyl_unproject(q, d));
    ASSERT_LE(std::abs(r.depth - d) / d, 1e-9);
    ASSERT_LE(std::abs(normalize_angle(r.coord.theta - q.theta)), 1e-9);
    ASSERT_LE(std::abs(r.coord.h - q.h), 1e-9 * std::max(1.0, std::abs(q.h)));
  }
}

TEST(CylProject, QuadrantSign) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const double z = std::abs(u(rng)) + 1e-3;
    const double theta = cyl_project({x, u(rng), z}).coord.theta;
    EXPECT_EQ(std::signbit(theta), std::signbit(x));
  }
}

TEST(CylToPixel, Examples) {
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(512, 128);
  EXPECT_DOUBLE_EQ(cam.h_max(), kPi / 4);
  EXPECT_DOUBLE_EQ(cam.h_min(), -kPi / 4);
  const PixelCoord c = cyl_to_pixel({0, 0.5 * (cam.h_min() + cam.h_max())}, cam);
  EXPECT_DOUBLE_EQ(c.x, 256.0);
  EXPECT_DOUBLE_EQ(c.y, 64.0);
  EXPECT_DOUBLE_EQ(cyl_to_pixel({-kPi, 0}, cam).x, 0.0);
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    const double edge = cyl_to_pixel({kPi - eps, 0}, cam).x;
    EXPECT_LT(edge, 512.0);
    EXPECT_NEAR(edge, 512.0 - eps * 512.0 / kTwoPi, 1e-9);
  }
  // Row 0 is the top of the cylinder.
  EXPECT_DOUBLE_EQ(cyl_to_pixel({0, cam.h_max()}, cam).y, 0.0);
  EXPECT_DOUBLE_EQ(cyl_to_pixel({0, cam.h_min()}, cam).y, 128.0);
}

TEST(CylToPixel, AffineBijection) {
  const CylindricalCamera cam(64, 16, -0.3, 0.7);
  for (int x = 0; x < 64; ++x) {
    for (int y = 0; y < 16; ++y) {
      const PixelCoord p = cyl_to_pixel(pixel_to_cyl(x, y, cam), cam);
      EXPECT_NEAR(p.x, x, 1e-12);
      EXPECT_NEAR(p.y, y, 1e-12);
    }
  }
  // Equal steps in theta give equal steps in x.
  const double x0 = cyl_to_pixel({-1.0, 0}, cam).x;
  const double x1 = cyl_to_pixel({-0.5, 0}, cam).x;
  const double x2 = cyl_to_pixel({0.0, 0}, cam).x;
  EXPECT_NEAR(x1 - x0, x2 - x1, 1e-12);
  EXPECT_NEAR(x2 - x0, 64.0 / kTwoPi, 1e-12);
}

TEST(CylindricalCamera, Validation) {
  EXPECT_THROW(CylindricalCamera(1, 4, -1, 1), InvalidArgument);
  EXPECT_THROW(CylindricalCamera(4, 0, -1, 1), InvalidArgument);
  EXPECT_THROW(CylindricalCamera(4, 4, 1, 1), InvalidArgument);
  EXPECT_THROW(CylindricalCamera(4, 4, 1, -1), InvalidArgument);
  EXPECT_THROW(CylindricalCamera(4, 4, -1, 1, 0.0), InvalidArgument);
  EXPECT_THROW(CylindricalCamera(4, 4, -1, 1, 7.0), InvalidArgument);
  EXPECT_NO_THROW(CylindricalCamera(2, 1, -1, 1));
}

TEST(CylindricalCamera, DownscaledKeepsExtent) {
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(128, 32);
  const CylindricalCamera half = cam.downscaled(2);
  EXPECT_EQ(half.width(), 32);
  EXPECT_EQ(half.height(), 8);
  EXPECT_EQ(half.h_min(), cam.h_min());
  EXPECT_EQ(half.h_max(), cam.h_max());
  EXPECT_TRUE(half.cyclic());
  EXPECT_THROW(CylindricalCamera(6, 4, -1, 1).downscaled(2), InvalidArgument);
}

TEST(CylindricalCamera, CroppedMatchesParentColumns) {
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(64, 16);
  const CylindricalCamera crop = cam.cropped(60, 16);  // wraps the seam
  EXPECT_FALSE(crop.cyclic());
  for (int x = 0; x < 16; ++x) {
    const CylCoord a = crop.from_pixel(x, 3);
    const CylCoord b = cam.from_pixel((60 + x) % 64, 3);
    EXPECT_NEAR(normalize_angle(a.theta - b.theta), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(a.h, b.h);
  }
  EXPECT_FALSE(cam.cropped(0, 64).cyclic());
}

TEST(Pose, TransformExamples) {
  const Point3 p(0.3, -1.2, 4.0);
  EXPECT_EQ(pose_transform(Pose::identity(), p), p);
  const Pose t = Pose::from_vector({1, 0, 0, 0, 0, 0});
  EXPECT_EQ(pose_transform(t, {0, 0, 5}), Point3(1, 0, 5));
  const Pose yaw = Pose::from_vector({0, 0, 0, 0, kPi / 2, 0});
  EXPECT_NEAR((pose_transform(yaw, {0, 0, 1}) - Point3(1, 0, 0)).norm(), 0,
              1e-12);
}

TEST(Pose, EulerOrderIsZThenYThenX) {
  const Eigen::Vector3d r(0.3, -0.7, 1.1);
  const Eigen::Matrix3d m = euler_to_matrix(r);
  const Eigen::Matrix3d expected =
      euler_to_matrix({r.x(), 0, 0}) * euler_to_matrix({0, r.y(), 0}) *
      euler_to_matrix({0, 0, r.z()});
  EXPECT_NEAR((m - expected).norm(), 0, 1e-15);
  // Rx(pi/2) sends +y to +z.
  const Eigen::Vector3d v = euler_to_matrix({kPi / 2, 0, 0}) * Eigen::Vector3d::UnitY();
  EXPECT_NEAR((v - Eigen::Vector3d::UnitZ()).norm(), 0, 1e-15);
}

TEST(Pose, RotationIsOrthonormal) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d r = euler_to_matrix({u(rng), u(rng), u(rng)});
    EXPECT_NEAR((r.transpose() * r - Eigen::Matrix3d::Identity()).norm(), 0,
                1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Pose, InverseComposition) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Pose p = Pose::from_vector({u(rng), u(rng), u(rng), u(rng), u(rng),
                                      u(rng)});
    const Pose id = p * p.inverse();
    EXPECT_NEAR(id.translation.norm(), 0, 1e-10);
    EXPECT_NEAR((id.rotation_matrix() - Eigen::Matrix3d::Identity()).norm(), 0,
                1e-10);
    const Point3 q(u(rng), u(rng), u(rng));
    EXPECT_NEAR((pose_transform(p.inverse(), pose_transform(p, q)) - q).norm(),
                0, 1e-10);
  }
}

TEST(Pose, EulerRoundTripIncludingGimbalLock) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d m = euler_to_matrix({u(rng), u(rng) / 2, u(rng)});
    EXPECT_NEAR((euler_to_matrix(matrix_to_euler(m)) - m).norm(), 0, 1e-12);
  }
  const Eigen::Matrix3d lock = euler_to_matrix({0.4, kPi / 2, -0.9});
  EXPECT_NEAR((euler_to_matrix(matrix_to_euler(lock)) - lock).norm(), 0, 1e-9);
}

TEST(Pose, YawsCommute) {
  const Pose a = Pose::from_vector({0, 0, 0, 0, 0.4, 0});
  const Pose b = Pose::from_vector({0, 0, 0, 0, -1.3, 0});
  const Pose ab = Pose::from_vector({0, 0, 0, 0, 0.4 - 1.3, 0});
  EXPECT_NEAR(((a * b).rotation_matrix() - ab.rotation_matrix()).norm(), 0,
              1e-12);
  EXPECT_NEAR(((b * a).rotation_matrix() - ab.rotation_matrix()).norm(), 0,
              1e-12);
}

TEST(Pinhole, Examples) {
  PinholeCamera cam{100, 100, 64, 64, 128, 128};
  const PixelCoord a = pinhole_project({0, 0, 1}, cam);
  EXPECT_DOUBLE_EQ(a.x, 64);
  EXPECT_DOUBLE_EQ(a.y, 64);
  EXPECT_DOUBLE_EQ(pinhole_project({1, 0, 2}, cam).x, 114);
  EXPECT_THROW(pinhole_project({0, 0, 0}, cam), BehindCamera);
  EXPECT_THROW(pinhole_project({0, 0, -1}, cam), BehindCamera);
}

TEST(Pinhole, RoundTripRandom) {
  PinholeCamera cam{320.5, 290.25, 311.0, 240.5, 640, 480};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> xy(-20.0, 20.0);
  std::uniform_real_distribution<double> z(0.5, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const Point3 p(xy(rng), xy(rng), z(rng));
    const PixelCoord px = pinhole_project(p, cam);
    const Point3 q = pinhole_unproject(px.x, px.y, p.z(), cam);
    ASSERT_LE((q - p).norm() / p.norm(), 1e-9);
  }
}

TEST(Pinhole, Validation) {
  EXPECT_THROW((PinholeCamera{0, 1, 0, 0, 4, 4}.validate()), InvalidArgument);
  EXPECT_THROW((PinholeCamera{1, -1, 0, 0, 4, 4}.validate()), InvalidArgument);
  EXPECT_THROW((PinholeCamera{1, 1, INFINITY, 0, 4, 4}.validate()),
               InvalidArgument);
  EXPECT_NO_THROW((PinholeCamera{1, 1, 0, 0, 4, 4}.validate()));
}

TEST(NormalizeAngle, HalfOpenRange) {
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), -kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), -kPi);
  EXPECT_NEAR(normalize_angle(3 * kPi + 0.1), -kPi + 0.1, 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    const double t = normalize_angle(u(rng));
    EXPECT_GE(t, -kPi);
    EXPECT_LT(t, kPi);
  }
}

}  // namespace
}  // namespace cylpano
