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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "cylpano/error.hpp"
#include "cylpano/optim.hpp"
#include "cylpano/synthetic.hpp"

namespace cylpano {
namespace {

constexpr double kDeg = kPi / 180.0;

struct Pair {
  CylindricalCamera cam;
  RenderedView target;
  Panorama source;
  Pose truth;  // target -> source
};

Pair render_pair(StandardScene kind, int w, int h, const Pose& world_from_source,
                 std::uint64_t seed = 42) {
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(w, h);
  const auto scene = make_standard_scene(kind, seed);
  RenderedView target = render_cylindrical(*scene, Pose::identity(), cam);
  Panorama source = render_cylindrical(*scene, world_from_source, cam).image;
  return {cam, std::move(target), std::move(source),
          relative_pose(Pose::identity(), world_from_source)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TEST(NumericGradient, Quadratic) {
  const Objective f = [](std::span<const double> p) {
    return p[0] * p[0] + p[1] * p[1];
  };
  const std::vector<double> p{1.0, -2.0};
  const auto g = numeric_gradient(f, p, 1e-4);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], -4.0, 1e-8);
}

TEST(NumericGradient, ConstantIsExactlyZero) {
  const Objective f = [](std::span<const double>) { return 3.5; };
  const std::vector<double> p{0.1, 0.2, 0.3};
  for (double v : numeric_gradient(f, p, 1e-6)) EXPECT_EQ(v, 0.0);
}

TEST(NumericGradient, NonFiniteNamesIndex) {
  const Objective f = [](std::span<const double> p) {
    return p[1] > 1.0 ? std::numeric_limits<double>::quiet_NaN() : p[0];
  };
  const std::vector<double> p{0.0, 1.0};
  try {
    numeric_gradient(f, p, 1e-3);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.index(), 1);
  }
  EXPECT_THROW(numeric_gradient(f, p, 0.0), InvalidArgument);
}

TEST(NumericGradient, PoseObjectiveSelfConsistent) {
  const Pair pair = render_pair(StandardScene::kCylinder, 16, 8,
                                Pose::from_vector({0.05, 0, 0.03, 0, 3 * kDeg, 0}));
  LossWeights w;
  w.scales = 1;
  const LossProblem problem(pair.target.image, {pair.source}, pair.cam, w);
  const Objective f = [&](std::span<const double> p) {
    const Pose pose = Pose::from_vector({p[0], p[1], p[2], p[3], p[4], p[5]});
    return problem.evaluate(pair.target.depth, std::span(&pose, 1)).total;
  };
  const std::vector<double> p{0.01, 0.0, 0.0, 0.0, 0.02, 0.0};
  const double eps = 1e-5;
  const auto g1 = numeric_gradient(f, p, eps);
  const auto g2 = numeric_gradient(f, p, eps / 10);
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < 6; ++i) {
    num += (g1[i] - g2[i]) * (g1[i] - g2[i]);
    den += g1[i] * g1[i];
  }
  EXPECT_GT(den, 0.0);
  EXPECT_LT(std::sqrt(num / den), 1e-3);
}

TEST(OptimConfig, Validation) {
  OptimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.step_size = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.fd_epsilon = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.depth_min = 5.0;
  c.depth_max = 5.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(OptimizePose, GroundTruthIsFixedPoint) {
  // A yaw of 8 columns is exact at every pyramid level, so the loss at the
  // truth is zero up to rounding.
  const int w = 128;
  const Pair pair = render_pair(StandardScene::kCylinder, w, 32,
                                Pose::from_vector({0, 0, 0, 0, kTwoPi * 8 / w, 0}));
  const PoseResult r = optimize_pose(pair.target.image, pair.source,
                                     pair.target.depth, pair.truth, pair.cam,
                                     LossWeights{}, OptimConfig{});
  EXPECT_LT(r.loss.pixel, 1e-12);
  const auto a = r.pose.to_vector();
  const auto b = pair.truth.to_vector();
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(a[i], b[i], 1e-9) << i;
}

TEST(OptimizePose, RecoversYaw) {
  const Pair pair = render_pair(StandardScene::kCylinder, 128, 32,
                                Pose::from_vector({0, 0, 0, 0, 2 * kDeg, 0}));
  const PoseResult r = optimize_pose(pair.target.image, pair.source,
                                     pair.target.depth, Pose::identity(),
                                     pair.cam, LossWeights{}, OptimConfig{});
  EXPECT_NEAR(r.pose.rotation.y(), pair.truth.rotation.y(), 0.2 * kDeg);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_LE(r.trace[i].total, r.trace[i - 1].total);
  }
}

TEST(OptimizePose, RecoversTranslationDirection) {
  const Pair pair = render_pair(StandardScene::kCylinder, 128, 32,
                                Pose::from_vector({0.1, 0, 0, 0, 0, 0}));
  const PoseResult r = optimize_pose(pair.target.image, pair.source,
                                     pair.target.depth, Pose::identity(),
                                     pair.cam, LossWeights{}, OptimConfig{});
  const double c = r.pose.translation.normalized().dot(
      pair.truth.translation.normalized());
  EXPECT_GT(c, std::cos(5 * kDeg));
}

TEST(OptimizePose, Deterministic) {
  const Pair pair = render_pair(StandardScene::kRoom, 32, 8,
                                Pose::from_vector({0.1, 0, 0.05, 0, 3 * kDeg, 0}));
  OptimConfig cfg;
  cfg.max_iters = 20;
  LossWeights w;
  w.scales = 2;
  const PoseResult a = optimize_pose(pair.target.image, pair.source,
                                     pair.target.depth, Pose::identity(),
                                     pair.cam, w, cfg);
  const PoseResult b = optimize_pose(pair.target.image, pair.source,
                                     pair.target.depth, Pose::identity(),
                                     pair.cam, w, cfg);
  EXPECT_EQ(a.pose.to_vector(), b.pose.to_vector());
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].total, b.trace[i].total);
  }
}

TEST(OptimizePose, Errors) {
  const Pair pair = render_pair(StandardScene::kRoom, 16, 4, Pose::identity());
  const LossProblem two(pair.target.image, {pair.source, pair.source}, pair.cam,
                        LossWeights{1.0, 0.0, 0.2, 1});
  EXPECT_THROW(optimize_pose(two, pair.target.depth, Pose::identity(), {}),
               InvalidArgument);
  EXPECT_THROW(optimize_pose(pair.target.image, pair.source, DepthMap(4, 8, 1.0),
                             Pose::identity(), pair.cam, LossWeights{1.0, 0, 0, 1},
                             {}),
               InvalidArgument);
}

struct DepthScene {
  CylindricalCamera cam;
  RenderedView target;
  std::vector<Panorama> sources;
  std::vector<Pose> poses;
  Mask front_wall;
};

// Room scene, target at the origin, sources displaced sideways and yawed.
DepthScene depth_scene(int w, int h) {
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(w, h);
  const auto scene = make_standard_scene(StandardScene::kRoom, 42);
  const auto* box = dynamic_cast<const BoxScene*>(scene.get());
  DepthScene out{cam, render_cylindrical(*scene, Pose::identity(), cam), {}, {},
                 Mask(h, w)};
  for (double side : {1.0, -1.0}) {
    const Pose world_from_source =
        Pose::from_vector({0.5 * side, 0, 0, 0, 5 * kDeg * side, 0});
    out.sources.push_back(render_cylindrical(*scene, world_from_source, cam).image);
    out.poses.push_back(relative_pose(Pose::identity(), world_from_source));
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const CylCoord q = cam.from_pixel(x, y);
      const Eigen::Vector3d dir(std::sin(q.theta), q.h, std::cos(q.theta));
      out.front_wall.set(y, x, box->wall_hit(Eigen::Vector3d::Zero(), dir) == 5);
    }
  }
  return out;
}

TEST(OptimizeDepth, RecoversWallDepth) {
  const DepthScene s = depth_scene(64, 16);
  LossWeights w;
  w.lambda_s = 0.0;
  const DepthResult r = optimize_depth(s.target.image, s.sources, s.poses,
                                       DepthMap(16, 64, 2.0), s.cam, w,
                                       OptimConfig{});
  std::vector<double> est;
  std::vector<double> gt;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (!s.front_wall(y, x)) continue;
      est.push_back(r.depth.depth(y, x));
      gt.push_back(s.target.depth.depth(y, x));
    }
  }
  ASSERT_GT(est.size(), 50u);
  EXPECT_NEAR(median(est) / median(gt), 1.0, 0.1);
  EXPECT_NEAR(median(est), 5.0, 0.5);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_LE(r.trace[i].total, r.trace[i - 1].total);
  }
}

TEST(OptimizeDepth, GroundTruthInitStaysPut) {
  const DepthScene s = depth_scene(64, 16);
  LossWeights w;
  w.lambda_s = 0.0;
  const DepthResult r = optimize_depth(s.target.image, s.sources, s.poses,
                                       s.target.depth, s.cam, w, OptimConfig{});
  std::vector<double> ratio;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 64; ++x) {
      ratio.push_back(r.depth.depth(y, x) / s.target.depth.depth(y, x));
    }
  }
  EXPECT_NEAR(median(ratio), 1.0, 0.02);
}

TEST(OptimizeDepth, StrongSmoothingFlattens) {
  const DepthScene s = depth_scene(32, 8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(2.0, 6.0);
  DepthMap init(8, 32);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 32; ++x) init.set(y, x, u(rng));
  }
  OptimConfig cfg;
  cfg.max_iters = 60;
  LossWeights rough;
  rough.lambda_s = 0.0;
  rough.scales = 1;
  LossWeights smooth = rough;
  smooth.lambda_s = 100.0;
  const DepthResult a = optimize_depth(s.target.image, s.sources, s.poses, init,
                                       s.cam, rough, cfg);
  const DepthResult b = optimize_depth(s.target.image, s.sources, s.poses, init,
                                       s.cam, smooth, cfg);
  EXPECT_LT(smooth_loss_2nd(b.depth), smooth_loss_2nd(a.depth));
}

TEST(OptimizeDepth, RespectsBoundsAndValidity) {
  const DepthScene s = depth_scene(32, 8);
  DepthMap init(8, 32, 2.0);
  init.invalidate(3, 5);
  OptimConfig cfg;
  cfg.depth_min = 1.5;
  cfg.depth_max = 3.0;
  cfg.max_iters = 30;
  LossWeights w;
  w.lambda_s = 0.0;
  w.scales = 2;
  const DepthResult r =
      optimize_depth(s.target.image, s.sources, s.poses, init, s.cam, w, cfg);
  EXPECT_FALSE(r.depth.valid(3, 5));
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (!r.depth.valid(y, x)) continue;
      EXPECT_GE(r.depth.depth(y, x), 1.5 * (1 - 1e-12));
      EXPECT_LE(r.depth.depth(y, x), 3.0 * (1 + 1e-12));
    }
  }
  EXPECT_THROW(optimize_depth(s.target.image, s.sources,
                              std::span(s.poses.data(), 1), init, s.cam, w, cfg),
               InvalidArgument);
}

TEST(DisparityGradient, MatchesDirectionalDerivative) {
  const DepthScene s = depth_scene(32, 8);
  LossWeights w;
  w.lambda_s = 0.0;
  w.scales = 2;
  const LossProblem problem(s.target.image, s.sources, s.cam, w);
  const DepthMap d(8, 32, 2.5);
  const auto g = disparity_gradient(problem, d, s.poses, 1e-5);
  double gn = 0.0;
  for (double v : g) gn += v * v;
  gn = std::sqrt(gn);
  ASSERT_GT(gn, 0.0);
  const double a = 1e-4;
  DepthMap moved(8, 32);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 32; ++x) {
      moved.set(y, x, 1.0 / (1.0 / 2.5 - a * g[y * 32 + x] / gn));
    }
  }
  const double f0 = problem.evaluate(d, s.poses).total;
  const double f1 = problem.evaluate(moved, s.poses).total;
  EXPECT_NEAR((f1 - f0) / a, -gn, 0.05 * gn);
}

TEST(OptimizeAlternate, DoesNotIncreaseLoss) {
  const DepthScene s = depth_scene(32, 8);
  LossWeights w;
  w.lambda_s = 0.0;
  w.scales = 2;
  const LossProblem problem(s.target.image, s.sources, s.cam, w);
  const DepthMap init(8, 32, 3.0);
  std::vector<Pose> poses = s.poses;
  poses[0].rotation.y() += 1 * kDeg;
  const double before = problem.evaluate(init, poses).total;
  OptimConfig cfg;
  cfg.max_iters = 20;
  const AlternateResult r = optimize_alternate(problem, init, poses, cfg, 2);
  EXPECT_EQ(r.trace.size(), 2u);
  EXPECT_LE(r.loss.total, before);
  EXPECT_THROW(optimize_alternate(problem, init, poses, cfg, 0), InvalidArgument);
}

}  // namespace
}  // namespace cylpano
