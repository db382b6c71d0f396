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
#include <random>

#include <gtest/gtest.h>

#include "cylpano/error.hpp"
#include "cylpano/metrics.hpp"
#include "metrics_reference.hpp"

namespace cylpano {
namespace {

DepthMap random_depth_map(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 20.0);
  DepthMap d(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) d.set(y, x, u(rng));
  }
  return d;
}

TEST(DepthMetrics, IdenticalMaps) {
  std::mt19937_64 rng(1);
  const DepthMap gt = random_depth_map(6, 9, rng);
  const DepthMetrics m = depth_metrics(gt, gt);
  EXPECT_EQ(m.abs_rel, 0.0);
  EXPECT_EQ(m.sq_rel, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.rmse_log, 0.0);
  EXPECT_EQ(m.delta1, 1.0);
  EXPECT_EQ(m.delta2, 1.0);
  EXPECT_EQ(m.delta3, 1.0);
  EXPECT_EQ(m.count, 54u);
}

TEST(DepthMetrics, UniformOverestimate) {
  std::mt19937_64 rng(2);
  const DepthMap gt = random_depth_map(5, 5, rng);
  DepthMap pred(5, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) pred.set(y, x, 1.2 * gt.depth(y, x));
  }
  const DepthMetrics m = depth_metrics(pred, gt, {false, 80.0});
  EXPECT_NEAR(m.abs_rel, 0.2, 1e-12);
  EXPECT_NEAR(m.rmse_log, std::log(1.2), 1e-12);
  EXPECT_EQ(m.delta1, 1.0);
  // Median scaling removes the global factor.
  const DepthMetrics s = depth_metrics(pred, gt, {true, 80.0});
  EXPECT_NEAR(s.abs_rel, 0.0, 1e-12);
}

TEST(DepthMetrics, MatchesBruteForceReference) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const DepthMap gt = random_depth_map(8, 8, rng);
    DepthMap pred = random_depth_map(8, 8, rng);
    pred.invalidate(trial % 8, 3);
    for (bool scale : {false, true}) {
      const double cap = trial % 2 ? 80.0 : 12.0;
      const DepthMetrics m = depth_metrics(pred, gt, {scale, cap});
      const DepthMetrics r =
          testing::reference_depth_metrics(pred, gt, scale, cap);
      EXPECT_EQ(m.count, r.count);
      EXPECT_NEAR(m.abs_rel, r.abs_rel, 1e-12);
      EXPECT_NEAR(m.sq_rel, r.sq_rel, 1e-12);
      EXPECT_NEAR(m.rmse, r.rmse, 1e-12);
      EXPECT_NEAR(m.rmse_log, r.rmse_log, 1e-12);
      EXPECT_NEAR(m.delta1, r.delta1, 1e-12);
      EXPECT_NEAR(m.delta2, r.delta2, 1e-12);
      EXPECT_NEAR(m.delta3, r.delta3, 1e-12);
      EXPECT_LE(m.delta1, m.delta2);
      EXPECT_LE(m.delta2, m.delta3);
    }
  }
}

TEST(DepthMetrics, Invariances) {
  std::mt19937_64 rng(4);
  const DepthMap gt = random_depth_map(6, 7, rng);
  const DepthMap pred = random_depth_map(6, 7, rng);
  const DepthMetrics m = depth_metrics(pred, gt);
  // Global scale with median scaling on.
  DepthMap scaled(6, 7);
  // Row/column permutation applied to both.
  DepthMap pp(6, 7), gp(6, 7);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 7; ++x) {
      scaled.set(y, x, 3.7 * pred.depth(y, x));
      pp.set(5 - y, (x + 3) % 7, pred.depth(y, x));
      gp.set(5 - y, (x + 3) % 7, gt.depth(y, x));
    }
  }
  const DepthMetrics s = depth_metrics(scaled, gt);
  const DepthMetrics p = depth_metrics(pp, gp);
  for (const DepthMetrics* o : {&s, &p}) {
    EXPECT_NEAR(o->abs_rel, m.abs_rel, 1e-12);
    EXPECT_NEAR(o->rmse, m.rmse, 1e-12);
    EXPECT_NEAR(o->rmse_log, m.rmse_log, 1e-12);
    EXPECT_EQ(o->delta1, m.delta1);
  }
}

TEST(DepthMetrics, DeltaUsesStrictThreshold) {
  DepthMap gt(1, 2, 4.0);
  DepthMap pred(1, 2, 5.0);  // ratio exactly 1.25
  pred.set(0, 1, 4.0);
  const DepthMetrics m = depth_metrics(pred, gt, {false, 80.0});
  EXPECT_EQ(m.delta1, 0.5);
  EXPECT_EQ(m.delta2, 1.0);
}

TEST(DepthMetrics, Errors) {
  EXPECT_THROW(depth_metrics(DepthMap(2, 3, 1.0), DepthMap(3, 2, 1.0)),
               InvalidArgument);
  DepthMap gt(2, 2, 100.0);  // all beyond the cap
  EXPECT_THROW(depth_metrics(DepthMap(2, 2, 1.0), gt), InvalidArgument);
  DepthMap pred(1, 1, 1.0);
  pred.invalidate(0, 0);
  EXPECT_THROW(depth_metrics(pred, DepthMap(1, 1, 1.0)), InvalidArgument);
}

Trajectory line(int n) {
  Trajectory t;
  for (int i = 0; i < n; ++i) {
    t.push_back(Pose::from_vector({0, 0, static_cast<double>(i), 0, 0, 0}));
  }
  return t;
}

TEST(Ate, IdenticalAndScaled) {
  Trajectory gt;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 7; ++i) {
    gt.push_back(Pose::from_vector({n(rng), n(rng), n(rng), 0.1 * n(rng),
                                    0.1 * n(rng), 0.1 * n(rng)}));
  }
  const AteResult same = ate(gt, gt, 3);
  EXPECT_NEAR(same.mean, 0.0, 1e-12);
  EXPECT_NEAR(same.std_dev, 0.0, 1e-12);
  EXPECT_EQ(same.windows.size(), 5u);
  Trajectory scaled = gt;
  for (Pose& p : scaled) p.translation *= 3.0;
  const AteResult s = ate(scaled, gt, 3);
  EXPECT_NEAR(s.mean, 0.0, 1e-12);
  EXPECT_NEAR(s.std_dev, 0.0, 1e-12);
}

TEST(Ate, LateralOffsetHandComputed) {
  const Trajectory gt = line(5);
  Trajectory pred = gt;
  pred[3].translation.x() += 0.1;
  // Anchored positions equal the raw ones; the scale is <p,g>/<p,p>.
  const double s = 30.0 / 30.01;
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double dz = (s - 1.0) * i;
    const double dx = i == 3 ? 0.1 * s : 0.0;
    expected += std::sqrt(dz * dz + dx * dx);
  }
  expected /= 5.0;
  const AteResult r = ate(pred, gt, 5);
  ASSERT_EQ(r.windows.size(), 1u);
  EXPECT_NEAR(r.mean, expected, 1e-14);
  EXPECT_EQ(r.std_dev, 0.0);
  EXPECT_NEAR(r.mean, 0.02, 0.001);
}

TEST(Ate, InvariantToGlobalRigidTransform) {
  const Trajectory gt = line(6);
  Trajectory pred = gt;
  pred[2].translation.y() += 0.2;
  pred[4].translation.x() -= 0.1;
  const Pose g = Pose::from_vector({1.0, -2.0, 0.5, 0.3, -0.7, 1.1});
  Trajectory gt2, pred2;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt2.push_back(g * gt[i]);
    pred2.push_back(g * pred[i]);
  }
  const AteResult a = ate(pred, gt, 3);
  const AteResult b = ate(pred2, gt2, 3);
  EXPECT_NEAR(a.mean, b.mean, 1e-12);
  EXPECT_NEAR(a.std_dev, b.std_dev, 1e-12);
  EXPECT_GT(a.mean, 0.0);
}

TEST(Ate, Errors) {
  EXPECT_THROW(ate(line(4), line(5), 3), InvalidArgument);
  EXPECT_THROW(ate(line(2), line(2), 3), InvalidArgument);
  EXPECT_THROW(ate(line(4), line(4), 1), InvalidArgument);
}

}  // namespace
}  // namespace cylpano
