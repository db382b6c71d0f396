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


// Acceptance checks. Prints one PASS/FAIL line per criterion with its
// wall-clock time and the measured figures; exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cylpano/dataprep.hpp"
#include "cylpano/geometry.hpp"
#include "cylpano/metrics.hpp"
#include "cylpano/optim.hpp"
#include "cylpano/panorama.hpp"
#include "cylpano/synthesis.hpp"
#include "cylpano/synthetic.hpp"
#include "metrics_reference.hpp"
#include "test_util.hpp"

namespace cylpano {
namespace {

constexpr double kDeg = kPi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double relative_difference(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += std::max(a[i] * a[i], b[i] * b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : (num == 0.0 ? 0.0 : INFINITY);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1. cyl_unproject -> cyl_project on 1e5 random points.
Outcome projection_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> th(-kPi, kPi);
  std::uniform_real_distribution<double> hh(-3.0, 3.0);
  std::uniform_real_distribution<double> dd(0.01, 100.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const CylCoord q{th(rng), hh(rng)};
    const double d = dd(rng);
    const CylProjection r = cyl_project(cyl_unproject(q, d));
    worst = std::max({worst, std::abs(r.depth - d) / d,
                      std::abs(normalize_angle(r.coord.theta - q.theta)) / kPi,
                      std::abs(r.coord.h - q.h) / std::max(1.0, std::abs(q.h))});
  }
  const double t = seconds_since(t0);
  return {worst < 1e-9 && t < 1.0,
          fmt("max relative error %.3g, %.3f s for 1e5 points", worst, t)};
}

// 2. Identity-pose warp on 10 random depth maps at 256x64.
Outcome warp_identity() {
  std::mt19937_64 rng(2);
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(256, 64);
  double worst = 0.0;
  bool all_valid = true;
  for (int i = 0; i < 10; ++i) {
    const Panorama src = testing::random_image(64, 256, 3, rng);
    const DepthMap depth = testing::random_depth(64, 256, rng);
    const WarpResult r = inverse_warp(src, depth, Pose::identity(), cam);
    worst = std::max(worst, testing::max_abs_diff(r.image, src));
    all_valid = all_valid && r.valid.count() == 64u * 256u;
  }
  return {worst < 1e-6 && all_valid,
          fmt("max abs diff %.3g over 10 maps, all pixels valid: %s", worst,
              all_valid ? "yes" : "no")};
}

// 3. Yaw of k columns equals a k-column cyclic shift.
Outcome yaw_shift() {
  std::mt19937_64 rng(3);
  const int w = 256;
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(w, 64);
  const Panorama src = testing::random_image(64, w, 3, rng);
  std::ostringstream os;
  bool pass = true;
  for (int k : {1, 7, w / 2}) {
    const DepthMap depth = testing::random_depth(64, w, rng);
    const Pose yaw = Pose::from_vector({0, 0, 0, 0, kTwoPi * k / w, 0});
    const WarpResult r = inverse_warp(src, depth, yaw, cam);
    const double diff = testing::max_abs_diff(r.image, shift_columns(src, -k));
    pass = pass && diff == 0.0 && r.valid.count() == 64u * w;
    os << "k=" << k << ": " << diff << "  ";
  }
  return {pass, "max abs diff " + os.str()};
}

// 4. conv2d_wrap commutes with cyclic column shifts.
Outcome conv_equivariance() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> shift(1, 31);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    const Panorama img = testing::random_image(32, 32, 1 + i % 3, rng);
    Kernel k{3, std::vector<double>(9)};
    for (double& v : k.weights) v = u(rng);
    const int s = shift(rng);
    const Panorama a = conv2d_wrap(shift_columns(img, s), k, 1);
    const Panorama b = shift_columns(conv2d_wrap(img, k, 1), s);
    exact += std::equal(a.data().begin(), a.data().end(), b.data().begin());
  }
  return {exact == 100, fmt("%d/100 pairs bit-exact", exact)};
}

// 5. Pose gradient at eps and eps/10 on a 64x16 synthetic pair.
Outcome gradient_check() {
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(64, 16);
  const auto scene = make_standard_scene(StandardScene::kCylinder, 0);
  const Pose moved = Pose::from_vector({0.05, 0, 0.03, 0, 3 * kDeg, 0});
  const RenderedView t = render_cylindrical(*scene, Pose::identity(), cam);
  const Panorama s = render_cylindrical(*scene, moved, cam).image;
  Pose p = relative_pose(Pose::identity(), moved);
  p.translation.x() -= 0.01;
  p.rotation.y() -= 0.01;
  const LossProblem problem(t.image, {s}, cam, LossWeights{});
  const double eps = OptimConfig{}.fd_epsilon;
  const double rel = relative_difference(
      pose_gradient(problem, t.depth, std::span(&p, 1), 0, eps),
      pose_gradient(problem, t.depth, std::span(&p, 1), 0, eps / 10));
  return {rel < 1e-3,
          fmt("relative difference %.3g at eps %.0e vs %.0e (no analytic "
              "pose gradient to compare)",
              rel, eps, eps / 10)};
}

// 6. Yaw and translation direction recovered from identity at 128x32.
Outcome pose_recovery() {
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(128, 32);
  const auto scene = make_standard_scene(StandardScene::kCylinder, 42);
  const RenderedView t = render_cylindrical(*scene, Pose::identity(), cam);
  auto run = [&](const Pose& world_from_source, double* secs) {
    const Panorama s = render_cylindrical(*scene, world_from_source, cam).image;
    const auto t0 = Clock::now();
    const PoseResult r = optimize_pose(t.image, s, t.depth, Pose::identity(),
                                       cam, LossWeights{}, OptimConfig{});
    *secs = seconds_since(t0);
    return std::pair(r.pose, relative_pose(Pose::identity(), world_from_source));
  };
  double t_yaw = 0.0;
  double t_dir = 0.0;
  const auto [yaw_est, yaw_true] =
      run(Pose::from_vector({0, 0, 0, 0, 2 * kDeg, 0}), &t_yaw);
  const auto [dir_est, dir_true] =
      run(Pose::from_vector({0.1, 0, 0, 0, 0, 0}), &t_dir);
  const double yaw_err =
      std::abs(yaw_est.rotation.y() - yaw_true.rotation.y()) / kDeg;
  const double cos_angle = std::clamp(
      dir_est.translation.normalized().dot(dir_true.translation.normalized()),
      -1.0, 1.0);
  const double dir_err = std::acos(cos_angle) / kDeg;
  return {yaw_err < 0.2 && dir_err < 5.0 && t_yaw < 60.0 && t_dir < 60.0,
          fmt("yaw error %.4f deg (%.2f s), translation direction error "
              "%.3f deg (%.2f s)",
              yaw_err, t_yaw, dir_err, t_dir)};
}

// 7. Depth of the textured wall at 5 m from a constant 2 m start, poses known.
Outcome depth_recovery() {
  const int w = 64;
  const int h = 16;
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(w, h);
  const auto scene = make_standard_scene(StandardScene::kRoom, 42);
  const auto* box = dynamic_cast<const BoxScene*>(scene.get());
  const RenderedView t = render_cylindrical(*scene, Pose::identity(), cam);
  std::vector<Panorama> sources;
  std::vector<Pose> poses;
  for (double side : {1.0, -1.0}) {
    const Pose world_from_source =
        Pose::from_vector({0.5 * side, 0, 0, 0, 5 * kDeg * side, 0});
    sources.push_back(render_cylindrical(*scene, world_from_source, cam).image);
    poses.push_back(relative_pose(Pose::identity(), world_from_source));
  }
  // The photometric term alone; see the notes on smoothness in README.md.
  LossWeights weights;
  weights.lambda_s = 0.0;
  const auto t0 = Clock::now();
  const DepthResult r = optimize_depth(t.image, sources, poses,
                                       DepthMap(h, w, 2.0), cam, weights,
                                       OptimConfig{});
  const double secs = seconds_since(t0);
  std::vector<double> est;
  std::vector<double> gt;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const CylCoord q = cam.from_pixel(x, y);
      const Eigen::Vector3d dir(std::sin(q.theta), q.h, std::cos(q.theta));
      if (box->wall_hit(Eigen::Vector3d::Zero(), dir) != 5) continue;
      est.push_back(r.depth.depth(y, x));
      gt.push_back(t.depth.depth(y, x));
    }
  }
  const double ratio = median(est) / median(gt);
  return {std::abs(ratio - 1.0) < 0.1 && secs < 120.0,
          fmt("median estimate %.3f m vs truth %.3f m (ratio %.4f) over %zu "
              "wall pixels, %.2f s",
              median(est), median(gt), ratio, est.size(), secs)};
}

// 8. Seam-adjacent photometric error with and without wrap sampling.
Outcome seam_ablation() {
  const int w = 128;
  const int h = 32;
  const int frames = 6;
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(w, h);
  const auto scene = make_standard_scene(StandardScene::kRoom, 7);
  const Pose step =
      Pose::from_vector({0.05, 0, 0.08, 0, kTwoPi * 3.5 / w, 0});
  std::vector<Pose> traj{Pose::identity()};
  std::vector<RenderedView> views;
  for (int i = 0; i < frames; ++i) {
    if (i > 0) traj.push_back(traj.back() * step);
    views.push_back(render_cylindrical(*scene, traj[i], cam));
  }
  const HorizontalBoundary modes[2] = {HorizontalBoundary::kWrap,
                                       HorizontalBoundary::kClamp};
  double err[2] = {0.0, 0.0};
  for (int m = 0; m < 2; ++m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int i = 0; i + 1 < frames; ++i) {
      const Pose rel = relative_pose(traj[i], traj[i + 1]);
      const WarpResult r =
          inverse_warp(views[i + 1].image, views[i].depth, rel, cam, modes[m]);
      for (int x : {0, 1, 2, 3, w - 4, w - 3, w - 2, w - 1}) {
        for (int y = 0; y < h; ++y) {
          if (!r.valid(y, x)) continue;
          double e = 0.0;
          for (int c = 0; c < 3; ++c) {
            e += std::abs(r.image.at(y, x, c) - views[i].image.at(y, x, c));
          }
          sum += e / 3.0;
          ++n;
        }
      }
    }
    err[m] = n ? sum / n : INFINITY;
  }
  return {err[0] < err[1],
          fmt("seam-column L1 error with wrap %.6f, without wrap %.6f "
              "(%d frame pairs)",
              err[0], err[1], frames - 1)};
}

// 9. ATE after pose optimization on crops of growing field of view.
Outcome fov_ablation() {
  // 144 columns keep every crop width divisible by the 3-level pyramid.
  const int w = 144;
  const int h = 36;
  const int frames = 6;
  const int trajectories = 4;
  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(w, h);
  const double fovs[4] = {100.0, 180.0, 270.0, 360.0};
  double mean_ate[4] = {0.0, 0.0, 0.0, 0.0};
  LossWeights weights;
  weights.scales = 3;
  for (int t = 0; t < trajectories; ++t) {
    std::mt19937_64 rng(100 + t);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto scene = make_standard_scene(StandardScene::kRoom, 10 + t);
    std::vector<Pose> gt{Pose::identity()};
    std::vector<RenderedView> views;
    for (int i = 0; i < frames; ++i) {
      if (i > 0) {
        gt.push_back(gt.back() *
                     Pose::from_vector({0.08 * u(rng), 0.01 * u(rng),
                                        0.12 + 0.04 * u(rng), 0,
                                        0.03 * u(rng), 0}));
      }
      views.push_back(render_cylindrical(*scene, gt[i], cam));
      add_noise(views.back().image, 0.02, 1000 * t + i);
    }
    for (int f = 0; f < 4; ++f) {
      std::vector<Pose> pred{Pose::identity()};
      for (int i = 0; i + 1 < frames; ++i) {
        const Crop target = crop_fov(views[i].image, cam, fovs[f]);
        const Crop source = crop_fov(views[i + 1].image, cam, fovs[f]);
        const bool full = fovs[f] == 360.0;
        const PoseResult r = optimize_pose(
            full ? views[i].image : target.image,
            full ? views[i + 1].image : source.image,
            full ? views[i].depth : crop_depth(views[i].depth, target),
            Pose::identity(), full ? cam : target.camera, weights,
            OptimConfig{});
        pred.push_back(pred.back() * r.pose.inverse());
      }
      mean_ate[f] += ate(pred, gt, 3).mean / trajectories;
    }
  }
  bool pass = true;
  for (int f = 1; f < 4; ++f) pass = pass && mean_ate[f] <= mean_ate[f - 1];
  return {pass, fmt("mean ATE (m) at 100/180/270/360 deg: %.5f %.5f %.5f %.5f",
                    mean_ate[0], mean_ate[1], mean_ate[2], mean_ate[3])};
}

// 10. Depth metrics against the brute-force reference; ATE hand cases.
Outcome metrics_oracle() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  auto random_map = [&] {
    DepthMap d(8, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) d.set(y, x, u(rng));
    }
    return d;
  };
  double worst = 0.0;
  bool counts = true;
  for (int i = 0; i < 100; ++i) {
    const DepthMap gt = random_map();
    DepthMap pred = random_map();
    pred.invalidate(i % 8, (3 * i) % 8);
    const bool scale = i % 2 == 0;
    const double cap = i % 3 == 0 ? 12.0 : 80.0;
    const DepthMetrics m = depth_metrics(pred, gt, {scale, cap});
    const DepthMetrics r = testing::reference_depth_metrics(pred, gt, scale, cap);
    counts = counts && m.count == r.count;
    for (auto [a, b] : {std::pair(m.abs_rel, r.abs_rel), {m.sq_rel, r.sq_rel},
                        {m.rmse, r.rmse}, {m.rmse_log, r.rmse_log},
                        {m.delta1, r.delta1}, {m.delta2, r.delta2},
                        {m.delta3, r.delta3}}) {
      worst = std::max(worst, std::abs(a - b));
    }
  }

  std::vector<Pose> line;
  for (int i = 0; i < 5; ++i) {
    line.push_back(Pose::from_vector({0, 0, double(i), 0, 0, 0}));
  }
  std::vector<Pose> gt;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 7; ++i) {
    gt.push_back(Pose::from_vector(
        {n(rng), n(rng), n(rng), 0.1 * n(rng), 0.1 * n(rng), 0.1 * n(rng)}));
  }
  std::vector<Pose> scaled = gt;
  for (Pose& p : scaled) p.translation *= 3.0;
  std::vector<Pose> offset = line;
  offset[3].translation.x() += 0.1;
  // Least-squares scale <p,g>/<p,p> = 30/30.01 for the single 5-frame window.
  const double s = 30.0 / 30.01;
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double dz = (s - 1.0) * i;
    const double dx = i == 3 ? 0.1 * s : 0.0;
    expected += std::sqrt(dz * dz + dx * dx) / 5.0;
  }
  const AteResult same = ate(gt, gt, 3);
  const AteResult sc = ate(scaled, gt, 3);
  const AteResult off = ate(offset, line, 5);
  const bool ate_ok = std::abs(same.mean) < 1e-12 && std::abs(same.std_dev) < 1e-12 &&
                      std::abs(sc.mean) < 1e-12 && std::abs(sc.std_dev) < 1e-12 &&
                      std::abs(off.mean - expected) < 1e-14;
  return {worst <= 1e-12 && counts && ate_ok,
          fmt("depth metrics max deviation %.3g over 100 pairs; ATE "
              "identical %.2g, x3 scaled %.2g, lateral offset %.10f "
              "(expected %.10f)",
              worst, same.mean, sc.mean, off.mean, expected)};
}

// 11. The zero, identity and arithmetic loss examples.
Outcome loss_identities() {
  std::mt19937_64 rng(11);
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* name) {
    if (!ok) failed.push_back(name);
  };

  const Panorama a = testing::random_image(8, 16, 3, rng);
  const Panorama b = testing::random_image(8, 16, 3, rng);
  const Mask all(8, 16, true);
  expect(photometric_loss(a, a, all).value == 0.0, "identical images");
  const ExplainabilityMask zeros(8, 16, 0.0);
  expect(photometric_loss(a, b, all, &zeros).value == 0.0, "zero mask");
  Panorama t(1, 2, 1, false);
  Panorama y(1, 2, 1, false);
  t.at(0, 0) = 0.2;
  t.at(0, 1) = 0.8;
  y.at(0, 0) = 0.5;
  y.at(0, 1) = 0.6;
  expect(std::abs(photometric_loss(t, y, Mask(1, 2, true)).value - 0.25) < 1e-15,
         "1x2 arithmetic");

  const DepthMap flat(8, 16, 3.0);
  expect(smooth_loss_2nd(flat) == 0.0, "smooth: constant depth");
  DepthMap ramp(8, 16);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 16; ++c) ramp.set(r, c, 2.0 + 0.5 * r);
  }
  expect(smooth_loss_2nd(ramp) == 0.0, "smooth: planar ramp");
  expect(smooth_loss_image_aware(flat, a) == 0.0, "image-aware: constant depth");
  // d = x^2 + y^2 + xy without wrap: xx = yy = 2, xy = 1 everywhere.
  Panorama gray(5, 5, 1, false);
  for (double& v : gray.data()) v = 0.4;
  DepthMap quad(5, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) quad.set(r, c, 1.0 + c * c + r * r + c * r);
  }
  const std::vector<double> unit = image_edge_weights(gray);
  expect(std::all_of(unit.begin(), unit.end(), [](double x) { return x == 1.0; }) &&
             smooth_loss_image_aware(quad, gray) == 5.0,
         "image-aware: constant image");

  const double e8 = 1e-8;
  // Equal to -log(1 + eps) up to the rounding of the running sum.
  expect(std::abs(explainability_loss(ExplainabilityMask(4, 4, 1.0)) /
                      -std::log(1.0 + e8) -
                  1.0) < 1e-15,
         "explain: ones");
  expect(std::abs(explainability_loss(ExplainabilityMask(4, 4, 0.5)) -
                  std::log(2.0)) < 1e-7,
         "explain: halves");
  expect(std::abs(explainability_loss(
                      ExplainabilityMask(1, 2, std::vector<double>{1.0, 0.25})) -
                  std::log(4.0) / 2.0) < 1e-6,
         "explain: mixed");

  const CylindricalCamera cam = CylindricalCamera::with_square_pixels(32, 8);
  const auto scene = make_standard_scene(StandardScene::kRoom, 11);
  const RenderedView v = render_cylindrical(*scene, Pose::identity(), cam);
  const Panorama other =
      render_cylindrical(*scene, Pose::from_vector({0.2, 0, 0.1, 0, 0.1, 0}), cam)
          .image;
  LossWeights w{0.0, 0.0, 0.2, 4};
  const Pose id = Pose::identity();
  const std::vector<DepthMap> pyr = depth_pyramid(v.depth, 4);
  expect(total_loss(v.image, std::span(&v.image, 1), pyr, std::span(&id, 1), cam,
                    w)
                 .total == 0.0,
         "total: identity pose");
  w = LossWeights{2.0, 0.0, 0.2, 4};
  const LossBreakdown wired = total_loss(v.image, std::span(&other, 1), pyr,
                                         std::span(&id, 1), cam, w);
  expect(std::abs(wired.total - (wired.pixel + 2.0 * wired.smooth)) <
             1e-12 * wired.total,
         "total: pixel + 2 smooth");
  w = LossWeights{0.0, 0.0, 0.2, 1};
  const std::vector<Pose> ids{id, id};
  const std::vector<Panorama> one{other};
  const std::vector<Panorama> two{other, other};
  const double p1 = total_loss(v.image, one, std::span(pyr.data(), 1),
                               std::span(ids.data(), 1), cam, w)
                        .pixel;
  const double p2 =
      total_loss(v.image, two, std::span(pyr.data(), 1), ids, cam, w).pixel;
  expect(p1 > 0.0 && p2 == 2.0 * p1, "total: two sources");

  std::string detail = "13 identities hold";
  if (!failed.empty()) {
    detail = "failed:";
    for (const std::string& f : failed) detail += " [" + f + "]";
  }
  return {failed.empty(), detail};
}

}  // namespace
}  // namespace cylpano

int main() {
  using namespace cylpano;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"projection round trip", projection_round_trip},
      {"warp identity", warp_identity},
      {"yaw-shift equivalence", yaw_shift},
      {"wrap-convolution equivariance", conv_equivariance},
      {"gradient check", gradient_check},
      {"synthetic pose recovery", pose_recovery},
      {"synthetic depth recovery", depth_recovery},
      {"seam ablation", seam_ablation},
      {"FOV ablation", fov_ablation},
      {"metrics oracle", metrics_oracle},
      {"loss unit identities", loss_identities},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    failures += !o.pass;
    std::printf("%s %2zu %-30s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
