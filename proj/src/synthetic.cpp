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

#include "cylpano/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cylpano/error.hpp"

namespace cylpano {

Texture Texture::random(std::uint64_t seed, int channels, int waves,
                        double max_frequency, bool integer_u) {
  if (channels < 1 || waves < 1) {
    throw InvalidArgument("texture needs at least one channel and one wave");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(-max_frequency, max_frequency);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  Texture t;
  t.waves_.resize(channels);
  for (auto& channel : t.waves_) {
    double total = 0.0;
    for (int i = 0; i < waves; ++i) {
      Wave w{freq(rng), freq(rng), phase(rng), amp(rng)};
      if (integer_u) {
        w.fu = std::round(w.fu);
        if (w.fu == 0.0) w.fu = 1.0;
      }
      total += w.amplitude;
      channel.push_back(w);
    }
    for (Wave& w : channel) w.amplitude *= 0.45 / total;
  }
  return t;
}

void Texture::eval(double u, double v, std::span<double> out) const {
  for (std::size_t c = 0; c < waves_.size(); ++c) {
    double acc = 0.5;
    for (const Wave& w : waves_[c]) {
      acc += w.amplitude * std::sin(w.fu * u + w.fv * v + w.phase);
    }
    out[c] = acc;
  }
}

CylinderScene::CylinderScene(double radius, Texture texture)
    : radius_(radius), texture_(std::move(texture)) {
  if (!(radius > 0.0)) throw InvalidArgument("cylinder radius must be > 0");
}

std::optional<double> CylinderScene::trace(const Eigen::Vector3d& o,
                                           const Eigen::Vector3d& d,
                                           std::span<double> color) const {
  const double a = d.x() * d.x() + d.z() * d.z();
  if (!(a > 0.0)) return std::nullopt;
  const double b = 2.0 * (o.x() * d.x() + o.z() * d.z());
  const double c = o.x() * o.x() + o.z() * o.z() - radius_ * radius_;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = (-b + std::sqrt(disc)) / (2.0 * a);
  if (!(t > 0.0)) return std::nullopt;
  const Eigen::Vector3d p = o + t * d;
  texture_.eval(std::atan2(p.x(), p.z()), p.y(), color);
  return t;
}

BoxScene::BoxScene(Eigen::Vector3d min_corner, Eigen::Vector3d max_corner,
                   std::vector<Texture> wall_textures)
    : min_(std::move(min_corner)),
      max_(std::move(max_corner)),
      walls_(std::move(wall_textures)) {
  if (walls_.size() != 6) throw InvalidArgument("box scene needs 6 textures");
  if (!(min_.array() < max_.array()).all()) {
    throw InvalidArgument("box scene corners are not ordered");
  }
}

int BoxScene::wall_hit(const Eigen::Vector3d& o,
                       const Eigen::Vector3d& d) const {
  double best = std::numeric_limits<double>::infinity();
  int wall = -1;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) continue;
    const double bound = d[axis] > 0.0 ? max_[axis] : min_[axis];
    const double t = (bound - o[axis]) / d[axis];
    if (t > 0.0 && t < best) {
      best = t;
      wall = 2 * axis + (d[axis] > 0.0 ? 1 : 0);
    }
  }
  return wall;
}

std::optional<double> BoxScene::trace(const Eigen::Vector3d& o,
                                      const Eigen::Vector3d& d,
                                      std::span<double> color) const {
  const int wall = wall_hit(o, d);
  if (wall < 0) return std::nullopt;
  const int axis = wall / 2;
  const double bound = wall % 2 == 1 ? max_[axis] : min_[axis];
  const double t = (bound - o[axis]) / d[axis];
  const Eigen::Vector3d p = o + t * d;
  // In-plane coordinates: the two remaining axes in x, y, z order.
  const int ua = axis == 0 ? 2 : 0;
  const int va = axis == 1 ? 2 : 1;
  walls_[wall].eval(p[ua], p[va], color);
  return t;
}

namespace {

DepthMap invalid_depth(int h, int w) {
  DepthMap d(h, w, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) d.invalidate(y, x);
  }
  return d;
}

}  // namespace

RenderedView render_cylindrical(const Scene& scene,
                                const Pose& world_from_camera,
                                const CylindricalCamera& cam) {
  const Eigen::Matrix3d r = world_from_camera.rotation_matrix();
  const Eigen::Vector3d& origin = world_from_camera.translation;
  RenderedView view{Panorama(cam.height(), cam.width(), scene.channels(),
                             cam.cyclic()),
                    invalid_depth(cam.height(), cam.width())};
  std::vector<double> color(scene.channels());
  for (int y = 0; y < cam.height(); ++y) {
    for (int x = 0; x < cam.width(); ++x) {
      const CylCoord q = cam.from_pixel(x, y);
      // Unit radial component, so the hit parameter is the radial depth.
      const Eigen::Vector3d dir(std::sin(q.theta), q.h, std::cos(q.theta));
      const auto t = scene.trace(origin, r * dir, color);
      if (!t) continue;
      view.depth.set(y, x, *t);
      for (int c = 0; c < scene.channels(); ++c) view.image.at(y, x, c) = color[c];
    }
  }
  return view;
}

Panorama render_pinhole(const Scene& scene, const Pose& world_from_camera,
                        const PinholeCamera& cam) {
  cam.validate();
  const Eigen::Matrix3d r = world_from_camera.rotation_matrix();
  Panorama img(cam.height_px, cam.width_px, scene.channels(), false);
  std::vector<double> color(scene.channels());
  for (int y = 0; y < cam.height_px; ++y) {
    for (int x = 0; x < cam.width_px; ++x) {
      const Eigen::Vector3d dir((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy,
                                1.0);
      if (scene.trace(world_from_camera.translation, r * dir, color)) {
        for (int c = 0; c < scene.channels(); ++c) img.at(y, x, c) = color[c];
      }
    }
  }
  return img;
}

Panorama render_equirect(const Scene& scene, const Pose& world_from_camera,
                         int height, int width) {
  const Eigen::Matrix3d r = world_from_camera.rotation_matrix();
  Panorama img(height, width, scene.channels(), true);
  std::vector<double> color(scene.channels());
  for (int y = 0; y < height; ++y) {
    const double lat = kPi / 2.0 - static_cast<double>(y) / height * kPi;
    for (int x = 0; x < width; ++x) {
      const double theta = (static_cast<double>(x) / width - 0.5) * kTwoPi;
      const Eigen::Vector3d dir(std::cos(lat) * std::sin(theta), std::sin(lat),
                                std::cos(lat) * std::cos(theta));
      if (scene.trace(world_from_camera.translation, r * dir, color)) {
        for (int c = 0; c < scene.channels(); ++c) img.at(y, x, c) = color[c];
      }
    }
  }
  return img;
}

Pose relative_pose(const Pose& world_from_target,
                   const Pose& world_from_source) {
  return world_from_source.inverse() * world_from_target;
}

std::unique_ptr<Scene> make_standard_scene(StandardScene kind,
                                           std::uint64_t seed, int channels) {
  if (kind == StandardScene::kCylinder) {
    return std::make_unique<CylinderScene>(
        3.0, Texture::random(seed, channels, 8, 5.0, true));
  }
  std::vector<Texture> walls;
  for (int i = 0; i < 6; ++i) {
    walls.push_back(Texture::random(seed * 7 + i, channels, 8, 2.5));
  }
  return std::make_unique<BoxScene>(Eigen::Vector3d(-4, -3, -3),
                                    Eigen::Vector3d(4, 3, 5), std::move(walls));
}

void add_noise(Panorama& img, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : img.data()) v = std::clamp(v + noise(rng), 0.0, 1.0);
}

}  // namespace cylpano
