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

// Ray-traced synthetic scenes with band-limited procedural textures. Frames
// are rendered directly from scene geometry, never through the warping code,
// so they serve as ground truth for the view-synthesis and optimization
// routines.

#ifndef CYLPANO_SYNTHETIC_HPP_
#define CYLPANO_SYNTHETIC_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cylpano/geometry.hpp"
#include "cylpano/panorama.hpp"

namespace cylpano {

// 0.5 + sum of sinusoids in (u, v), values within [0.05, 0.95].
class Texture {
 public:
  // `integer_u` rounds u-frequencies to integers so the texture is periodic
  // in u with period 2*pi.
  static Texture random(std::uint64_t seed, int channels, int waves,
                        double max_frequency, bool integer_u = false);

  int channels() const { return static_cast<int>(waves_.size()); }
  void eval(double u, double v, std::span<double> out) const;

 private:
  struct Wave {
    double fu, fv, phase, amplitude;
  };
  std::vector<std::vector<Wave>> waves_;
};

class Scene {
 public:
  virtual ~Scene() = default;
  virtual int channels() const = 0;
  // Ray parameter t > 0 of the first hit along origin + t * dir, writing the
  // surface color; nullopt when nothing is hit.
  virtual std::optional<double> trace(const Eigen::Vector3d& origin,
                                      const Eigen::Vector3d& dir,
                                      std::span<double> color) const = 0;
};

// Infinite vertical cylinder of the given radius around the world y axis.
class CylinderScene : public Scene {
 public:
  CylinderScene(double radius, Texture texture);
  int channels() const override { return texture_.channels(); }
  std::optional<double> trace(const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& dir,
                              std::span<double> color) const override;

 private:
  double radius_;
  Texture texture_;
};

// Axis-aligned room [x_min, x_max] x [y_min, y_max] x [z_min, z_max], each
// wall with its own texture (order: -x, +x, -y, +y, -z, +z).
class BoxScene : public Scene {
 public:
  BoxScene(Eigen::Vector3d min_corner, Eigen::Vector3d max_corner,
           std::vector<Texture> wall_textures);
  int channels() const override { return walls_[0].channels(); }
  std::optional<double> trace(const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& dir,
                              std::span<double> color) const override;
  // Index of the wall hit by the ray, or -1.
  int wall_hit(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;

 private:
  Eigen::Vector3d min_;
  Eigen::Vector3d max_;
  std::vector<Texture> walls_;
};

struct RenderedView {
  Panorama image;
  DepthMap depth;  // radial distance from the camera axis
};

// `world_from_camera` maps camera coordinates to world coordinates.
RenderedView render_cylindrical(const Scene& scene,
                                const Pose& world_from_camera,
                                const CylindricalCamera& cam);
Panorama render_pinhole(const Scene& scene, const Pose& world_from_camera,
                        const PinholeCamera& cam);
Panorama render_equirect(const Scene& scene, const Pose& world_from_camera,
                         int height, int width);

// Target-to-source transform used by the warp: X_source = P * X_target.
Pose relative_pose(const Pose& world_from_target,
                   const Pose& world_from_source);

// Ready-made scenes shared by the tests, the C API and the command line.
//   kCylinder: textured cylinder of radius 3 m around the world y axis.
//   kRoom: box room x in [-4, 4], y in [-3, 3], z in [-3, 5]; the camera at
//          the origin faces the z = 5 wall.
enum class StandardScene { kCylinder, kRoom };
std::unique_ptr<Scene> make_standard_scene(StandardScene kind,
                                           std::uint64_t seed,
                                           int channels = 3);

// Adds zero-mean Gaussian noise and clamps to [0, 1].
void add_noise(Panorama& img, double sigma, std::uint64_t seed);

}  // namespace cylpano

#endif  // CYLPANO_SYNTHETIC_HPP_
