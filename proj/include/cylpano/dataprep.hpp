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

// Dataset construction: pinhole-rig stitching, equirectangular reprojection,
// static-frame filtering, FOV crops and three-frame training sequences.

#ifndef CYLPANO_DATAPREP_HPP_
#define CYLPANO_DATAPREP_HPP_

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cylpano/geometry.hpp"
#include "cylpano/panorama.hpp"

namespace cylpano {

// Four views sharing one optical center and intrinsics, with optical axes at
// azimuths 0, 90, 180 and 270 degrees.
struct PinholeRig {
  std::array<Panorama, 4> views;
  PinholeCamera camera;
};

// Each output pixel is taken from the view whose optical axis is nearest in
// azimuth (no blending; ties go to the lower view index). Throws
// CoverageError naming the first azimuth a view cannot see.
Panorama stitch_pinhole_to_cylinder(const PinholeRig& rig,
                                    const CylindricalCamera& out_cam);

// Equirectangular input: column x <-> azimuth (x / W - 1/2) * 2 pi, row y <->
// latitude pi/2 - y / H * pi. Cylinder height h maps to latitude atan(h).
Panorama equirect_to_cylinder(const Panorama& equirect,
                              const CylindricalCamera& out_cam);

// Inverse mapping onto an equirectangular grid; rows outside the cylinder's
// height range are left at zero and reported through `covered` if given.
Panorama cylinder_to_equirect(const Panorama& cylinder,
                              const CylindricalCamera& cam, int out_height,
                              int out_width, Mask* covered = nullptr);

struct StaticThresholds {
  double translation = 0.05;  // meters per frame
  double rotation = 0.005;    // radians per frame
};

// Indices of frames whose translation and rotation relative to the previous
// frame are both below the thresholds. Frame 0 is never static.
std::vector<int> detect_static_frames(std::span<const Pose> trajectory,
                                      const StaticThresholds& thresholds = {});

struct Crop {
  Panorama image;  // non-cyclic
  CylindricalCamera camera;
  int first_column = 0;
};

// round(fov / 360 * W) contiguous columns centered on `center_azimuth_deg`,
// taken cyclically from the panorama.
Crop crop_fov(const Panorama& pano, const CylindricalCamera& cam,
              double fov_deg, double center_azimuth_deg = 0.0);
// Same column selection applied to a depth map.
DepthMap crop_depth(const DepthMap& depth, const Crop& crop);

// Index window into a frame list: sources[0], target, sources[1] for
// three-frame windows.
struct SequenceWindow {
  int target = 0;
  std::vector<int> sources;
  std::vector<int> frame_ids;  // in temporal order
};

struct SequencePlan {
  std::vector<SequenceWindow> windows;
  bool too_few_frames = false;
};

// Sliding windows of `seq_len` frames over `frame_ids` (temporal order,
// static frames already removed). Windows never cover a gap in the ids; the
// middle frame is the target.
SequencePlan make_sequences(std::span<const int> frame_ids, int seq_len = 3,
                            int stride = 1);

struct SequenceRecord {
  Panorama target;
  std::vector<Panorama> sources;
  std::vector<int> frame_ids;
  std::optional<DepthMap> gt_depth;
  std::vector<Pose> gt_poses;  // source poses in the target frame
};

}  // namespace cylpano

#endif  // CYLPANO_DATAPREP_HPP_
