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

// File formats:
//   * binary PGM/PPM (P5/P6), 8 bits per channel, for color images;
//   * PFM (little-endian float32, scale -1.0, rows stored bottom-up) for
//     depth maps, masks and float images;
//   * whitespace-separated trajectory records "id tx ty tz rx ry rz";
//   * comma-separated optimization traces.

#ifndef CYLPANO_IO_HPP_
#define CYLPANO_IO_HPP_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cylpano/geometry.hpp"
#include "cylpano/optim.hpp"
#include "cylpano/panorama.hpp"

namespace cylpano {

// 8-bit PNM. Values are scaled by 1/255 on read; on write they are clamped to
// [0, 1] and rounded to the nearest level. Only 1 or 3 channels.
Panorama read_pnm(const std::string& path);
void write_pnm(const std::string& path, const Panorama& img);

// 1-channel ("Pf") or 3-channel ("PF") float map.
Panorama read_pfm(const std::string& path);
void write_pfm(const std::string& path, const Panorama& img);

// Dispatches on the file's magic number (PNM or PFM).
Panorama read_image(const std::string& path);
// Dispatches on the extension: .pfm writes a float map, anything else PNM.
void write_image(const std::string& path, const Panorama& img);

// Invalid depths are stored as 0.
DepthMap read_depth(const std::string& path);
void write_depth(const std::string& path, const DepthMap& depth);

ExplainabilityMask read_mask(const std::string& path);
// Validity masks are written as 0/1 float maps.
void write_mask(const std::string& path, const Mask& mask);

struct TrajectoryRecord {
  int frame_id = 0;
  Pose pose;
};

std::vector<TrajectoryRecord> read_trajectory(const std::string& path);
void write_trajectory(const std::string& path,
                      const std::vector<TrajectoryRecord>& records);

void write_trace_csv(std::ostream& os, const Trace& trace);

}  // namespace cylpano

#endif  // CYLPANO_IO_HPP_
