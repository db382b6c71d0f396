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

// Depth error/accuracy metrics and snippet-based absolute trajectory error.

#ifndef CYLPANO_METRICS_HPP_
#define CYLPANO_METRICS_HPP_

#include <span>
#include <vector>

#include "cylpano/geometry.hpp"
#include "cylpano/panorama.hpp"

namespace cylpano {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t count = 0;  // pixels evaluated
};

struct DepthEvalOptions {
  bool median_scale = true;
  double cap = 80.0;  // meters; ground truth beyond the cap is ignored
};

// Evaluated over pixels valid in both maps with gt <= cap. Throws
// InvalidArgument on size mismatch or when no pixel qualifies.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const DepthEvalOptions& options = {});

// Camera-to-world poses, one per frame.
using Trajectory = std::vector<Pose>;

struct AteResult {
  double mean = 0.0;
  double std_dev = 0.0;  // population standard deviation over windows
  std::vector<double> windows;
};

// For every window of `snippet_len` consecutive frames, positions of both
// trajectories are expressed relative to the window's first frame, the
// prediction is scaled by the least-squares factor, and the window error is
// the mean Euclidean position error.
AteResult ate(std::span<const Pose> pred, std::span<const Pose> gt,
              int snippet_len = 3);

// Error of a single already-anchored window (positions relative to frame 0).
double ate_window(std::span<const Eigen::Vector3d> pred,
                  std::span<const Eigen::Vector3d> gt);

}  // namespace cylpano

#endif  // CYLPANO_METRICS_HPP_
