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

// Direct minimization of the view-synthesis objective with respect to the
// relative pose and/or the per-pixel target depth.
//
// Both solvers are projected gradient descent with a halving backtracking
// line search (Armijo constant 1e-4), run coarse-to-fine: the parameters are
// first fitted against the coarsest scales of the objective only, then the
// finer scales are added one at a time. The final phase evaluates the full
// multi-scale objective and its iterations form the returned trace.

#ifndef CYLPANO_OPTIM_HPP_
#define CYLPANO_OPTIM_HPP_

#include <functional>
#include <span>
#include <vector>

#include "cylpano/geometry.hpp"
#include "cylpano/panorama.hpp"
#include "cylpano/synthesis.hpp"

namespace cylpano {

struct OptimConfig {
  int max_iters = 200;
  double step_size = 1.0;
  double fd_epsilon = 1e-5;
  double convergence_tol = 1e-6;
  double depth_min = 0.1;
  double depth_max = 100.0;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double pixel = 0.0;
  double smooth = 0.0;
  double explain = 0.0;
  double total = 0.0;
  double step = 0.0;  // accepted step length; 0 for the initial row
};

using Trace = std::vector<TraceRow>;

using Objective = std::function<double(std::span<const double>)>;

// Central differences g_k = (f(p + eps e_k) - f(p - eps e_k)) / (2 eps).
// Throws NumericError (with the parameter index) if f is not finite at p or
// at any probe.
std::vector<double> numeric_gradient(const Objective& f,
                                     std::span<const double> params,
                                     double epsilon);

// Central-difference gradient of the loss with respect to the 6-vector
// (tx, ty, tz, rx, ry, rz) of poses[k]. The valid-pixel set of every (scale,
// source) pair is held at its value at `poses`, so pixels crossing the image
// border do not turn the difference quotient into a step response.
std::vector<double> pose_gradient(const LossProblem& problem,
                                  const DepthMap& depth,
                                  std::span<const Pose> poses, std::size_t k,
                                  double epsilon);

struct PoseResult {
  Pose pose;
  LossBreakdown loss;
  Trace trace;
};

PoseResult optimize_pose(const LossProblem& problem, const DepthMap& depth,
                         const Pose& init, const OptimConfig& cfg);

PoseResult optimize_pose(const Panorama& target, const Panorama& source,
                         const DepthMap& depth, const Pose& init,
                         const CylindricalCamera& cam,
                         const LossWeights& weights, const OptimConfig& cfg);

struct DepthResult {
  DepthMap depth;
  LossBreakdown loss;
  Trace trace;
};

// Optimizes disparity 1/d per valid pixel of `init`, clamped to the depth
// bounds. Poses are target-to-source transforms, one per source.
DepthResult optimize_depth(const LossProblem& problem, const DepthMap& init,
                           std::span<const Pose> poses,
                           const OptimConfig& cfg);

DepthResult optimize_depth(const Panorama& target,
                           std::span<const Panorama> sources,
                           std::span<const Pose> poses, const DepthMap& init,
                           const CylindricalCamera& cam,
                           const LossWeights& weights, const OptimConfig& cfg);

// Gradient of the full objective w.r.t. the disparity of every pixel of
// `depth` (zero at invalid pixels). Photometric terms are differentiated per
// pixel by central differences, smoothness analytically.
std::vector<double> disparity_gradient(const LossProblem& problem,
                                       const DepthMap& depth,
                                       std::span<const Pose> poses,
                                       double fd_epsilon, int first_scale = 0);

struct AlternateResult {
  DepthMap depth;
  std::vector<Pose> poses;
  LossBreakdown loss;
  Trace trace;  // one row per round, after its depth step
};

// Alternates pose refinement (per source, depth fixed) and depth refinement
// (poses fixed). Convergence of the alternation is not guaranteed.
AlternateResult optimize_alternate(const LossProblem& problem,
                                   const DepthMap& init_depth,
                                   std::span<const Pose> init_poses,
                                   const OptimConfig& cfg, int rounds);

}  // namespace cylpano

#endif  // CYLPANO_OPTIM_HPP_
