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

#include "cylpano/optim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cylpano/error.hpp"

namespace cylpano {

namespace {

constexpr double kArmijo = 1e-4;
// Largest pose update per iteration (radians, or translation in units of the
// median scene depth).
constexpr double kMaxPoseStep = 0.05;
// Consecutive iterations with a relative decrease below the tolerance that
// end a descent.
constexpr int kPatience = 3;
constexpr double kMaxEpsilonGrowth = 1000.0;

using Evaluate = std::function<LossBreakdown(std::span<const double>)>;
// Gradient at the given parameters with the given difference step.
using Gradient =
    std::function<std::vector<double>(std::span<const double>, double)>;
using Project = std::function<void(std::span<double>)>;

struct Descent {
  std::vector<double> params;
  LossBreakdown loss;
  Trace trace;
};

TraceRow make_row(int iter, const LossBreakdown& l, double step) {
  return {iter, l.pixel, l.smooth, l.explain, l.total, step};
}

// Projected gradient descent with halving backtracking. No step moves the
// parameters further than `max_step` at once. Trials that leave no valid
// pixel are rejected: the mean photometric error of an empty set is 0 and
// would otherwise attract the search.
//
// The objective is only piecewise smooth (absolute errors, bilinear
// sampling), so a central difference with a tiny step can return the slope of
// one side of a kink, which is no descent direction. When no step longer than
// a tenth of the difference step is accepted, the gradient is recomputed with
// a 10x larger difference step, up to kMaxEpsilonGrowth times the configured
// one, before giving up.
Descent descend(const Evaluate& evaluate, const Gradient& gradient,
                const Project& project, std::vector<double> params,
                const OptimConfig& cfg, double max_step) {
  project(params);
  Descent out;
  out.loss = evaluate(params);
  if (!std::isfinite(out.loss.total)) {
    throw NumericError("objective is not finite at the initial parameters");
  }
  out.trace.push_back(make_row(0, out.loss, 0.0));

  double alpha = cfg.step_size;
  int stalled = 0;
  std::vector<double> candidate(params.size());
  double epsilon = cfg.fd_epsilon;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const std::vector<double> g = gradient(params, epsilon);
    double gnorm2 = 0.0;
    for (double v : g) gnorm2 += v * v;
    if (!(gnorm2 > 0.0) || !std::isfinite(gnorm2)) break;
    const double gnorm = std::sqrt(gnorm2);
    // A step much shorter than the difference step means the gradient does
    // not describe the objective at that scale; count it as a failure.
    const double min_step = 0.1 * epsilon;

    // Every search starts from the largest allowed step: on this piecewise
    // smooth objective a short step forced by one kink says little about the
    // next iteration.
    alpha = std::min(cfg.step_size, max_step / gnorm);
    bool accepted = false;
    LossBreakdown trial;
    double moved = 0.0;
    while (alpha * gnorm > min_step) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        candidate[i] = params[i] - alpha * g[i];
      }
      project(candidate);
      double decrease = 0.0;
      double dist2 = 0.0;
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double d = params[i] - candidate[i];
        decrease += g[i] * d;
        dist2 += d * d;
      }
      if (decrease > 0.0) {
        trial = evaluate(candidate);
        if (std::isfinite(trial.total) && !trial.no_valid_pixels &&
            trial.total <= out.loss.total - kArmijo * decrease) {
          accepted = true;
          moved = std::sqrt(dist2);
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (epsilon >= kMaxEpsilonGrowth * cfg.fd_epsilon) break;
      epsilon *= 10.0;
      continue;
    }
    epsilon = cfg.fd_epsilon;

    const double previous = out.loss.total;
    params.swap(candidate);
    out.loss = trial;
    out.trace.push_back(make_row(iter, out.loss, moved));
    const double rel = (previous - out.loss.total) /
                       std::max(std::abs(previous), 1e-300);
    stalled = rel < cfg.convergence_tol ? stalled + 1 : 0;
    if (stalled == kPatience) break;
  }
  out.params = std::move(params);
  return out;
}

double median_valid_depth(const DepthMap& depth) {
  std::vector<double> v;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(y, x)) v.push_back(depth.depth(y, x));
    }
  }
  if (v.empty()) return 1.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

void check_depth_for(const LossProblem& problem, const DepthMap& depth) {
  const CylindricalCamera& cam = problem.camera(0);
  if (depth.height() != cam.height() || depth.width() != cam.width()) {
    throw InvalidArgument("depth map size does not match the target");
  }
  if (depth.validity().count() == 0) {
    throw InvalidArgument("depth map has no valid pixel");
  }
}

// Optimizes poses[k] with the other poses held fixed.
PoseResult optimize_pose_of(const LossProblem& problem, const DepthMap& depth,
                            std::vector<Pose> poses, std::size_t k,
                            const OptimConfig& cfg) {
  cfg.validate();
  check_depth_for(problem, depth);
  const std::vector<DepthMap> pyramid = depth_pyramid(depth, problem.scales());

  // Translation is optimized in units of the scene depth so that all six
  // parameters move pixels by comparable amounts.
  const double t_scale = median_valid_depth(depth);
  auto to_pose = [t_scale](std::span<const double> p) {
    Pose pose;
    pose.translation = {p[0] * t_scale, p[1] * t_scale, p[2] * t_scale};
    pose.rotation = {p[3], p[4], p[5]};
    return pose;
  };
  const std::array<double, 6> v = poses[k].to_vector();
  std::vector<double> params{v[0] / t_scale, v[1] / t_scale, v[2] / t_scale,
                             v[3], v[4], v[5]};

  Descent result;
  for (int first = problem.scales() - 1; first >= 0; --first) {
    const std::span<const DepthMap> levels(pyramid.begin() + first,
                                           pyramid.end());
    const Evaluate evaluate = [&](std::span<const double> p) {
      std::vector<Pose> trial = poses;
      trial[k] = to_pose(p);
      return problem.evaluate(levels, trial, first);
    };
    // The valid-pixel set is held at its value at `p` while differencing,
    // as an autodiff framework would treat the mask.
    const Gradient gradient = [&](std::span<const double> p, double eps) {
      std::vector<Pose> trial = poses;
      trial[k] = to_pose(p);
      LossProblem::ValiditySet frozen;
      problem.evaluate(levels, trial, first, nullptr, &frozen);
      return numeric_gradient(
          [&](std::span<const double> q) {
            trial[k] = to_pose(q);
            return problem.evaluate(levels, trial, first, &frozen).total;
          },
          p, eps);
    };
    result = descend(evaluate, gradient, [](std::span<double>) {}, params,
                     cfg, kMaxPoseStep);
    params = result.params;
  }
  return {to_pose(params), result.loss, result.trace};
}

}  // namespace

std::vector<double> pose_gradient(const LossProblem& problem,
                                  const DepthMap& depth,
                                  std::span<const Pose> poses, std::size_t k,
                                  double epsilon) {
  if (k >= poses.size()) throw InvalidArgument("pose index out of range");
  check_depth_for(problem, depth);
  const std::vector<DepthMap> pyramid = depth_pyramid(depth, problem.scales());
  std::vector<Pose> trial(poses.begin(), poses.end());
  LossProblem::ValiditySet frozen;
  problem.evaluate(pyramid, trial, 0, nullptr, &frozen);
  const std::array<double, 6> v = poses[k].to_vector();
  return numeric_gradient(
      [&](std::span<const double> q) {
        trial[k] = Pose::from_vector({q[0], q[1], q[2], q[3], q[4], q[5]});
        return problem.evaluate(pyramid, trial, 0, &frozen).total;
      },
      v, epsilon);
}

namespace {

DepthMap depth_from_disparity(const DepthMap& like,
                              std::span<const double> disparity) {
  DepthMap out = like;
  for (int y = 0; y < like.height(); ++y) {
    for (int x = 0; x < like.width(); ++x) {
      if (!like.valid(y, x)) continue;
      out.set(y, x, 1.0 / disparity[static_cast<std::size_t>(y) * like.width() +
                                    x]);
    }
  }
  return out;
}

std::vector<double> disparity_of(const DepthMap& depth) {
  std::vector<double> u(static_cast<std::size_t>(depth.height()) *
                            depth.width(),
                        0.0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(y, x)) {
        u[static_cast<std::size_t>(y) * depth.width() + x] =
            1.0 / depth.depth(y, x);
      }
    }
  }
  return u;
}

// Bilinear upsampling of a coarse disparity grid onto the valid pixels of
// `fine`. Coarse pixel j covers fine pixels 2j and 2j+1.
DepthMap upsample_into(const DepthMap& coarse, const DepthMap& fine,
                       bool cyclic) {
  Panorama disp(coarse.height(), coarse.width(), 1, cyclic);
  Panorama weight(coarse.height(), coarse.width(), 1, cyclic);
  for (int y = 0; y < coarse.height(); ++y) {
    for (int x = 0; x < coarse.width(); ++x) {
      if (coarse.valid(y, x)) {
        disp.at(y, x) = 1.0 / coarse.depth(y, x);
        weight.at(y, x) = 1.0;
      }
    }
  }
  const HorizontalBoundary b =
      cyclic ? HorizontalBoundary::kWrap : HorizontalBoundary::kClamp;
  DepthMap out = fine;
  std::array<double, 1> dv{};
  std::array<double, 1> wv{};
  for (int y = 0; y < fine.height(); ++y) {
    for (int x = 0; x < fine.width(); ++x) {
      if (!fine.valid(y, x)) continue;
      const double cx = (x - 0.5) / 2.0;
      const double cy = std::clamp((y - 0.5) / 2.0, 0.0,
                                   static_cast<double>(coarse.height() - 1));
      sample_bilinear(disp, cx, cy, b, dv);
      sample_bilinear(weight, cx, cy, b, wv);
      if (wv[0] > 0.0 && dv[0] > 0.0) out.set(y, x, wv[0] / dv[0]);
    }
  }
  return out;
}

}  // namespace

void OptimConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(step_size > 0.0)) throw InvalidArgument("step_size must be > 0");
  if (!(fd_epsilon > 0.0)) throw InvalidArgument("fd_epsilon must be > 0");
  if (!(convergence_tol >= 0.0)) {
    throw InvalidArgument("convergence_tol must be >= 0");
  }
  if (!(depth_min > 0.0 && depth_min < depth_max)) {
    throw InvalidArgument("depth bounds must satisfy 0 < min < max");
  }
}

std::vector<double> numeric_gradient(const Objective& f,
                                     std::span<const double> params,
                                     double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  const double f0 = f(params);
  if (!std::isfinite(f0)) {
    throw NumericError("objective is not finite at the evaluation point");
  }
  std::vector<double> probe(params.begin(), params.end());
  std::vector<double> g(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + epsilon;
    const double fp = f(probe);
    probe[k] = saved - epsilon;
    const double fm = f(probe);
    probe[k] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      std::ostringstream os;
      os << "objective is not finite when probing parameter " << k;
      throw NumericError(os.str(), static_cast<long>(k));
    }
    g[k] = (fp - fm) / (2.0 * epsilon);
  }
  return g;
}

PoseResult optimize_pose(const LossProblem& problem, const DepthMap& depth,
                         const Pose& init, const OptimConfig& cfg) {
  if (problem.num_sources() != 1) {
    throw InvalidArgument("optimize_pose expects exactly one source");
  }
  return optimize_pose_of(problem, depth, {init}, 0, cfg);
}

PoseResult optimize_pose(const Panorama& target, const Panorama& source,
                         const DepthMap& depth, const Pose& init,
                         const CylindricalCamera& cam,
                         const LossWeights& weights, const OptimConfig& cfg) {
  const LossProblem problem(target, {source}, cam, weights);
  return optimize_pose(problem, depth, init, cfg);
}

std::vector<double> disparity_gradient(const LossProblem& problem,
                                       const DepthMap& depth,
                                       std::span<const Pose> poses,
                                       double fd_epsilon, int first_scale) {
  const int scales = problem.scales();
  const std::vector<DepthMap> pyr =
      depth_pyramid(depth, scales - first_scale);
  const double w_smooth = problem.weights().smooth_weight();

  // Gradient w.r.t. depth at every level of the pyramid.
  std::vector<std::vector<double>> grad(pyr.size());
  std::array<double, 16> value{};
  for (int s = first_scale; s < scales; ++s) {
    const DepthMap& d = pyr[s - first_scale];
    const CylindricalCamera& cam = problem.camera(s);
    const Panorama& tgt = problem.target(s);
    const int nc = tgt.channels();
    std::vector<double>& g = grad[s - first_scale];
    smooth_loss_and_gradient(d, &tgt, problem.weights().smooth, cam.cyclic(),
                             &g);
    for (double& v : g) v *= w_smooth;

    for (std::size_t k = 0; k < problem.num_sources(); ++k) {
      const PhotometricLoss base = problem.pixel_loss(k, s, d, poses[k]);
      if (base.valid_pixels == 0) continue;
      const double inv_n = 1.0 / static_cast<double>(base.valid_pixels);
      const Panorama& src = problem.source(k, s);
      const ExplainabilityMask* m = problem.mask(k, s);
      const RigidMotion motion(poses[k]);
      auto term = [&](int x, int y, double dd, double* out) {
        if (!warp_pixel(src, cam, x, y, dd, motion, problem.boundary(),
                        value)) {
          return false;
        }
        double diff = 0.0;
        for (int c = 0; c < nc; ++c) diff += std::abs(value[c] - tgt.at(y, x, c));
        *out = (m ? (*m)(y, x) : 1.0) * (diff / nc);
        return true;
      };
      for (int y = 0; y < d.height(); ++y) {
        for (int x = 0; x < d.width(); ++x) {
          if (!d.valid(y, x)) continue;
          const double d0 = d.depth(y, x);
          const double h = fd_epsilon * d0;
          double fp = 0.0;
          double fm = 0.0;
          double f0 = 0.0;
          const bool okp = term(x, y, d0 + h, &fp);
          const bool okm = term(x, y, d0 - h, &fm);
          double deriv = 0.0;
          if (okp && okm) {
            deriv = (fp - fm) / (2.0 * h);
          } else if (term(x, y, d0, &f0)) {
            if (okp) deriv = (fp - f0) / h;
            if (okm) deriv = (f0 - fm) / h;
          }
          g[static_cast<std::size_t>(y) * d.width() + x] += deriv * inv_n;
        }
      }
    }
  }

  // Chain through the box-average pyramid, coarse to fine.
  for (int s = scales - 1; s > first_scale; --s) {
    const DepthMap& fine = pyr[s - 1 - first_scale];
    const DepthMap& coarse = pyr[s - first_scale];
    const std::vector<double>& gc = grad[s - first_scale];
    std::vector<double>& gf = grad[s - 1 - first_scale];
    for (int y = 0; y < coarse.height(); ++y) {
      for (int x = 0; x < coarse.width(); ++x) {
        if (!coarse.valid(y, x)) continue;
        int n = 0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            if (fine.valid(2 * y + dy, 2 * x + dx)) ++n;
          }
        }
        const double share =
            gc[static_cast<std::size_t>(y) * coarse.width() + x] / n;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            if (fine.valid(2 * y + dy, 2 * x + dx)) {
              gf[static_cast<std::size_t>(2 * y + dy) * fine.width() + 2 * x +
                 dx] += share;
            }
          }
        }
      }
    }
  }

  // d = 1/u  =>  dL/du = -d^2 dL/dd
  std::vector<double> gu = std::move(grad[0]);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * depth.width() + x;
      gu[i] = depth.valid(y, x)
                  ? -depth.depth(y, x) * depth.depth(y, x) * gu[i]
                  : 0.0;
    }
  }
  return gu;
}

DepthResult optimize_depth(const LossProblem& problem, const DepthMap& init,
                           std::span<const Pose> poses,
                           const OptimConfig& cfg) {
  cfg.validate();
  check_depth_for(problem, init);
  if (problem.num_sources() == 0) {
    throw InvalidArgument("optimize_depth needs at least one source");
  }
  if (poses.size() != problem.num_sources()) {
    throw InvalidArgument("need one pose per source");
  }
  const double u_min = 1.0 / cfg.depth_max;
  const double u_max = 1.0 / cfg.depth_min;

  const std::vector<DepthMap> init_pyr = depth_pyramid(init, problem.scales());
  DepthMap current = init_pyr.back();
  Descent result;
  for (int first = problem.scales() - 1; first >= 0; --first) {
    const DepthMap& shape = init_pyr[first];
    if (first != problem.scales() - 1) {
      current = upsample_into(current, shape, problem.camera(first).cyclic());
    }
    const Project project = [&shape, u_min, u_max](std::span<double> u) {
      for (int y = 0; y < shape.height(); ++y) {
        for (int x = 0; x < shape.width(); ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * shape.width() + x;
          u[i] = shape.valid(y, x) ? std::clamp(u[i], u_min, u_max) : 0.0;
        }
      }
    };
    const Evaluate evaluate = [&](std::span<const double> u) {
      return problem.evaluate(depth_from_disparity(shape, u), poses, first);
    };
    const Gradient gradient = [&](std::span<const double> u, double eps) {
      return disparity_gradient(problem, depth_from_disparity(shape, u), poses,
                                eps, first);
    };
    result = descend(evaluate, gradient, project, disparity_of(current), cfg,
                     std::numeric_limits<double>::infinity());
    current = depth_from_disparity(shape, result.params);
  }
  return {current, result.loss, result.trace};
}

DepthResult optimize_depth(const Panorama& target,
                           std::span<const Panorama> sources,
                           std::span<const Pose> poses, const DepthMap& init,
                           const CylindricalCamera& cam,
                           const LossWeights& weights, const OptimConfig& cfg) {
  const LossProblem problem(
      target, std::vector<Panorama>(sources.begin(), sources.end()), cam,
      weights);
  return optimize_depth(problem, init, poses, cfg);
}

AlternateResult optimize_alternate(const LossProblem& problem,
                                   const DepthMap& init_depth,
                                   std::span<const Pose> init_poses,
                                   const OptimConfig& cfg, int rounds) {
  if (rounds < 1) throw InvalidArgument("alternation needs at least one round");
  if (init_poses.size() != problem.num_sources()) {
    throw InvalidArgument("need one pose per source");
  }
  AlternateResult out;
  out.depth = init_depth;
  out.poses.assign(init_poses.begin(), init_poses.end());
  for (int round = 1; round <= rounds; ++round) {
    for (std::size_t k = 0; k < out.poses.size(); ++k) {
      out.poses[k] = optimize_pose_of(problem, out.depth, out.poses, k, cfg).pose;
    }
    DepthResult d = optimize_depth(problem, out.depth, out.poses, cfg);
    out.depth = std::move(d.depth);
    out.loss = d.loss;
    out.trace.push_back(make_row(round, out.loss, 0.0));
  }
  return out;
}

}  // namespace cylpano
