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


#include "cylpano/cylpano.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <new>
#include <string>
#include <vector>

#include "cylpano/dataprep.hpp"
#include "cylpano/error.hpp"
#include "cylpano/io.hpp"
#include "cylpano/metrics.hpp"
#include "cylpano/optim.hpp"
#include "cylpano/synthesis.hpp"
#include "cylpano/synthetic.hpp"

struct cyp_image {
  cylpano::Panorama p;
};
struct cyp_depth {
  cylpano::DepthMap d;
};
struct cyp_trace {
  cylpano::Trace t;
};

namespace {

using namespace cylpano;

thread_local std::string g_last_error;

cyp_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return CYP_ERR_INVALID_ARGUMENT;
    case ErrorKind::kIo: return CYP_ERR_IO;
    case ErrorKind::kDegeneratePoint: return CYP_ERR_DEGENERATE_POINT;
    case ErrorKind::kInvalidDepth: return CYP_ERR_INVALID_DEPTH;
    case ErrorKind::kBehindCamera: return CYP_ERR_BEHIND_CAMERA;
    case ErrorKind::kNumeric: return CYP_ERR_NUMERIC;
    case ErrorKind::kCoverage: return CYP_ERR_COVERAGE;
  }
  return CYP_ERR_INTERNAL;
}

template <typename F>
cyp_status guard(F&& f) {
  g_last_error.clear();
  try {
    f();
    return CYP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return CYP_ERR_INTERNAL;
}

template <typename T>
const T& need(const T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " must not be null");
  return *p;
}

template <typename T>
T& need_mut(T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " must not be null");
  return *p;
}

template <typename T>
void need_out(T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " must not be null");
}

Pose to_pose(const cyp_pose& p) {
  return Pose::from_vector({p.v[0], p.v[1], p.v[2], p.v[3], p.v[4], p.v[5]});
}

cyp_pose from_pose(const Pose& p) {
  cyp_pose out;
  const auto v = p.to_vector();
  for (int i = 0; i < 6; ++i) out.v[i] = v[i];
  return out;
}

std::vector<Pose> to_poses(const cyp_pose* p, std::size_t n) {
  if (n > 0 && !p) throw InvalidArgument("pose array must not be null");
  std::vector<Pose> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(to_pose(p[i]));
  return out;
}

CylindricalCamera to_camera(const cyp_camera* c) {
  const cyp_camera& cam = need(c, "camera");
  return CylindricalCamera(cam.width, cam.height, cam.h_min, cam.h_max, cam.fov,
                           cam.center_azimuth);
}

cyp_camera from_camera(const CylindricalCamera& c) {
  return {c.width(), c.height(), c.h_min(), c.h_max(), c.fov(),
          c.center_azimuth()};
}

PinholeCamera to_pinhole(const cyp_pinhole* p) {
  const cyp_pinhole& c = need(p, "pinhole camera");
  PinholeCamera out;
  out.fx = c.fx;
  out.fy = c.fy;
  out.cx = c.cx;
  out.cy = c.cy;
  out.width_px = c.width;
  out.height_px = c.height;
  out.validate();
  return out;
}

LossWeights to_weights(const cyp_loss_weights* w) {
  LossWeights out;
  if (!w) return out;
  out.lambda_s = w->lambda_s;
  out.lambda_e = w->lambda_e;
  out.lambda_m = w->lambda_m;
  out.scales = w->scales;
  if (w->smooth != CYP_SMOOTH_SECOND_ORDER && w->smooth != CYP_SMOOTH_IMAGE_AWARE) {
    throw InvalidArgument("unknown smoothness kind");
  }
  out.smooth = w->smooth == CYP_SMOOTH_IMAGE_AWARE ? SmoothKind::kImageAware
                                                   : SmoothKind::kSecondOrder;
  out.validate();
  if (out.scales > CYP_MAX_SCALES) {
    throw InvalidArgument("at most " + std::to_string(CYP_MAX_SCALES) +
                          " scales are supported");
  }
  return out;
}

OptimConfig to_config(const cyp_optim_config* c) {
  OptimConfig out;
  if (!c) return out;
  out.max_iters = c->max_iters;
  out.step_size = c->step_size;
  out.fd_epsilon = c->fd_epsilon;
  out.convergence_tol = c->convergence_tol;
  out.depth_min = c->depth_min;
  out.depth_max = c->depth_max;
  out.validate();
  return out;
}

std::optional<HorizontalBoundary> to_boundary(cyp_boundary b) {
  switch (b) {
    case CYP_BOUNDARY_DEFAULT: return std::nullopt;
    case CYP_BOUNDARY_WRAP: return HorizontalBoundary::kWrap;
    case CYP_BOUNDARY_CLAMP: return HorizontalBoundary::kClamp;
    case CYP_BOUNDARY_INVALID: return HorizontalBoundary::kInvalid;
  }
  throw InvalidArgument("unknown boundary mode");
}

std::vector<Panorama> to_images(const cyp_image* const* imgs, std::size_t n,
                                const char* what) {
  if (n > 0 && !imgs) throw InvalidArgument(std::string(what) + " must not be null");
  std::vector<Panorama> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(need(imgs[i], what).p);
  return out;
}

std::vector<ExplainabilityMask> to_masks(const cyp_image* const* masks,
                                         std::size_t n) {
  std::vector<ExplainabilityMask> out;
  if (!masks) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const Panorama& m = need(masks[i], "explainability mask").p;
    if (m.channels() != 1) {
      throw InvalidArgument("explainability masks must have one channel");
    }
    const auto d = m.data();
    out.emplace_back(m.height(), m.width(), std::vector<double>(d.begin(), d.end()));
  }
  return out;
}

cyp_loss_terms terms(const LossTerms& t) {
  return {t.pixel, t.smooth, t.explain, t.total};
}

void fill_breakdown(const LossBreakdown& b, cyp_loss_breakdown* out) {
  if (!out) return;
  *out = {};
  out->total = terms(b);
  out->num_scales = static_cast<int>(b.per_scale.size());
  for (std::size_t s = 0; s < b.per_scale.size() && s < CYP_MAX_SCALES; ++s) {
    out->per_scale[s] = terms(b.per_scale[s]);
  }
  out->no_valid_pixels = b.no_valid_pixels ? 1 : 0;
}

void give_trace(Trace t, cyp_trace** out) {
  if (out) *out = new cyp_trace{std::move(t)};
}

Panorama mask_image(const Mask& m) {
  Panorama out(m.height(), m.width(), 1, false);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) out.at(y, x) = m(y, x) ? 1.0 : 0.0;
  }
  return out;
}

void check_size(const Panorama& img, const CylindricalCamera& cam,
                const char* what) {
  if (img.height() != cam.height() || img.width() != cam.width()) {
    throw InvalidArgument(std::string(what) + " does not match the camera size");
  }
}

template <typename T>
void copy_out(const std::vector<T>& v, T* out, std::size_t capacity,
              std::size_t* count) {
  need_out(count, "count");
  *count = v.size();
  if (capacity == 0) return;
  if (capacity < v.size()) throw InvalidArgument("output buffer too small");
  need_out(out, "output buffer");
  std::copy(v.begin(), v.end(), out);
}

// |a - b| / |a|, with 0/0 = 0.
double relative_difference(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

std::unique_ptr<Scene> scene_of(cyp_scene s, unsigned long long seed) {
  if (s != CYP_SCENE_CYLINDER && s != CYP_SCENE_ROOM) {
    throw InvalidArgument("unknown scene");
  }
  return make_standard_scene(
      s == CYP_SCENE_ROOM ? StandardScene::kRoom : StandardScene::kCylinder, seed);
}

}  // namespace

extern "C" {

const char* cyp_last_error(void) { return g_last_error.c_str(); }

const char* cyp_status_name(cyp_status status) {
  switch (status) {
    case CYP_OK: return "ok";
    case CYP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CYP_ERR_IO: return "i/o error";
    case CYP_ERR_DEGENERATE_POINT: return "degenerate point";
    case CYP_ERR_INVALID_DEPTH: return "invalid depth";
    case CYP_ERR_BEHIND_CAMERA: return "behind camera";
    case CYP_ERR_NUMERIC: return "numeric error";
    case CYP_ERR_COVERAGE: return "coverage error";
    case CYP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cyp_version(void) { return "0.1.0"; }

void cyp_loss_weights_default(cyp_loss_weights* out) {
  if (!out) return;
  const LossWeights w;
  *out = {w.lambda_s, w.lambda_e, w.lambda_m, w.scales, CYP_SMOOTH_SECOND_ORDER};
}

void cyp_optim_config_default(cyp_optim_config* out) {
  if (!out) return;
  const OptimConfig c;
  *out = {c.max_iters, c.step_size,  c.fd_epsilon,
          c.convergence_tol, c.depth_min, c.depth_max};
}

cyp_status cyp_loss_weights_validate(const cyp_loss_weights* w) {
  return guard([&] { to_weights(&need(w, "loss weights")); });
}

cyp_status cyp_optim_config_validate(const cyp_optim_config* c) {
  return guard([&] { to_config(&need(c, "optimizer config")); });
}

cyp_status cyp_camera_square(int width, int height, cyp_camera* out) {
  return guard([&] {
    need_out(out, "camera");
    *out = from_camera(CylindricalCamera::with_square_pixels(width, height));
  });
}

cyp_status cyp_camera_validate(const cyp_camera* cam) {
  return guard([&] { to_camera(cam); });
}

void cyp_pose_identity(cyp_pose* out) {
  if (out) *out = from_pose(Pose::identity());
}

void cyp_pose_compose(const cyp_pose* a, const cyp_pose* b, cyp_pose* out) {
  if (a && b && out) *out = from_pose(to_pose(*a) * to_pose(*b));
}

void cyp_pose_inverse(const cyp_pose* p, cyp_pose* out) {
  if (p && out) *out = from_pose(to_pose(*p).inverse());
}

void cyp_pose_relative(const cyp_pose* world_from_target,
                       const cyp_pose* world_from_source, cyp_pose* out) {
  if (world_from_target && world_from_source && out) {
    *out = from_pose(
        relative_pose(to_pose(*world_from_target), to_pose(*world_from_source)));
  }
}

cyp_status cyp_image_create(int height, int width, int channels, int cyclic,
                            cyp_image** out) {
  return guard([&] {
    need_out(out, "output image");
    *out = new cyp_image{Panorama(height, width, channels, cyclic != 0)};
  });
}

cyp_status cyp_image_load(const char* path, int cyclic, cyp_image** out) {
  return guard([&] {
    need_out(out, "output image");
    Panorama p = read_image(&need(path, "path"));
    p.set_cyclic(cyclic != 0);
    *out = new cyp_image{std::move(p)};
  });
}

cyp_status cyp_image_save(const cyp_image* img, const char* path) {
  return guard([&] { write_image(&need(path, "path"), need(img, "image").p); });
}

cyp_status cyp_image_clone(const cyp_image* img, cyp_image** out) {
  return guard([&] {
    need_out(out, "output image");
    *out = new cyp_image{need(img, "image").p};
  });
}

void cyp_image_free(cyp_image* img) { delete img; }

void cyp_image_size(const cyp_image* img, int* height, int* width,
                    int* channels) {
  if (!img) return;
  if (height) *height = img->p.height();
  if (width) *width = img->p.width();
  if (channels) *channels = img->p.channels();
}

int cyp_image_cyclic(const cyp_image* img) { return img && img->p.cyclic(); }

void cyp_image_set_cyclic(cyp_image* img, int cyclic) {
  if (img) img->p.set_cyclic(cyclic != 0);
}

double* cyp_image_data(cyp_image* img) {
  return img ? img->p.data().data() : nullptr;
}

cyp_status cyp_image_resize(const cyp_image* img, int height, int width,
                            cyp_image** out) {
  return guard([&] {
    need_out(out, "output image");
    *out = new cyp_image{resize_area(need(img, "image").p, height, width)};
  });
}

cyp_status cyp_image_add_noise(cyp_image* img, double sigma,
                               unsigned long long seed) {
  return guard([&] {
    if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
    add_noise(need_mut(img, "image").p, sigma, seed);
  });
}

cyp_status cyp_image_shift_columns(const cyp_image* img, int shift,
                                   cyp_image** out) {
  return guard([&] {
    need_out(out, "output image");
    *out = new cyp_image{shift_columns(need(img, "image").p, shift)};
  });
}

cyp_status cyp_image_max_abs_diff(const cyp_image* a, const cyp_image* b,
                                  double* out) {
  return guard([&] {
    need_out(out, "output");
    const Panorama& pa = need(a, "image").p;
    const Panorama& pb = need(b, "image").p;
    if (pa.height() != pb.height() || pa.width() != pb.width() ||
        pa.channels() != pb.channels()) {
      throw InvalidArgument("images differ in shape");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < pa.data().size(); ++i) {
      m = std::max(m, std::abs(pa.data()[i] - pb.data()[i]));
    }
    *out = m;
  });
}

cyp_status cyp_depth_create(int height, int width, double fill,
                            cyp_depth** out) {
  return guard([&] {
    need_out(out, "output depth");
    *out = new cyp_depth{DepthMap(
        height, width,
        std::vector<double>(static_cast<std::size_t>(std::max(0, height)) *
                                std::max(0, width),
                            fill))};
  });
}

cyp_status cyp_depth_load(const char* path, cyp_depth** out) {
  return guard([&] {
    need_out(out, "output depth");
    *out = new cyp_depth{read_depth(&need(path, "path"))};
  });
}

cyp_status cyp_depth_save(const cyp_depth* d, const char* path) {
  return guard([&] { write_depth(&need(path, "path"), need(d, "depth").d); });
}

void cyp_depth_free(cyp_depth* d) { delete d; }

void cyp_depth_size(const cyp_depth* d, int* height, int* width) {
  if (!d) return;
  if (height) *height = d->d.height();
  if (width) *width = d->d.width();
}

int cyp_depth_get(const cyp_depth* d, int y, int x, double* value) {
  if (!d || y < 0 || x < 0 || y >= d->d.height() || x >= d->d.width()) {
    if (value) *value = 0.0;
    return 0;
  }
  const bool ok = d->d.valid(y, x);
  if (value) *value = ok ? d->d.depth(y, x) : 0.0;
  return ok ? 1 : 0;
}

cyp_status cyp_depth_set(cyp_depth* d, int y, int x, double value) {
  return guard([&] {
    DepthMap& m = need_mut(d, "depth").d;
    if (y < 0 || x < 0 || y >= m.height() || x >= m.width()) {
      throw InvalidArgument("depth pixel out of range");
    }
    if (std::isfinite(value) && value > 0.0) {
      m.set(y, x, value);
    } else {
      m.invalidate(y, x);
    }
  });
}

cyp_status cyp_depth_resize(const cyp_depth* d, int height, int width,
                            cyp_depth** out) {
  return guard([&] {
    need_out(out, "output depth");
    const DepthMap& m = need(d, "depth").d;
    Panorama img(m.height(), m.width(), 1, false);
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        img.at(y, x) = m.valid(y, x) ? m.depth(y, x) : 0.0;
      }
    }
    const Panorama r = resize_area(img, height, width);
    const auto v = r.data();
    *out = new cyp_depth{DepthMap(height, width, std::vector<double>(v.begin(), v.end()))};
  });
}

size_t cyp_trace_size(const cyp_trace* t) { return t ? t->t.size() : 0; }

cyp_status cyp_trace_row_at(const cyp_trace* t, size_t i, cyp_trace_row* out) {
  return guard([&] {
    need_out(out, "trace row");
    const Trace& tr = need(t, "trace").t;
    if (i >= tr.size()) throw InvalidArgument("trace row out of range");
    const TraceRow& r = tr[i];
    *out = {r.iter, r.pixel, r.smooth, r.explain, r.total, r.step};
  });
}

cyp_status cyp_trace_save_csv(const cyp_trace* t, const char* path) {
  return guard([&] {
    const Trace& tr = need(t, "trace").t;
    std::ofstream out(&need(path, "path"));
    if (!out) throw IoError(std::string("cannot open '") + path + "' for writing");
    write_trace_csv(out, tr);
    if (!out) throw IoError(std::string("failed writing '") + path + "'");
  });
}

void cyp_trace_free(cyp_trace* t) { delete t; }

cyp_status cyp_warp(const cyp_image* source, const cyp_depth* depth,
                    const cyp_pose* pose, const cyp_camera* cam,
                    cyp_boundary boundary, cyp_image** out_image,
                    cyp_image** out_valid) {
  return guard([&] {
    need_out(out_image, "output image");
    const CylindricalCamera c = to_camera(cam);
    const auto b = to_boundary(boundary);
    const Panorama& src = need(source, "source").p;
    const DepthMap& d = need(depth, "depth").d;
    const Pose p = to_pose(need(pose, "pose"));
    WarpResult r = b ? inverse_warp(src, d, p, c, *b) : inverse_warp(src, d, p, c);
    auto* img = new cyp_image{std::move(r.image)};
    if (out_valid) *out_valid = new cyp_image{mask_image(r.valid)};
    *out_image = img;
  });
}

cyp_status cyp_total_loss(const cyp_image* target,
                          const cyp_image* const* sources, size_t num_sources,
                          const cyp_depth* depth, const cyp_pose* poses,
                          const cyp_camera* cam,
                          const cyp_loss_weights* weights,
                          const cyp_image* const* masks, cyp_boundary boundary,
                          cyp_loss_breakdown* out) {
  return guard([&] {
    need_out(out, "loss breakdown");
    const LossProblem problem(need(target, "target").p,
                              to_images(sources, num_sources, "source"),
                              to_camera(cam), to_weights(weights),
                              to_masks(masks, num_sources), to_boundary(boundary));
    const auto p = to_poses(poses, num_sources);
    fill_breakdown(problem.evaluate(need(depth, "depth").d, p), out);
  });
}

cyp_status cyp_optimize_pose(const cyp_image* target, const cyp_image* source,
                             const cyp_depth* depth, const cyp_pose* init,
                             const cyp_camera* cam,
                             const cyp_loss_weights* weights,
                             const cyp_optim_config* cfg, cyp_boundary boundary,
                             cyp_pose* out_pose, cyp_loss_breakdown* out_loss,
                             cyp_trace** out_trace) {
  return guard([&] {
    need_out(out_pose, "output pose");
    const LossProblem problem(need(target, "target").p,
                              {need(source, "source").p}, to_camera(cam),
                              to_weights(weights), {}, to_boundary(boundary));
    PoseResult r = optimize_pose(problem, need(depth, "depth").d,
                                 to_pose(need(init, "initial pose")),
                                 to_config(cfg));
    *out_pose = from_pose(r.pose);
    fill_breakdown(r.loss, out_loss);
    give_trace(std::move(r.trace), out_trace);
  });
}

cyp_status cyp_optimize_depth(const cyp_image* target,
                              const cyp_image* const* sources,
                              size_t num_sources, const cyp_pose* poses,
                              const cyp_depth* init, const cyp_camera* cam,
                              const cyp_loss_weights* weights,
                              const cyp_optim_config* cfg,
                              cyp_boundary boundary, cyp_depth** out_depth,
                              cyp_loss_breakdown* out_loss,
                              cyp_trace** out_trace) {
  return guard([&] {
    need_out(out_depth, "output depth");
    const LossProblem problem(need(target, "target").p,
                              to_images(sources, num_sources, "source"),
                              to_camera(cam), to_weights(weights), {},
                              to_boundary(boundary));
    const auto p = to_poses(poses, num_sources);
    DepthResult r = optimize_depth(problem, need(init, "initial depth").d, p,
                                   to_config(cfg));
    fill_breakdown(r.loss, out_loss);
    give_trace(std::move(r.trace), out_trace);
    *out_depth = new cyp_depth{std::move(r.depth)};
  });
}

cyp_status cyp_optimize_alternate(
    const cyp_image* target, const cyp_image* const* sources,
    size_t num_sources, const cyp_pose* init_poses, const cyp_depth* init,
    const cyp_camera* cam, const cyp_loss_weights* weights,
    const cyp_optim_config* cfg, cyp_boundary boundary, int rounds,
    cyp_depth** out_depth, cyp_pose* out_poses, cyp_loss_breakdown* out_loss,
    cyp_trace** out_trace) {
  return guard([&] {
    need_out(out_depth, "output depth");
    need_out(out_poses, "output poses");
    const LossProblem problem(need(target, "target").p,
                              to_images(sources, num_sources, "source"),
                              to_camera(cam), to_weights(weights), {},
                              to_boundary(boundary));
    const auto p = to_poses(init_poses, num_sources);
    AlternateResult r = optimize_alternate(problem, need(init, "initial depth").d,
                                           p, to_config(cfg), rounds);
    for (std::size_t i = 0; i < r.poses.size(); ++i) out_poses[i] = from_pose(r.poses[i]);
    fill_breakdown(r.loss, out_loss);
    give_trace(std::move(r.trace), out_trace);
    *out_depth = new cyp_depth{std::move(r.depth)};
  });
}

cyp_status cyp_gradcheck_quadratic(double epsilon, double* rel_error) {
  return guard([&] {
    need_out(rel_error, "output");
    const int n = 5;
    const Objective f = [](std::span<const double> p) {
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        s += (i + 1.0) * (p[i] - double(i)) * (p[i] - double(i));
      }
      return s;
    };
    const std::vector<double> p(n, 0.0);
    const auto g = numeric_gradient(f, p, epsilon);
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < n; ++i) {
      const double exact = -2.0 * (i + 1.0) * i;
      num += (g[i] - exact) * (g[i] - exact);
      den += exact * exact;
    }
    *rel_error = std::sqrt(num / den);
  });
}

cyp_status cyp_gradcheck_pose(const cyp_image* target, const cyp_image* source,
                              const cyp_depth* depth, const cyp_pose* pose,
                              const cyp_camera* cam,
                              const cyp_loss_weights* weights, double epsilon,
                              double* rel_diff, double* raw_rel_diff) {
  return guard([&] {
    need_out(rel_diff, "output");
    const LossProblem problem(need(target, "target").p,
                              {need(source, "source").p}, to_camera(cam),
                              to_weights(weights));
    const DepthMap& d = need(depth, "depth").d;
    const Pose at = to_pose(need(pose, "pose"));
    const std::span<const Pose> poses(&at, 1);
    *rel_diff = relative_difference(pose_gradient(problem, d, poses, 0, epsilon),
                                    pose_gradient(problem, d, poses, 0, epsilon / 10));
    if (raw_rel_diff) {
      const Objective f = [&](std::span<const double> q) {
        const Pose p = Pose::from_vector({q[0], q[1], q[2], q[3], q[4], q[5]});
        return problem.evaluate(d, std::span(&p, 1)).total;
      };
      const std::vector<double> p(pose->v, pose->v + 6);
      *raw_rel_diff = relative_difference(numeric_gradient(f, p, epsilon),
                                          numeric_gradient(f, p, epsilon / 10));
    }
  });
}

cyp_status cyp_seam_profile(const cyp_image* target, const cyp_image* source,
                            const cyp_depth* depth, const cyp_pose* pose,
                            const cyp_camera* cam, double* wrap,
                            double* no_wrap) {
  return guard([&] {
    need_out(wrap, "wrap profile");
    need_out(no_wrap, "no-wrap profile");
    const CylindricalCamera c = to_camera(cam);
    const Panorama& tgt = need(target, "target").p;
    const Panorama& src = need(source, "source").p;
    if (!c.cyclic() || !tgt.cyclic() || !src.cyclic()) {
      throw InvalidArgument("seam profile needs full cyclic panoramas");
    }
    check_size(tgt, c, "target");
    check_size(src, c, "source");
    if (tgt.channels() != src.channels()) {
      throw InvalidArgument("target and source channel counts differ");
    }
    const DepthMap& d = need(depth, "depth").d;
    const Pose p = to_pose(need(pose, "pose"));
    const HorizontalBoundary modes[2] = {HorizontalBoundary::kWrap,
                                         HorizontalBoundary::kClamp};
    double* outs[2] = {wrap, no_wrap};
    for (int m = 0; m < 2; ++m) {
      const WarpResult r = inverse_warp(src, d, p, c, modes[m]);
      for (int x = 0; x < c.width(); ++x) {
        double sum = 0.0;
        int n = 0;
        for (int y = 0; y < c.height(); ++y) {
          if (!r.valid(y, x)) continue;
          double e = 0.0;
          for (int ch = 0; ch < tgt.channels(); ++ch) {
            e += std::abs(tgt.at(y, x, ch) - r.image.at(y, x, ch));
          }
          sum += e / tgt.channels();
          ++n;
        }
        outs[m][x] = n ? sum / n : std::numeric_limits<double>::quiet_NaN();
      }
    }
  });
}

cyp_status cyp_eval_depth(const cyp_depth* pred, const cyp_depth* gt,
                          int median_scale, double cap,
                          cyp_depth_metrics* out) {
  return guard([&] {
    need_out(out, "metrics");
    if (!(cap > 0.0)) throw InvalidArgument("depth cap must be > 0");
    const DepthMetrics m = depth_metrics(need(pred, "prediction").d,
                                         need(gt, "ground truth").d,
                                         {median_scale != 0, cap});
    *out = {m.abs_rel, m.sq_rel, m.rmse, m.rmse_log,
            m.delta1,  m.delta2, m.delta3, m.count};
  });
}

cyp_status cyp_ate(const cyp_pose* pred, const cyp_pose* gt, size_t n,
                   int snippet, double* mean, double* std_dev,
                   double* windows) {
  return guard([&] {
    const AteResult r = ate(to_poses(pred, n), to_poses(gt, n), snippet);
    if (mean) *mean = r.mean;
    if (std_dev) *std_dev = r.std_dev;
    if (windows) std::copy(r.windows.begin(), r.windows.end(), windows);
  });
}

cyp_status cyp_trajectory_load(const char* path, int* ids, cyp_pose* poses,
                               size_t capacity, size_t* count) {
  return guard([&] {
    need_out(count, "count");
    const auto recs = read_trajectory(&need(path, "path"));
    *count = recs.size();
    if (capacity == 0) return;
    if (capacity < recs.size()) throw InvalidArgument("output buffer too small");
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (ids) ids[i] = recs[i].frame_id;
      if (poses) poses[i] = from_pose(recs[i].pose);
    }
  });
}

cyp_status cyp_trajectory_save(const char* path, const int* ids,
                               const cyp_pose* poses, size_t n) {
  return guard([&] {
    const auto p = to_poses(poses, n);
    std::vector<TrajectoryRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
      recs.push_back({ids ? ids[i] : static_cast<int>(i), p[i]});
    }
    write_trajectory(&need(path, "path"), recs);
  });
}

cyp_status cyp_stitch(const cyp_image* const views[4],
                      const cyp_pinhole* pinhole, const cyp_camera* out_cam,
                      cyp_image** out) {
  return guard([&] {
    need_out(out, "output image");
    if (!views) throw InvalidArgument("views must not be null");
    PinholeRig rig;
    rig.camera = to_pinhole(pinhole);
    for (int k = 0; k < 4; ++k) rig.views[k] = need(views[k], "view").p;
    *out = new cyp_image{stitch_pinhole_to_cylinder(rig, to_camera(out_cam))};
  });
}

cyp_status cyp_equirect_to_cylinder(const cyp_image* equirect,
                                    const cyp_camera* out_cam,
                                    cyp_image** out) {
  return guard([&] {
    need_out(out, "output image");
    *out = new cyp_image{
        equirect_to_cylinder(need(equirect, "equirect image").p, to_camera(out_cam))};
  });
}

cyp_status cyp_crop(const cyp_image* img, const cyp_camera* cam,
                    double fov_deg, double center_azimuth_deg, cyp_image** out,
                    cyp_camera* out_cam, int* first_column) {
  return guard([&] {
    need_out(out, "output image");
    Crop c = crop_fov(need(img, "image").p, to_camera(cam), fov_deg,
                      center_azimuth_deg);
    if (out_cam) *out_cam = from_camera(c.camera);
    if (first_column) *first_column = c.first_column;
    *out = new cyp_image{std::move(c.image)};
  });
}

cyp_status cyp_crop_depth(const cyp_depth* d, int first_column, int count,
                          cyp_depth** out) {
  return guard([&] {
    need_out(out, "output depth");
    const DepthMap& m = need(d, "depth").d;
    if (count < 1 || count > m.width()) throw InvalidArgument("bad crop width");
    Crop c{Panorama(m.height(), count, 1, false),
           CylindricalCamera::with_square_pixels(m.width(), m.height()),
           ((first_column % m.width()) + m.width()) % m.width()};
    *out = new cyp_depth{crop_depth(m, c)};
  });
}

cyp_status cyp_detect_static(const cyp_pose* poses, size_t n,
                             double translation, double rotation, int* out,
                             size_t capacity, size_t* count) {
  return guard([&] {
    if (!(translation >= 0.0) || !(rotation >= 0.0)) {
      throw InvalidArgument("static thresholds must be >= 0");
    }
    const auto p = to_poses(poses, n);
    copy_out(detect_static_frames(p, {translation, rotation}), out, capacity, count);
  });
}

cyp_status cyp_make_sequences(const int* ids, size_t n, int seq_len,
                              int stride, int* frame_ids, size_t capacity,
                              size_t* count, int* too_few) {
  return guard([&] {
    need_out(count, "count");
    if (n > 0 && !ids) throw InvalidArgument("frame ids must not be null");
    const SequencePlan plan =
        make_sequences(std::span<const int>(ids, n), seq_len, stride);
    if (too_few) *too_few = plan.too_few_frames ? 1 : 0;
    *count = plan.windows.size();
    if (capacity == 0) return;
    if (capacity < plan.windows.size()) throw InvalidArgument("output buffer too small");
    need_out(frame_ids, "output buffer");
    for (std::size_t w = 0; w < plan.windows.size(); ++w) {
      std::copy(plan.windows[w].frame_ids.begin(), plan.windows[w].frame_ids.end(),
                frame_ids + w * seq_len);
    }
  });
}

cyp_status cyp_synth_render(cyp_scene scene, unsigned long long seed,
                            const cyp_pose* world_from_camera,
                            const cyp_camera* cam, cyp_image** image,
                            cyp_depth** depth) {
  return guard([&] {
    const auto s = scene_of(scene, seed);
    RenderedView v = render_cylindrical(
        *s, to_pose(need(world_from_camera, "pose")), to_camera(cam));
    if (image) *image = new cyp_image{std::move(v.image)};
    if (depth) *depth = new cyp_depth{std::move(v.depth)};
  });
}

cyp_status cyp_synth_render_pinhole(cyp_scene scene, unsigned long long seed,
                                    const cyp_pose* world_from_camera,
                                    const cyp_pinhole* cam, cyp_image** image) {
  return guard([&] {
    need_out(image, "output image");
    const auto s = scene_of(scene, seed);
    *image = new cyp_image{render_pinhole(
        *s, to_pose(need(world_from_camera, "pose")), to_pinhole(cam))};
  });
}

cyp_status cyp_synth_render_equirect(cyp_scene scene, unsigned long long seed,
                                     const cyp_pose* world_from_camera,
                                     int height, int width, cyp_image** image) {
  return guard([&] {
    need_out(image, "output image");
    if (height < 1 || width < 1) throw InvalidArgument("bad equirect size");
    const auto s = scene_of(scene, seed);
    *image = new cyp_image{render_equirect(
        *s, to_pose(need(world_from_camera, "pose")), height, width)};
  });
}

}  // extern "C"
