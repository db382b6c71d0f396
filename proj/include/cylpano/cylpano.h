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


/* C interface to the cylindrical panorama library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a cyp_status; on failure a description is
 * available from cyp_last_error() on the same thread until the next call.
 *
 * Poses are 6-vectors (tx, ty, tz, rx, ry, rz); rotation is
 * R = Rx(rx) * Ry(ry) * Rz(rz) and a pose maps p to R p + t. Warping and
 * loss functions take the target-to-source pose. */

#ifndef CYLPANO_CYLPANO_H_
#define CYLPANO_CYLPANO_H_

#include <stddef.h>

#if defined(_WIN32)
#define CYP_API __declspec(dllexport)
#else
#define CYP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CYP_OK = 0,
  CYP_ERR_INVALID_ARGUMENT = 1,
  CYP_ERR_IO = 2,
  CYP_ERR_DEGENERATE_POINT = 3,
  CYP_ERR_INVALID_DEPTH = 4,
  CYP_ERR_BEHIND_CAMERA = 5,
  CYP_ERR_NUMERIC = 6,
  CYP_ERR_COVERAGE = 7,
  CYP_ERR_INTERNAL = 8
} cyp_status;

CYP_API const char* cyp_last_error(void);
CYP_API const char* cyp_status_name(cyp_status status);
CYP_API const char* cyp_version(void);

typedef struct cyp_image cyp_image;
typedef struct cyp_depth cyp_depth;
typedef struct cyp_trace cyp_trace;

/* ---- plain data ---- */

typedef struct {
  int width;
  int height;
  double h_min;
  double h_max;
  double fov;            /* radians; 2*pi for a full panorama */
  double center_azimuth; /* radians */
} cyp_camera;

typedef struct {
  double v[6];
} cyp_pose;

typedef struct {
  double fx, fy, cx, cy;
  int width, height;
} cyp_pinhole;

typedef enum {
  CYP_SMOOTH_SECOND_ORDER = 0,
  CYP_SMOOTH_IMAGE_AWARE = 1
} cyp_smooth_kind;

typedef enum {
  CYP_BOUNDARY_DEFAULT = 0, /* wrap for cyclic cameras, invalid otherwise */
  CYP_BOUNDARY_WRAP = 1,
  CYP_BOUNDARY_CLAMP = 2,
  CYP_BOUNDARY_INVALID = 3
} cyp_boundary;

typedef struct {
  double lambda_s;
  double lambda_e;
  double lambda_m;
  int scales;
  cyp_smooth_kind smooth;
} cyp_loss_weights;

typedef struct {
  int max_iters;
  double step_size;
  double fd_epsilon;
  double convergence_tol;
  double depth_min;
  double depth_max;
} cyp_optim_config;

#define CYP_MAX_SCALES 16

typedef struct {
  double pixel, smooth, explain, total;
} cyp_loss_terms;

typedef struct {
  cyp_loss_terms total;
  int num_scales;
  cyp_loss_terms per_scale[CYP_MAX_SCALES];
  int no_valid_pixels; /* some (scale, source) pair had no valid pixel */
} cyp_loss_breakdown;

typedef struct {
  int iter;
  double pixel, smooth, explain, total, step;
} cyp_trace_row;

typedef struct {
  double abs_rel, sq_rel, rmse, rmse_log, delta1, delta2, delta3;
  size_t count;
} cyp_depth_metrics;

CYP_API void cyp_loss_weights_default(cyp_loss_weights* out);
CYP_API void cyp_optim_config_default(cyp_optim_config* out);
CYP_API cyp_status cyp_loss_weights_validate(const cyp_loss_weights* w);
CYP_API cyp_status cyp_optim_config_validate(const cyp_optim_config* c);

/* Full panorama with square pixels: h_max = -h_min = pi * height / width. */
CYP_API cyp_status cyp_camera_square(int width, int height, cyp_camera* out);
CYP_API cyp_status cyp_camera_validate(const cyp_camera* cam);

/* ---- poses ---- */

CYP_API void cyp_pose_identity(cyp_pose* out);
CYP_API void cyp_pose_compose(const cyp_pose* a, const cyp_pose* b,
                              cyp_pose* out); /* a * b */
CYP_API void cyp_pose_inverse(const cyp_pose* p, cyp_pose* out);
/* Target-to-source pose from two camera-to-world poses. */
CYP_API void cyp_pose_relative(const cyp_pose* world_from_target,
                               const cyp_pose* world_from_source,
                               cyp_pose* out);

/* ---- images ---- */

CYP_API cyp_status cyp_image_create(int height, int width, int channels,
                                    int cyclic, cyp_image** out);
/* PNM (P5/P6) or PFM, chosen by the file's magic number. */
CYP_API cyp_status cyp_image_load(const char* path, int cyclic,
                                  cyp_image** out);
/* .pfm writes floats; anything else 8-bit PNM. */
CYP_API cyp_status cyp_image_save(const cyp_image* img, const char* path);
CYP_API cyp_status cyp_image_clone(const cyp_image* img, cyp_image** out);
CYP_API void cyp_image_free(cyp_image* img);
CYP_API void cyp_image_size(const cyp_image* img, int* height, int* width,
                            int* channels);
CYP_API int cyp_image_cyclic(const cyp_image* img);
CYP_API void cyp_image_set_cyclic(cyp_image* img, int cyclic);
/* Row-major, channels interleaved; valid until the image is freed. */
CYP_API double* cyp_image_data(cyp_image* img);
CYP_API cyp_status cyp_image_resize(const cyp_image* img, int height,
                                    int width, cyp_image** out);
CYP_API cyp_status cyp_image_add_noise(cyp_image* img, double sigma,
                                       unsigned long long seed);
/* Column k of the result is column k - shift of the input (cyclic). */
CYP_API cyp_status cyp_image_shift_columns(const cyp_image* img, int shift,
                                           cyp_image** out);
CYP_API cyp_status cyp_image_max_abs_diff(const cyp_image* a,
                                          const cyp_image* b, double* out);

/* ---- depth maps ---- */

CYP_API cyp_status cyp_depth_create(int height, int width, double fill,
                                    cyp_depth** out);
/* Single-channel PFM; non-positive values are invalid pixels. */
CYP_API cyp_status cyp_depth_load(const char* path, cyp_depth** out);
CYP_API cyp_status cyp_depth_save(const cyp_depth* d, const char* path);
CYP_API void cyp_depth_free(cyp_depth* d);
CYP_API void cyp_depth_size(const cyp_depth* d, int* height, int* width);
/* Writes the depth (0 when invalid) and returns 1 for a valid pixel. */
CYP_API int cyp_depth_get(const cyp_depth* d, int y, int x, double* value);
/* A non-positive or non-finite value invalidates the pixel. */
CYP_API cyp_status cyp_depth_set(cyp_depth* d, int y, int x, double value);
CYP_API cyp_status cyp_depth_resize(const cyp_depth* d, int height, int width,
                                    cyp_depth** out);

/* ---- traces ---- */

CYP_API size_t cyp_trace_size(const cyp_trace* t);
CYP_API cyp_status cyp_trace_row_at(const cyp_trace* t, size_t i,
                                    cyp_trace_row* out);
CYP_API cyp_status cyp_trace_save_csv(const cyp_trace* t, const char* path);
CYP_API void cyp_trace_free(cyp_trace* t);

/* ---- view synthesis and loss ---- */

/* Synthesizes the target view from `source`. `out_valid` (optional) is a
 * one-channel 0/1 image. */
CYP_API cyp_status cyp_warp(const cyp_image* source, const cyp_depth* depth,
                            const cyp_pose* pose, const cyp_camera* cam,
                            cyp_boundary boundary, cyp_image** out_image,
                            cyp_image** out_valid);

/* `masks` may be NULL; otherwise one single-channel explainability image per
 * source with values in [0, 1]. */
CYP_API cyp_status cyp_total_loss(const cyp_image* target,
                                  const cyp_image* const* sources,
                                  size_t num_sources, const cyp_depth* depth,
                                  const cyp_pose* poses, const cyp_camera* cam,
                                  const cyp_loss_weights* weights,
                                  const cyp_image* const* masks,
                                  cyp_boundary boundary,
                                  cyp_loss_breakdown* out);

/* ---- optimization ---- */

CYP_API cyp_status cyp_optimize_pose(
    const cyp_image* target, const cyp_image* source, const cyp_depth* depth,
    const cyp_pose* init, const cyp_camera* cam,
    const cyp_loss_weights* weights, const cyp_optim_config* cfg,
    cyp_boundary boundary, cyp_pose* out_pose, cyp_loss_breakdown* out_loss,
    cyp_trace** out_trace);

CYP_API cyp_status cyp_optimize_depth(
    const cyp_image* target, const cyp_image* const* sources,
    size_t num_sources, const cyp_pose* poses, const cyp_depth* init,
    const cyp_camera* cam, const cyp_loss_weights* weights,
    const cyp_optim_config* cfg, cyp_boundary boundary, cyp_depth** out_depth,
    cyp_loss_breakdown* out_loss, cyp_trace** out_trace);

/* `out_poses` receives num_sources refined poses. */
CYP_API cyp_status cyp_optimize_alternate(
    const cyp_image* target, const cyp_image* const* sources,
    size_t num_sources, const cyp_pose* init_poses, const cyp_depth* init,
    const cyp_camera* cam, const cyp_loss_weights* weights,
    const cyp_optim_config* cfg, cyp_boundary boundary, int rounds,
    cyp_depth** out_depth, cyp_pose* out_poses, cyp_loss_breakdown* out_loss,
    cyp_trace** out_trace);

/* Central differences of f(p) = sum_i (i + 1) * (p_i - i)^2 at p_i = 0,
 * compared with the exact gradient. */
CYP_API cyp_status cyp_gradcheck_quadratic(double epsilon, double* rel_error);

/* Relative disagreement between central-difference pose gradients of the
 * total loss at epsilon and epsilon / 10, with the valid-pixel set held at
 * its value at `pose` (the gradient the optimizer uses). `raw_rel_diff`
 * (optional) receives the same figure for the loss differenced as is. */
CYP_API cyp_status cyp_gradcheck_pose(const cyp_image* target,
                                      const cyp_image* source,
                                      const cyp_depth* depth,
                                      const cyp_pose* pose,
                                      const cyp_camera* cam,
                                      const cyp_loss_weights* weights,
                                      double epsilon, double* rel_diff,
                                      double* raw_rel_diff);

/* Per-column mean photometric error of the synthesized target, with wrap
 * sampling and with clamped sampling. Both arrays hold cam->width values;
 * columns without a valid pixel get NaN. Requires a cyclic camera. */
CYP_API cyp_status cyp_seam_profile(const cyp_image* target,
                                    const cyp_image* source,
                                    const cyp_depth* depth,
                                    const cyp_pose* pose,
                                    const cyp_camera* cam, double* wrap,
                                    double* no_wrap);

/* ---- metrics ---- */

CYP_API cyp_status cyp_eval_depth(const cyp_depth* pred, const cyp_depth* gt,
                                  int median_scale, double cap,
                                  cyp_depth_metrics* out);

/* `windows` (optional) receives n - snippet + 1 per-window errors. */
CYP_API cyp_status cyp_ate(const cyp_pose* pred, const cyp_pose* gt, size_t n,
                           int snippet, double* mean, double* std_dev,
                           double* windows);

/* ---- trajectories ---- */

/* Two-call pattern: pass capacity 0 to learn the count. */
CYP_API cyp_status cyp_trajectory_load(const char* path, int* ids,
                                       cyp_pose* poses, size_t capacity,
                                       size_t* count);
CYP_API cyp_status cyp_trajectory_save(const char* path, const int* ids,
                                       const cyp_pose* poses, size_t n);

/* ---- data preparation ---- */

/* views[k] looks along azimuth k * 90 degrees. */
CYP_API cyp_status cyp_stitch(const cyp_image* const views[4],
                              const cyp_pinhole* pinhole,
                              const cyp_camera* out_cam, cyp_image** out);
CYP_API cyp_status cyp_equirect_to_cylinder(const cyp_image* equirect,
                                            const cyp_camera* out_cam,
                                            cyp_image** out);
/* Non-cyclic crop of round(fov / 360 * W) columns. */
CYP_API cyp_status cyp_crop(const cyp_image* img, const cyp_camera* cam,
                            double fov_deg, double center_azimuth_deg,
                            cyp_image** out, cyp_camera* out_cam,
                            int* first_column);
CYP_API cyp_status cyp_crop_depth(const cyp_depth* d, int first_column,
                                  int count, cyp_depth** out);
/* Indices of static frames; two-call pattern as for trajectories. */
CYP_API cyp_status cyp_detect_static(const cyp_pose* poses, size_t n,
                                     double translation, double rotation,
                                     int* out, size_t capacity,
                                     size_t* count);
/* Windows of seq_len consecutive frame ids, written row by row into
 * `frame_ids` (capacity counted in windows). `too_few` is set when the
 * input is shorter than one window. */
CYP_API cyp_status cyp_make_sequences(const int* ids, size_t n, int seq_len,
                                      int stride, int* frame_ids,
                                      size_t capacity, size_t* count,
                                      int* too_few);

/* ---- synthetic scenes ---- */

typedef enum { CYP_SCENE_CYLINDER = 0, CYP_SCENE_ROOM = 1 } cyp_scene;

/* Renders a procedural scene from a camera-to-world pose. Either output may
 * be NULL. */
CYP_API cyp_status cyp_synth_render(cyp_scene scene, unsigned long long seed,
                                    const cyp_pose* world_from_camera,
                                    const cyp_camera* cam, cyp_image** image,
                                    cyp_depth** depth);
CYP_API cyp_status cyp_synth_render_pinhole(cyp_scene scene,
                                            unsigned long long seed,
                                            const cyp_pose* world_from_camera,
                                            const cyp_pinhole* cam,
                                            cyp_image** image);
CYP_API cyp_status cyp_synth_render_equirect(cyp_scene scene,
                                             unsigned long long seed,
                                             const cyp_pose* world_from_camera,
                                             int height, int width,
                                             cyp_image** image);

#ifdef __cplusplus
}
#endif

#endif /* CYLPANO_CYLPANO_H_ */
