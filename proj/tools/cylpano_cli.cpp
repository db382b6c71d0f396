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


// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "cylpano/cylpano.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cylpano_cli;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kExitCheckFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CapiError : std::runtime_error {
  CapiError(cyp_status s, const std::string& what)
      : std::runtime_error(what), status(s) {}
  cyp_status status;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(cyp_status s) {
  if (s != CYP_OK) throw CapiError(s, cyp_last_error());
}

struct ImageDeleter {
  void operator()(cyp_image* p) const { cyp_image_free(p); }
};
struct DepthDeleter {
  void operator()(cyp_depth* p) const { cyp_depth_free(p); }
};
struct TraceDeleter {
  void operator()(cyp_trace* p) const { cyp_trace_free(p); }
};
using Image = std::unique_ptr<cyp_image, ImageDeleter>;
using Depth = std::unique_ptr<cyp_depth, DepthDeleter>;
using TracePtr = std::unique_ptr<cyp_trace, TraceDeleter>;

Image load_image(const std::string& path, bool cyclic = true) {
  cyp_image* p = nullptr;
  check(cyp_image_load(path.c_str(), cyclic ? 1 : 0, &p));
  return Image(p);
}

Depth load_depth(const std::string& path) {
  cyp_depth* p = nullptr;
  check(cyp_depth_load(path.c_str(), &p));
  return Depth(p);
}

void save_image(const cyp_image* img, const std::string& path) {
  check(cyp_image_save(img, path.c_str()));
}

struct Size {
  int height = 0, width = 0, channels = 0;
};

Size size_of(const cyp_image* img) {
  Size s;
  cyp_image_size(img, &s.height, &s.width, &s.channels);
  return s;
}

bool cyclic(const cyp_camera& cam) { return cam.fov >= 2.0 * kPi - 1e-12; }

cyp_pose parse_pose(const std::string& text) {
  cyp_pose p{};
  std::stringstream ss(text);
  std::string item;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 6) break;
    try {
      std::size_t used = 0;
      p.v[n] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("pose '" + text + "': '" + item + "' is not a number");
    }
    ++n;
  }
  if (n != 6 || std::getline(ss, item, ',')) {
    throw ConfigError("pose '" + text + "' must have 6 comma-separated values "
                      "tx,ty,tz,rx,ry,rz");
  }
  return p;
}

std::vector<cyp_pose> parse_poses(const std::vector<std::string>& texts,
                                  std::size_t n) {
  if (!texts.empty() && texts.size() != n) {
    throw ConfigError("give one --pose per source (" + std::to_string(n) +
                      " sources, " + std::to_string(texts.size()) + " poses)");
  }
  std::vector<cyp_pose> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (texts.empty()) {
      cyp_pose_identity(&out[i]);
    } else {
      out[i] = parse_pose(texts[i]);
    }
  }
  return out;
}

std::string image_ext(const cyp_image* img, const std::string& like = "") {
  if (fs::path(like).extension() == ".pfm") return ".pfm";
  return size_of(img).channels == 1 ? ".pgm" : ".ppm";
}

fs::path out_dir(const Config& c) {
  if (c.out.empty()) throw ConfigError("no output directory (use --out)");
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw IoFailure("cannot create '" + c.out + "': " + ec.message());
  return fs::path(c.out);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_loss(const cyp_loss_breakdown& b) {
  std::cout << "pixel: " << num(b.total.pixel) << "\n"
            << "smooth: " << num(b.total.smooth) << "\n"
            << "explain: " << num(b.total.explain) << "\n"
            << "total: " << num(b.total.total) << "\n";
  for (int s = 0; s < b.num_scales; ++s) {
    const cyp_loss_terms& t = b.per_scale[s];
    std::cout << "scale " << s << ": pixel=" << num(t.pixel)
              << " smooth=" << num(t.smooth) << " explain=" << num(t.explain)
              << " total=" << num(t.total) << "\n";
  }
  if (b.no_valid_pixels) std::cout << "warning: a source had no valid pixel\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoFailure("failed writing '" + path.string() + "'");
}

cyp_boundary boundary_of(const Config& c) {
  return c.wrap ? CYP_BOUNDARY_DEFAULT : CYP_BOUNDARY_CLAMP;
}

// Loads target and sources with the camera resolved from the target size.
struct Inputs {
  cyp_camera cam{};
  Image target;
  std::vector<Image> sources;
  std::vector<const cyp_image*> source_ptrs;
};

Inputs load_inputs(const Config& c, const std::string& target,
                   const std::vector<std::string>& sources) {
  Inputs in;
  in.target = load_image(target);
  const Size s = size_of(in.target.get());
  in.cam = resolve_camera(c, s.width, s.height);
  cyp_image_set_cyclic(in.target.get(), cyclic(in.cam));
  for (const std::string& p : sources) {
    in.sources.push_back(load_image(p, cyclic(in.cam)));
    in.source_ptrs.push_back(in.sources.back().get());
  }
  return in;
}

Depth constant_depth(const cyp_camera& cam, double d) {
  cyp_depth* p = nullptr;
  check(cyp_depth_create(cam.height, cam.width, d, &p));
  return Depth(p);
}

std::vector<int> source_ids(std::size_t n) {
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
  return ids;
}

struct TrajectoryData {
  std::vector<int> ids;
  std::vector<cyp_pose> poses;
};

TrajectoryData load_trajectory(const std::string& path) {
  std::size_t n = 0;
  check(cyp_trajectory_load(path.c_str(), nullptr, nullptr, 0, &n));
  TrajectoryData t{std::vector<int>(n), std::vector<cyp_pose>(n)};
  if (n > 0) check(cyp_trajectory_load(path.c_str(), t.ids.data(), t.poses.data(), n, &n));
  return t;
}

json camera_json(const cyp_camera& cam) {
  CameraSpec s;
  s.width = cam.width;
  s.height = cam.height;
  s.h_min = cam.h_min;
  s.h_max = cam.h_max;
  s.fov_deg = cyclic(cam) ? 360.0 : cam.fov * 180.0 / kPi;
  s.center_deg = cam.center_azimuth * 180.0 / kPi;
  return camera_to_json(s);
}

json pose_json(const cyp_pose& p) {
  return json::array({p.v[0], p.v[1], p.v[2], p.v[3], p.v[4], p.v[5]});
}

// ---------------------------------------------------------------- commands

struct Args {
  std::string source, target, depth, pred, gt, input, frames, trajectory,
      depth_dir, pinhole, mode, scene = "room", start, step;
  std::vector<std::string> sources, poses, masks, views, inputs;
  std::optional<double> center;
  int count = 1;
  int width = 0;
  int height = 0;
  double noise = 0.0;
};

int cmd_warp(const Config& c, const Args& a) {
  Image src = load_image(a.source);
  const Size s = size_of(src.get());
  const cyp_camera cam = resolve_camera(c, s.width, s.height);
  cyp_image_set_cyclic(src.get(), cyclic(cam));
  Depth depth = load_depth(a.depth);
  const cyp_pose pose = parse_poses(a.poses, 1)[0];
  cyp_image* out = nullptr;
  cyp_image* valid = nullptr;
  check(cyp_warp(src.get(), depth.get(), &pose, &cam, boundary_of(c), &out, &valid));
  Image o(out), v(valid);
  const fs::path dir = out_dir(c);
  save_image(o.get(), (dir / ("warped" + image_ext(o.get(), a.source))).string());
  save_image(v.get(), (dir / "valid.pfm").string());
  return 0;
}

int cmd_loss(const Config& c, const Args& a) {
  Inputs in = load_inputs(c, a.target, a.sources);
  Depth depth = load_depth(a.depth);
  const auto poses = parse_poses(a.poses, in.sources.size());
  std::vector<Image> masks;
  std::vector<const cyp_image*> mask_ptrs;
  if (!a.masks.empty()) {
    if (a.masks.size() != in.sources.size()) {
      throw ConfigError("give one --mask per source");
    }
    for (const std::string& m : a.masks) {
      masks.push_back(load_image(m, cyclic(in.cam)));
      mask_ptrs.push_back(masks.back().get());
    }
  }
  cyp_loss_breakdown b{};
  check(cyp_total_loss(in.target.get(), in.source_ptrs.data(), in.sources.size(),
                       depth.get(), poses.data(), &in.cam, &c.loss,
                       mask_ptrs.empty() ? nullptr : mask_ptrs.data(),
                       boundary_of(c), &b));
  print_loss(b);
  return 0;
}

int cmd_optimize(const Config& c, const Args& a) {
  Inputs in = load_inputs(c, a.target, a.sources);
  if (in.sources.empty()) throw ConfigError("optimize needs at least one --source");
  auto poses = parse_poses(a.poses, in.sources.size());
  const fs::path dir = out_dir(c);
  cyp_loss_breakdown b{};

  if (a.mode == "pose") {
    if (a.depth.empty()) throw ConfigError("pose optimization needs --depth");
    Depth depth = load_depth(a.depth);
    for (std::size_t k = 0; k < in.sources.size(); ++k) {
      cyp_trace* t = nullptr;
      cyp_pose out{};
      check(cyp_optimize_pose(in.target.get(), in.sources[k].get(), depth.get(),
                              &poses[k], &in.cam, &c.loss, &c.optim, boundary_of(c),
                              &out, &b, &t));
      TracePtr trace(t);
      poses[k] = out;
      const std::string name = in.sources.size() == 1
                                   ? "trace.csv"
                                   : "trace_" + std::to_string(k) + ".csv";
      check(cyp_trace_save_csv(trace.get(), (dir / name).string().c_str()));
      std::cout << "source " << k << ":\n";
      print_loss(b);
    }
  } else {
    Depth init = a.depth.empty() ? constant_depth(in.cam, c.init_depth)
                                 : load_depth(a.depth);
    cyp_depth* out = nullptr;
    cyp_trace* t = nullptr;
    if (a.mode == "depth") {
      check(cyp_optimize_depth(in.target.get(), in.source_ptrs.data(),
                               in.sources.size(), poses.data(), init.get(), &in.cam,
                               &c.loss, &c.optim, boundary_of(c), &out, &b, &t));
    } else {
      std::vector<cyp_pose> refined(poses.size());
      check(cyp_optimize_alternate(in.target.get(), in.source_ptrs.data(),
                                   in.sources.size(), poses.data(), init.get(),
                                   &in.cam, &c.loss, &c.optim, boundary_of(c),
                                   c.rounds, &out, refined.data(), &b, &t));
      poses = refined;
    }
    Depth result(out);
    TracePtr trace(t);
    check(cyp_depth_save(result.get(), (dir / "depth.pfm").string().c_str()));
    check(cyp_trace_save_csv(trace.get(), (dir / "trace.csv").string().c_str()));
    print_loss(b);
  }
  const auto ids = source_ids(poses.size());
  check(cyp_trajectory_save((dir / "poses.txt").string().c_str(), ids.data(),
                            poses.data(), poses.size()));
  return 0;
}

int cmd_eval_depth(const Config& c, const Args& a) {
  Depth pred = load_depth(a.pred);
  Depth gt = load_depth(a.gt);
  cyp_depth_metrics m{};
  check(cyp_eval_depth(pred.get(), gt.get(), c.median_scale, c.cap, &m));
  std::cout << "abs_rel,sq_rel,rmse,rmse_log,delta1,delta2,delta3,count\n"
            << num(m.abs_rel) << "," << num(m.sq_rel) << "," << num(m.rmse) << ","
            << num(m.rmse_log) << "," << num(m.delta1) << "," << num(m.delta2)
            << "," << num(m.delta3) << "," << m.count << "\n";
  return 0;
}

int cmd_eval_pose(const Config& c, const Args& a) {
  const TrajectoryData pred = load_trajectory(a.pred);
  const TrajectoryData gt = load_trajectory(a.gt);
  if (pred.ids != gt.ids) {
    throw ConfigError("predicted and ground-truth trajectories list different frames");
  }
  const std::size_t n = pred.poses.size();
  if (n < static_cast<std::size_t>(c.snippet)) {
    throw ConfigError("trajectory has fewer frames than the snippet length");
  }
  std::vector<double> windows(n - c.snippet + 1);
  double mean = 0.0, sd = 0.0;
  check(cyp_ate(pred.poses.data(), gt.poses.data(), n, c.snippet, &mean, &sd,
                windows.data()));
  std::cout << "snippet,windows,ate_mean,ate_std\n"
            << c.snippet << "," << windows.size() << "," << num(mean) << ","
            << num(sd) << "\n";
  return 0;
}

int cmd_stitch(const Config& c, const Args& a) {
  if (a.views.size() != 4) throw ConfigError("stitch needs exactly 4 --view images");
  std::vector<Image> views;
  const cyp_image* ptrs[4];
  for (int k = 0; k < 4; ++k) {
    views.push_back(load_image(a.views[k], false));
    ptrs[k] = views.back().get();
  }
  const Size vs = size_of(ptrs[0]);
  cyp_pinhole pin{};
  {
    std::stringstream ss(a.pinhole);
    std::string item;
    std::vector<double> v;
    while (std::getline(ss, item, ',')) {
      try {
        v.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("--pinhole: '" + item + "' is not a number");
      }
    }
    if (v.size() != 4) throw ConfigError("--pinhole needs fx,fy,cx,cy");
    pin = {v[0], v[1], v[2], v[3], vs.width, vs.height};
  }
  cyp_camera cam{};
  if (c.camera) {
    cam = to_camera(*c.camera);
  } else {
    // Keep the panorama inside the views' vertical coverage at the sector
    // boundaries (45 degrees off axis).
    const double h_max = 0.7 * std::min(pin.cy, vs.height - 1 - pin.cy) / pin.fy;
    const int w = 4 * vs.width;
    const int h = std::max(1, static_cast<int>(std::floor(h_max * w / kPi)));
    check(cyp_camera_square(w, h, &cam));
  }
  cyp_image* out = nullptr;
  check(cyp_stitch(ptrs, &pin, &cam, &out));
  Image pano(out);
  const fs::path dir = out_dir(c);
  save_image(pano.get(), (dir / ("panorama" + image_ext(pano.get(), a.views[0]))).string());
  write_text(dir / "camera.json", camera_json(cam).dump(2) + "\n");
  return 0;
}

int cmd_reproject(const Config& c, const Args& a) {
  if (a.inputs.empty()) throw ConfigError("reproject needs at least one --input");
  const fs::path dir = out_dir(c);
  for (const std::string& path : a.inputs) {
    Image eq = load_image(path);
    const Size s = size_of(eq.get());
    cyp_camera cam{};
    if (c.camera) {
      cam = to_camera(*c.camera);
    } else {
      check(cyp_camera_square(s.width, std::max(1, s.height / 2), &cam));
    }
    cyp_image* out = nullptr;
    check(cyp_equirect_to_cylinder(eq.get(), &cam, &out));
    Image cyl(out);
    const fs::path name = fs::path(path).stem().string() + image_ext(cyl.get(), path);
    save_image(cyl.get(), (dir / name).string());
  }
  return 0;
}

int cmd_crop(const Config& c, const Args& a) {
  Image img = load_image(a.input);
  const Size s = size_of(img.get());
  const cyp_camera cam = resolve_camera(c, s.width, s.height);
  cyp_image* out = nullptr;
  cyp_camera out_cam{};
  int first = 0;
  check(cyp_crop(img.get(), &cam, c.fov_deg, a.center.value_or(c.center_deg), &out,
                 &out_cam, &first));
  Image crop(out);
  const fs::path dir = out_dir(c);
  save_image(crop.get(), (dir / ("crop" + image_ext(crop.get(), a.input))).string());
  write_text(dir / "camera.json", camera_json(out_cam).dump(2) + "\n");
  if (!a.depth.empty()) {
    Depth d = load_depth(a.depth);
    cyp_depth* cd = nullptr;
    check(cyp_crop_depth(d.get(), first, out_cam.width, &cd));
    Depth cropped(cd);
    check(cyp_depth_save(cropped.get(), (dir / "depth.pfm").string().c_str()));
  }
  std::cout << "first_column: " << first << "\ncolumns: " << out_cam.width << "\n";
  return 0;
}

// Frame files are named by integer id, e.g. 000012.ppm.
std::map<int, fs::path> list_frames(const fs::path& dir) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoFailure("cannot list '" + dir.string() + "': " + ec.message());
  std::map<int, fs::path> out;
  for (const auto& e : it) {
    const std::string ext = e.path().extension().string();
    if (ext != ".ppm" && ext != ".pgm" && ext != ".pfm") continue;
    const std::string stem = e.path().stem().string();
    if (stem.empty() || stem.find_first_not_of("0123456789") != std::string::npos) continue;
    out[std::stoi(stem)] = e.path();
  }
  return out;
}

int cmd_sequences(const Config& c, const Args& a) {
  const auto frames = list_frames(a.frames);
  const TrajectoryData traj = load_trajectory(a.trajectory);
  std::map<int, cyp_pose> pose_of;
  for (std::size_t i = 0; i < traj.ids.size(); ++i) pose_of[traj.ids[i]] = traj.poses[i];

  std::vector<int> ids;
  std::vector<cyp_pose> poses;
  for (const auto& [id, path] : frames) {
    const auto it = pose_of.find(id);
    if (it == pose_of.end()) {
      throw ConfigError("frame " + std::to_string(id) + " has no trajectory entry");
    }
    ids.push_back(id);
    poses.push_back(it->second);
  }

  std::size_t n_static = 0;
  check(cyp_detect_static(poses.data(), poses.size(), c.static_translation,
                          c.static_rotation, nullptr, 0, &n_static));
  std::vector<int> drop(n_static);
  if (n_static) {
    check(cyp_detect_static(poses.data(), poses.size(), c.static_translation,
                            c.static_rotation, drop.data(), n_static, &n_static));
  }
  std::vector<bool> is_static(ids.size(), false);
  for (int i : drop) is_static[i] = true;
  std::vector<int> kept;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!is_static[i]) kept.push_back(ids[i]);
  }

  std::size_t count = 0;
  int too_few = 0;
  check(cyp_make_sequences(kept.data(), kept.size(), c.seq_len, c.stride, nullptr,
                           0, &count, &too_few));
  std::vector<int> windows(count * c.seq_len);
  if (count) {
    check(cyp_make_sequences(kept.data(), kept.size(), c.seq_len, c.stride,
                             windows.data(), count, &count, &too_few));
  }
  if (too_few) std::cerr << "warning: too few frames for one sequence\n";

  const fs::path dir = out_dir(c);
  const fs::path depth_dir = a.depth_dir.empty() ? fs::path(a.frames) : fs::path(a.depth_dir);
  std::ostringstream index;
  index << "sequence,target_id,frame_ids\n";
  for (std::size_t w = 0; w < count; ++w) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%04zu", w);
    const fs::path seq = dir / name;
    fs::create_directories(seq);
    const int* fid = &windows[w * c.seq_len];
    const int target_id = fid[c.seq_len / 2];
    json manifest;
    manifest["target_id"] = target_id;
    manifest["frame_ids"] = std::vector<int>(fid, fid + c.seq_len);
    json sources = json::array();
    int k = 0;
    for (int i = 0; i < c.seq_len; ++i) {
      const fs::path& src_path = frames.at(fid[i]);
      const std::string ext = src_path.extension().string();
      if (fid[i] == target_id) {
        fs::copy_file(src_path, seq / ("target" + ext), fs::copy_options::overwrite_existing);
        continue;
      }
      const std::string file = "source_" + std::to_string(k++) + ext;
      fs::copy_file(src_path, seq / file, fs::copy_options::overwrite_existing);
      cyp_pose rel{};
      cyp_pose_relative(&pose_of[target_id], &pose_of[fid[i]], &rel);
      sources.push_back({{"id", fid[i]}, {"file", file}, {"pose", pose_json(rel)}});
    }
    manifest["sources"] = sources;
    const fs::path gt_depth = depth_dir / (fs::path(frames.at(target_id)).stem().string() + ".depth.pfm");
    if (fs::exists(gt_depth)) {
      fs::copy_file(gt_depth, seq / "depth.pfm", fs::copy_options::overwrite_existing);
      manifest["depth"] = "depth.pfm";
    }
    Image t = load_image(frames.at(target_id).string());
    const Size s = size_of(t.get());
    manifest["camera"] = camera_json(resolve_camera(c, s.width, s.height));
    write_text(seq / "manifest.json", manifest.dump(2) + "\n");
    index << name << "," << target_id << ",";
    for (int i = 0; i < c.seq_len; ++i) index << (i ? " " : "") << fid[i];
    index << "\n";
  }
  write_text(dir / "sequences.csv", index.str());
  std::cout << "frames: " << ids.size() << "\nstatic: " << drop.size()
            << "\nsequences: " << count << "\n";
  return 0;
}

int cmd_gradcheck(const Config& c, const Args& a) {
  const double tol = 1e-3;
  bool ok = true;
  double q = 0.0;
  check(cyp_gradcheck_quadratic(c.optim.fd_epsilon, &q));
  std::cout << "quadratic: rel_error=" << num(q) << (q < tol ? " PASS" : " FAIL") << "\n";
  ok = ok && q < tol;

  Image target, source;
  Depth depth;
  cyp_pose pose{};
  cyp_camera cam{};
  if (!a.target.empty()) {
    if (a.source.empty() || a.depth.empty()) {
      throw ConfigError("gradcheck on files needs --target, --source and --depth");
    }
    Inputs in = load_inputs(c, a.target, {a.source});
    cam = in.cam;
    target = std::move(in.target);
    source = std::move(in.sources[0]);
    depth = load_depth(a.depth);
    pose = parse_poses(a.poses, 1)[0];
  } else {
    // Synthetic pair: cylinder scene seen from two nearby positions.
    if (c.camera) {
      cam = to_camera(*c.camera);
    } else {
      check(cyp_camera_square(64, 16, &cam));
    }
    cyp_pose origin{}, moved{0.05, 0.0, 0.03, 0.0, 3.0 * kPi / 180.0, 0.0};
    cyp_image* t = nullptr;
    cyp_image* s = nullptr;
    cyp_depth* d = nullptr;
    check(cyp_synth_render(CYP_SCENE_CYLINDER, c.seed, &origin, &cam, &t, &d));
    target.reset(t);
    depth.reset(d);
    check(cyp_synth_render(CYP_SCENE_CYLINDER, c.seed, &moved, &cam, &s, nullptr));
    source.reset(s);
    cyp_pose_relative(&origin, &moved, &pose);
    pose.v[0] -= 0.01;
    pose.v[4] -= 0.01;
  }
  double r = 0.0;
  double raw = 0.0;
  check(cyp_gradcheck_pose(target.get(), source.get(), depth.get(), &pose, &cam,
                           &c.loss, c.optim.fd_epsilon, &r, &raw));
  std::cout << "pose: rel_diff=" << num(r) << (r < tol ? " PASS" : " FAIL")
            << " (without fixed valid set: " << num(raw) << ")\n";
  ok = ok && r < tol;
  return ok ? 0 : kExitCheckFailed;
}

int cmd_seam_check(const Config& c, const Args& a) {
  Image target, source;
  Depth depth;
  cyp_pose pose{};
  cyp_camera cam{};
  if (!a.target.empty()) {
    if (a.source.empty() || a.depth.empty()) {
      throw ConfigError("seam-check on files needs --target, --source and --depth");
    }
    Inputs in = load_inputs(c, a.target, {a.source});
    cam = in.cam;
    target = std::move(in.target);
    source = std::move(in.sources[0]);
    depth = load_depth(a.depth);
    pose = parse_poses(a.poses, 1)[0];
  } else {
    // Rotating synthetic pair: the source turned by 3.5 columns and moved.
    if (c.camera) {
      cam = to_camera(*c.camera);
    } else {
      check(cyp_camera_square(128, 32, &cam));
    }
    if (!cyclic(cam)) throw ConfigError("seam-check needs a full 360 degree camera");
    cyp_pose origin{}, moved{0.1, 0.0, 0.1, 0.0, 2.0 * kPi * 3.5 / cam.width, 0.0};
    cyp_image* t = nullptr;
    cyp_image* s = nullptr;
    cyp_depth* d = nullptr;
    check(cyp_synth_render(CYP_SCENE_ROOM, c.seed, &origin, &cam, &t, &d));
    target.reset(t);
    depth.reset(d);
    check(cyp_synth_render(CYP_SCENE_ROOM, c.seed, &moved, &cam, &s, nullptr));
    source.reset(s);
    cyp_pose_relative(&origin, &moved, &pose);
  }
  std::vector<double> wrap(cam.width), no_wrap(cam.width);
  check(cyp_seam_profile(target.get(), source.get(), depth.get(), &pose, &cam,
                         wrap.data(), no_wrap.data()));
  auto seam_mean = [&](const std::vector<double>& v) {
    double s = 0.0;
    int n = 0;
    for (int k = 0; k < 8 && k < cam.width; ++k) {
      const int x = k < 4 ? k : cam.width - 8 + k;
      if (std::isnan(v[x])) continue;
      s += v[x];
      ++n;
    }
    return n ? s / n : std::nan("");
  };
  std::ostringstream csv;
  csv << "column,wrap,no_wrap\n";
  for (int x = 0; x < cam.width; ++x) {
    csv << x << "," << num(wrap[x]) << "," << num(no_wrap[x]) << "\n";
  }
  if (!c.out.empty()) write_text(out_dir(c) / "seam_profile.csv", csv.str());
  std::cout << "seam_wrap: " << num(seam_mean(wrap)) << "\n"
            << "seam_no_wrap: " << num(seam_mean(no_wrap)) << "\n";
  return 0;
}

int cmd_synth(const Config& c, const Args& a) {
  cyp_scene scene;
  if (a.scene == "room") {
    scene = CYP_SCENE_ROOM;
  } else if (a.scene == "cylinder") {
    scene = CYP_SCENE_CYLINDER;
  } else {
    throw ConfigError("--scene must be 'room' or 'cylinder'");
  }
  cyp_camera cam{};
  if (c.camera) {
    cam = to_camera(*c.camera);
  } else {
    check(cyp_camera_square(a.width > 0 ? a.width : 128, a.height > 0 ? a.height : 32, &cam));
  }
  if (a.count < 1) throw ConfigError("--frames must be >= 1");
  cyp_pose start{}, step{};
  if (!a.start.empty()) start = parse_pose(a.start);
  if (!a.step.empty()) step = parse_pose(a.step);
  const fs::path dir = out_dir(c);
  std::vector<int> ids;
  std::vector<cyp_pose> poses;
  for (int i = 0; i < a.count; ++i) {
    cyp_pose p{};
    for (int j = 0; j < 6; ++j) p.v[j] = start.v[j] + i * step.v[j];
    cyp_image* img = nullptr;
    cyp_depth* d = nullptr;
    check(cyp_synth_render(scene, c.seed, &p, &cam, &img, &d));
    Image image(img);
    Depth depth(d);
    if (a.noise > 0.0) check(cyp_image_add_noise(image.get(), a.noise, c.seed + i));
    char name[32];
    std::snprintf(name, sizeof name, "%06d", i);
    save_image(image.get(), (dir / (std::string(name) + image_ext(image.get()))).string());
    check(cyp_depth_save(depth.get(), (dir / (std::string(name) + ".depth.pfm")).string().c_str()));
    ids.push_back(i);
    poses.push_back(p);
  }
  check(cyp_trajectory_save((dir / "trajectory.txt").string().c_str(), ids.data(),
                            poses.data(), poses.size()));
  write_text(dir / "camera.json", camera_json(cam).dump(2) + "\n");
  return 0;
}

struct Overrides {
  std::string config, camera, out, median_scale, wrap;
  std::optional<int> scales, snippet;
  std::optional<double> lambda_s, lambda_e, lambda_m, cap, fov;
  std::optional<std::uint64_t> seed;
};

Config build_config(const Overrides& o) {
  Config c = o.config.empty() ? Config() : load_config(o.config);
  if (!o.camera.empty()) c.camera = load_camera(o.camera);
  if (!o.out.empty()) c.out = o.out;
  if (o.scales) c.loss.scales = *o.scales;
  if (o.lambda_s) c.loss.lambda_s = *o.lambda_s;
  if (o.lambda_e) c.loss.lambda_e = *o.lambda_e;
  if (o.lambda_m) c.loss.lambda_m = *o.lambda_m;
  if (!o.median_scale.empty()) c.median_scale = o.median_scale == "on";
  if (o.cap) c.cap = *o.cap;
  if (o.snippet) c.snippet = *o.snippet;
  if (o.fov) c.fov_deg = *o.fov;
  if (!o.wrap.empty()) c.wrap = o.wrap == "on";
  if (o.seed) c.seed = *o.seed;
  validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cylpano: cylindrical panorama view synthesis and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  Args a;
  std::string dump_config;

  app.add_option("--config", o.config, "JSON configuration file");
  app.add_option("--camera", o.camera, "JSON camera description");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--scales", o.scales, "pyramid scales in the loss");
  app.add_option("--lambda-s", o.lambda_s, "second-order smoothness weight");
  app.add_option("--lambda-e", o.lambda_e, "explainability weight");
  app.add_option("--lambda-m", o.lambda_m, "image-aware smoothness weight");
  app.add_option("--median-scale", o.median_scale, "median scaling in eval-depth")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--cap", o.cap, "depth cap in meters");
  app.add_option("--snippet", o.snippet, "ATE snippet length");
  app.add_option("--fov", o.fov, "crop field of view in degrees");
  app.add_option("--wrap", o.wrap, "horizontal wrap sampling")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--seed", o.seed, "seed for synthetic data");
  app.add_option("--dump-config", dump_config,
                 "write the effective configuration to this path");

  auto* warp = app.add_subcommand("warp", "synthesize a target view from a source");
  warp->add_option("--source", a.source, "source image")->required();
  warp->add_option("--depth", a.depth, "target depth map (PFM)")->required();
  warp->add_option("--pose", a.poses, "target-to-source pose tx,ty,tz,rx,ry,rz");

  auto* loss = app.add_subcommand("loss", "evaluate the view-synthesis loss");
  loss->add_option("--target", a.target)->required();
  loss->add_option("--source", a.sources)->required();
  loss->add_option("--depth", a.depth)->required();
  loss->add_option("--pose", a.poses, "one per source");
  loss->add_option("--mask", a.masks, "explainability mask per source (PFM)");

  auto* opt = app.add_subcommand("optimize", "refine poses and/or depth");
  opt->add_option("mode", a.mode)->required()->check(
      CLI::IsMember({"pose", "depth", "alternate"}));
  opt->add_option("--target", a.target)->required();
  opt->add_option("--source", a.sources)->required();
  opt->add_option("--depth", a.depth, "known depth (pose) or initial depth");
  opt->add_option("--pose", a.poses, "initial pose per source");

  auto* evd = app.add_subcommand("eval-depth", "depth error metrics");
  evd->add_option("--pred", a.pred)->required();
  evd->add_option("--gt", a.gt)->required();

  auto* evp = app.add_subcommand("eval-pose", "absolute trajectory error");
  evp->add_option("--pred", a.pred)->required();
  evp->add_option("--gt", a.gt)->required();

  auto* stitch = app.add_subcommand("stitch", "stitch 4 pinhole views");
  stitch->add_option("--view", a.views, "views at 0, 90, 180, 270 degrees")->required();
  stitch->add_option("--pinhole", a.pinhole, "fx,fy,cx,cy")->required();

  auto* repro = app.add_subcommand("reproject", "equirectangular to cylindrical");
  repro->add_option("--input", a.inputs)->required();

  auto* seqs = app.add_subcommand("sequences", "build training sequences");
  seqs->add_option("--frames", a.frames, "directory of <id>.ppm frames")->required();
  seqs->add_option("--trajectory", a.trajectory)->required();
  seqs->add_option("--depth-dir", a.depth_dir, "directory of <id>.depth.pfm");

  auto* crop = app.add_subcommand("crop", "crop a panorama to a narrower FOV");
  crop->add_option("--input", a.input)->required();
  crop->add_option("--depth", a.depth);
  crop->add_option("--center", a.center, "center azimuth in degrees");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
  grad->add_option("--target", a.target);
  grad->add_option("--source", a.source);
  grad->add_option("--depth", a.depth);
  grad->add_option("--pose", a.poses);

  auto* seam = app.add_subcommand("seam-check", "seam error with and without wrap");
  seam->add_option("--target", a.target);
  seam->add_option("--source", a.source);
  seam->add_option("--depth", a.depth);
  seam->add_option("--pose", a.poses);

  auto* synth = app.add_subcommand("synth", "render synthetic frames");
  synth->add_option("--scene", a.scene)->check(CLI::IsMember({"room", "cylinder"}));
  synth->add_option("--frames", a.count, "number of frames");
  synth->add_option("--start", a.start, "first camera-to-world pose");
  synth->add_option("--step", a.step, "per-frame pose increment");
  synth->add_option("--width", a.width);
  synth->add_option("--height", a.height);
  synth->add_option("--noise", a.noise, "Gaussian noise sigma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const Config c = build_config(o);
    if (!dump_config.empty()) save_config(c, dump_config);
    if (*warp) return cmd_warp(c, a);
    if (*loss) return cmd_loss(c, a);
    if (*opt) return cmd_optimize(c, a);
    if (*evd) return cmd_eval_depth(c, a);
    if (*evp) return cmd_eval_pose(c, a);
    if (*stitch) return cmd_stitch(c, a);
    if (*repro) return cmd_reproject(c, a);
    if (*seqs) return cmd_sequences(c, a);
    if (*crop) return cmd_crop(c, a);
    if (*grad) return cmd_gradcheck(c, a);
    if (*seam) return cmd_seam_check(c, a);
    if (*synth) return cmd_synth(c, a);
  } catch (const CapiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.status == CYP_ERR_IO) return kExitIo;
    if (e.status == CYP_ERR_INTERNAL) return kExitCheckFailed;
    return kExitValidation;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigIoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}
