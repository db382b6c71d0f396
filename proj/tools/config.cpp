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


#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cylpano_cli {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

void only_keys(const json& j, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& j, const std::string& where, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + (where.empty() ? "" : where + ".") + key +
                      "' has the wrong type");
  }
}

const char* smooth_name(cyp_smooth_kind k) {
  return k == CYP_SMOOTH_IMAGE_AWARE ? "image_aware" : "second_order";
}

}  // namespace

Config::Config() {
  cyp_loss_weights_default(&loss);
  cyp_optim_config_default(&optim);
}

bool Config::operator==(const Config& o) const {
  return config_to_json(*this) == config_to_json(o);
}

CameraSpec camera_from_json(const json& j) {
  only_keys(j, "camera", {"width", "height", "h_min", "h_max", "fov_deg", "center_deg"});
  CameraSpec c;
  read(j, "camera", "width", c.width);
  read(j, "camera", "height", c.height);
  if (j.contains("h_min")) {
    double v = 0;
    read(j, "camera", "h_min", v);
    c.h_min = v;
  }
  if (j.contains("h_max")) {
    double v = 0;
    read(j, "camera", "h_max", v);
    c.h_max = v;
  }
  read(j, "camera", "fov_deg", c.fov_deg);
  read(j, "camera", "center_deg", c.center_deg);
  if (c.h_min.has_value() != c.h_max.has_value()) {
    throw ConfigError("camera: give both h_min and h_max or neither");
  }
  return c;
}

json camera_to_json(const CameraSpec& c) {
  json j{{"width", c.width}, {"height", c.height}, {"fov_deg", c.fov_deg},
         {"center_deg", c.center_deg}};
  if (c.h_min) j["h_min"] = *c.h_min;
  if (c.h_max) j["h_max"] = *c.h_max;
  return j;
}

Config config_from_json(const json& j) {
  only_keys(j, "", {"camera", "loss", "optim", "metrics", "data", "seed", "out"});
  Config c;
  if (j.contains("camera") && !j.at("camera").is_null()) {
    c.camera = camera_from_json(j.at("camera"));
  }
  if (j.contains("loss")) {
    const json& l = j.at("loss");
    only_keys(l, "loss", {"lambda_s", "lambda_e", "lambda_m", "scales", "smooth", "wrap"});
    read(l, "loss", "lambda_s", c.loss.lambda_s);
    read(l, "loss", "lambda_e", c.loss.lambda_e);
    read(l, "loss", "lambda_m", c.loss.lambda_m);
    read(l, "loss", "scales", c.loss.scales);
    read(l, "loss", "wrap", c.wrap);
    std::string smooth = smooth_name(c.loss.smooth);
    read(l, "loss", "smooth", smooth);
    if (smooth == "second_order") {
      c.loss.smooth = CYP_SMOOTH_SECOND_ORDER;
    } else if (smooth == "image_aware") {
      c.loss.smooth = CYP_SMOOTH_IMAGE_AWARE;
    } else {
      throw ConfigError("loss.smooth must be 'second_order' or 'image_aware'");
    }
  }
  if (j.contains("optim")) {
    const json& o = j.at("optim");
    only_keys(o, "optim", {"max_iters", "step_size", "fd_epsilon", "convergence_tol",
                           "depth_min", "depth_max", "rounds", "init_depth"});
    read(o, "optim", "max_iters", c.optim.max_iters);
    read(o, "optim", "step_size", c.optim.step_size);
    read(o, "optim", "fd_epsilon", c.optim.fd_epsilon);
    read(o, "optim", "convergence_tol", c.optim.convergence_tol);
    read(o, "optim", "depth_min", c.optim.depth_min);
    read(o, "optim", "depth_max", c.optim.depth_max);
    read(o, "optim", "rounds", c.rounds);
    read(o, "optim", "init_depth", c.init_depth);
  }
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    only_keys(m, "metrics", {"median_scale", "cap", "snippet"});
    read(m, "metrics", "median_scale", c.median_scale);
    read(m, "metrics", "cap", c.cap);
    read(m, "metrics", "snippet", c.snippet);
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    only_keys(d, "data", {"fov_deg", "center_deg", "static_translation",
                          "static_rotation", "seq_len", "stride"});
    read(d, "data", "fov_deg", c.fov_deg);
    read(d, "data", "center_deg", c.center_deg);
    read(d, "data", "static_translation", c.static_translation);
    read(d, "data", "static_rotation", c.static_rotation);
    read(d, "data", "seq_len", c.seq_len);
    read(d, "data", "stride", c.stride);
  }
  read(j, "", "seed", c.seed);
  read(j, "", "out", c.out);
  return c;
}

json config_to_json(const Config& c) {
  json j;
  j["camera"] = c.camera ? camera_to_json(*c.camera) : json(nullptr);
  j["loss"] = {{"lambda_s", c.loss.lambda_s}, {"lambda_e", c.loss.lambda_e},
               {"lambda_m", c.loss.lambda_m}, {"scales", c.loss.scales},
               {"smooth", smooth_name(c.loss.smooth)}, {"wrap", c.wrap}};
  j["optim"] = {{"max_iters", c.optim.max_iters},
                {"step_size", c.optim.step_size},
                {"fd_epsilon", c.optim.fd_epsilon},
                {"convergence_tol", c.optim.convergence_tol},
                {"depth_min", c.optim.depth_min},
                {"depth_max", c.optim.depth_max},
                {"rounds", c.rounds},
                {"init_depth", c.init_depth}};
  j["metrics"] = {{"median_scale", c.median_scale}, {"cap", c.cap},
                  {"snippet", c.snippet}};
  j["data"] = {{"fov_deg", c.fov_deg},
               {"center_deg", c.center_deg},
               {"static_translation", c.static_translation},
               {"static_rotation", c.static_rotation},
               {"seq_len", c.seq_len},
               {"stride", c.stride}};
  j["seed"] = c.seed;
  j["out"] = c.out;
  return j;
}

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigIoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

Config load_config(const std::string& path) {
  return config_from_json(parse_file(path));
}

CameraSpec load_camera(const std::string& path) {
  json j = parse_file(path);
  // Accept either a bare camera object or a config holding one.
  if (j.is_object() && j.contains("camera")) j = j.at("camera");
  return camera_from_json(j);
}

void save_config(const Config& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigIoError("cannot open '" + path + "' for writing");
  out << config_to_json(c).dump(2) << "\n";
  if (!out) throw ConfigIoError("failed writing '" + path + "'");
}

cyp_camera to_camera(const CameraSpec& spec) {
  cyp_camera cam{};
  if (cyp_camera_square(spec.width, spec.height, &cam) != CYP_OK) {
    throw ConfigError(std::string("camera: ") + cyp_last_error());
  }
  if (spec.h_min) {
    cam.h_min = *spec.h_min;
    cam.h_max = *spec.h_max;
  }
  cam.fov = spec.fov_deg * kPi / 180.0;
  cam.center_azimuth = spec.center_deg * kPi / 180.0;
  if (spec.fov_deg == 360.0) cam.fov = 2.0 * kPi;
  if (cyp_camera_validate(&cam) != CYP_OK) {
    throw ConfigError(std::string("camera: ") + cyp_last_error());
  }
  return cam;
}

void validate(const Config& c) {
  if (c.camera) to_camera(*c.camera);
  if (cyp_loss_weights_validate(&c.loss) != CYP_OK) {
    throw ConfigError(std::string("loss: ") + cyp_last_error());
  }
  if (cyp_optim_config_validate(&c.optim) != CYP_OK) {
    throw ConfigError(std::string("optim: ") + cyp_last_error());
  }
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (c.rounds < 1) fail("optim.rounds must be >= 1");
  if (!(c.init_depth > 0.0) || !std::isfinite(c.init_depth)) {
    fail("optim.init_depth must be a positive number");
  }
  if (!(c.cap > 0.0)) fail("metrics.cap must be > 0");
  if (c.snippet < 2) fail("metrics.snippet must be >= 2");
  if (!(c.fov_deg > 0.0 && c.fov_deg <= 360.0)) fail("data.fov_deg must be in (0, 360]");
  if (!(c.static_translation >= 0.0)) fail("data.static_translation must be >= 0");
  if (!(c.static_rotation >= 0.0)) fail("data.static_rotation must be >= 0");
  if (c.seq_len < 3 || c.seq_len % 2 == 0) fail("data.seq_len must be odd and >= 3");
  if (c.stride < 1) fail("data.stride must be >= 1");
}

cyp_camera resolve_camera(const Config& c, int width, int height) {
  if (!c.camera) {
    cyp_camera cam{};
    if (cyp_camera_square(width, height, &cam) != CYP_OK) {
      throw ConfigError(std::string("camera: ") + cyp_last_error());
    }
    return cam;
  }
  const cyp_camera cam = to_camera(*c.camera);
  if (cam.width != width || cam.height != height) {
    std::ostringstream os;
    os << "camera is " << cam.width << "x" << cam.height << " but the image is "
       << width << "x" << height;
    throw ConfigError(os.str());
  }
  return cam;
}

}  // namespace cylpano_cli
