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


// Run configuration shared by all cylpano commands. Stored as JSON; every
// object rejects keys it does not know.

#ifndef CYLPANO_TOOLS_CONFIG_HPP_
#define CYLPANO_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cylpano/cylpano.h"

namespace cylpano_cli {

// Malformed or out-of-range configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable configuration file (exit code 3).
class ConfigIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CameraSpec {
  int width = 0;
  int height = 0;
  // Both unset: square pixels.
  std::optional<double> h_min;
  std::optional<double> h_max;
  double fov_deg = 360.0;
  double center_deg = 0.0;

  bool operator==(const CameraSpec&) const = default;
};

struct Config {
  std::optional<CameraSpec> camera;

  cyp_loss_weights loss{};
  bool wrap = true;

  cyp_optim_config optim{};
  int rounds = 3;
  double init_depth = 2.0;

  bool median_scale = true;
  double cap = 80.0;
  int snippet = 3;

  double fov_deg = 360.0;
  double center_deg = 0.0;
  double static_translation = 0.05;
  double static_rotation = 0.005;
  int seq_len = 3;
  int stride = 1;

  std::uint64_t seed = 0;
  std::string out;

  Config();
  bool operator==(const Config& o) const;
};

Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
CameraSpec camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraSpec& c);

Config load_config(const std::string& path);
CameraSpec load_camera(const std::string& path);
void save_config(const Config& c, const std::string& path);

// Throws ConfigError naming the offending setting.
void validate(const Config& c);

// Camera for an image of the given size: the configured one (which must
// match) or a full panorama with square pixels.
cyp_camera resolve_camera(const Config& c, int width, int height);
cyp_camera to_camera(const CameraSpec& spec);

}  // namespace cylpano_cli

#endif  // CYLPANO_TOOLS_CONFIG_HPP_
