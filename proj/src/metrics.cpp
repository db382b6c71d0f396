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

#include "cylpano/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cylpano/error.hpp"

namespace cylpano {

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const DepthEvalOptions& options) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw InvalidArgument("depth_metrics: prediction and ground truth differ "
                          "in size");
  }
  std::vector<double> p;
  std::vector<double> g;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!pred.valid(y, x) || !gt.valid(y, x)) continue;
      if (gt.depth(y, x) > options.cap) continue;
      p.push_back(pred.depth(y, x));
      g.push_back(gt.depth(y, x));
    }
  }
  if (p.empty()) {
    throw InvalidArgument("depth_metrics: no pixel is valid in both maps");
  }
  if (options.median_scale) {
    const double s = median(g) / median(p);
    for (double& v : p) v *= s;
  }

  DepthMetrics m;
  m.count = p.size();
  double sq = 0.0;
  double sq_log = 0.0;
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double diff = p[i] - g[i];
    m.abs_rel += std::abs(diff) / g[i];
    m.sq_rel += diff * diff / g[i];
    sq += diff * diff;
    const double ld = std::log(p[i]) - std::log(g[i]);
    sq_log += ld * ld;
    const double ratio = std::max(p[i] / g[i], g[i] / p[i]);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
  }
  const double n = static_cast<double>(p.size());
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse = std::sqrt(sq / n);
  m.rmse_log = std::sqrt(sq_log / n);
  m.delta1 = d1 / n;
  m.delta2 = d2 / n;
  m.delta3 = d3 / n;
  return m;
}

double ate_window(std::span<const Eigen::Vector3d> pred,
                  std::span<const Eigen::Vector3d> gt) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += gt[i].dot(pred[i]);
    den += pred[i].squaredNorm();
  }
  // A prediction that never leaves its first frame has no usable scale.
  const double scale = den > 0.0 ? num / den : 1.0;
  double err = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    err += (scale * pred[i] - gt[i]).norm();
  }
  return err / static_cast<double>(pred.size());
}

AteResult ate(std::span<const Pose> pred, std::span<const Pose> gt,
              int snippet_len) {
  if (pred.size() != gt.size()) {
    std::ostringstream os;
    os << "ate: trajectory lengths differ (" << pred.size() << " vs "
       << gt.size() << ")";
    throw InvalidArgument(os.str());
  }
  if (snippet_len < 2) throw InvalidArgument("ate: snippet length must be >= 2");
  if (pred.size() < static_cast<std::size_t>(snippet_len)) {
    throw InvalidArgument("ate: trajectory shorter than the snippet length");
  }

  auto anchored = [snippet_len](std::span<const Pose> traj, std::size_t start) {
    const Eigen::Matrix3d r0t = traj[start].rotation_matrix().transpose();
    const Eigen::Vector3d t0 = traj[start].translation;
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < snippet_len; ++i) {
      pts.push_back(r0t * (traj[start + i].translation - t0));
    }
    return pts;
  };

  AteResult out;
  for (std::size_t s = 0; s + snippet_len <= pred.size(); ++s) {
    const auto p = anchored(pred, s);
    const auto g = anchored(gt, s);
    out.windows.push_back(ate_window(p, g));
  }
  const double n = static_cast<double>(out.windows.size());
  for (double w : out.windows) out.mean += w;
  out.mean /= n;
  for (double w : out.windows) out.std_dev += (w - out.mean) * (w - out.mean);
  out.std_dev = std::sqrt(out.std_dev / n);
  return out;
}

}  // namespace cylpano
