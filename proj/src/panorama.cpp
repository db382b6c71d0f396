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

#include "cylpano/panorama.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cylpano/error.hpp"

namespace cylpano {

namespace {

constexpr double kGridSnap = 1e-9;

void check_dims(int height, int width, int channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    std::ostringstream os;
    os << "image dimensions must be positive, got " << height << "x" << width
       << "x" << channels;
    throw InvalidArgument(os.str());
  }
}

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kGridSnap ? r : v;
}

int wrap_index(int i, int n) {
  const int m = i % n;
  return m < 0 ? m + n : m;
}

}  // namespace

Panorama::Panorama(int height, int width, int channels, bool cyclic)
    : height_(height), width_(width), channels_(channels), cyclic_(cyclic) {
  check_dims(height, width, channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
}

Panorama::Panorama(int height, int width, int channels,
                   std::vector<double> data, bool cyclic)
    : height_(height),
      width_(width),
      channels_(channels),
      cyclic_(cyclic),
      data_(std::move(data)) {
  check_dims(height, width, channels);
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw InvalidArgument("image data length does not match H*W*C");
  }
}

Mask::Mask(int height, int width, bool value)
    : height_(height), width_(width) {
  check_dims(height, width, 1);
  data_.assign(static_cast<std::size_t>(height) * width, value ? 1 : 0);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1));
}

DepthMap::DepthMap(int height, int width, double fill)
    : DepthMap(height, width,
               std::vector<double>(static_cast<std::size_t>(
                                       std::max(height, 0)) *
                                       std::max(width, 0),
                                   fill)) {}

DepthMap::DepthMap(int height, int width, std::vector<double> depth)
    : height_(height), width_(width), depth_(std::move(depth)) {
  check_dims(height, width, 1);
  if (depth_.size() != static_cast<std::size_t>(height) * width) {
    throw InvalidArgument("depth data length does not match H*W");
  }
  valid_ = Mask(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double d = depth_[index(y, x)];
      valid_.set(y, x, std::isfinite(d) && d > 0.0);
    }
  }
}

void DepthMap::set(int y, int x, double d) {
  depth_[index(y, x)] = d;
  valid_.set(y, x, std::isfinite(d) && d > 0.0);
}

void DepthMap::invalidate(int y, int x) { valid_.set(y, x, false); }

ExplainabilityMask::ExplainabilityMask(int height, int width, double fill)
    : ExplainabilityMask(
          height, width,
          std::vector<double>(
              static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0),
              fill)) {}

ExplainabilityMask::ExplainabilityMask(int height, int width,
                                       std::vector<double> weights)
    : height_(height), width_(width), weights_(std::move(weights)) {
  check_dims(height, width, 1);
  if (weights_.size() != static_cast<std::size_t>(height) * width) {
    throw InvalidArgument("mask data length does not match H*W");
  }
  for (double w : weights_) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw InvalidArgument("explainability weights must lie in [0, 1]");
    }
  }
}

namespace {

// Lower cell index and fraction for coordinate v on [0, n - 1]. Outside the
// range the edge cell is continued linearly (fraction < 0 or > 1).
void edge_cell(double v, int n, int& i0, int& i1, double& f) {
  if (n == 1) {
    i0 = i1 = 0;
    f = 0.0;
    return;
  }
  i0 = std::clamp(static_cast<int>(std::floor(v)), 0, n - 2);
  i1 = i0 + 1;
  f = v - i0;
}

}  // namespace

bool sample_bilinear(const Panorama& img, double x, double y,
                     HorizontalBoundary boundary, std::span<double> out,
                     bool extrapolate) {
  const int w = img.width();
  const int h = img.height();
  const int nc = img.channels();
  std::fill(out.begin(), out.begin() + nc, 0.0);
  if (!std::isfinite(x) || !std::isfinite(y)) return false;

  x = snap(x);
  y = snap(y);
  if (!extrapolate && (y < 0.0 || y > h - 1)) return false;

  int x0 = 0;
  int x1 = 0;
  double fx = 0.0;
  switch (boundary) {
    case HorizontalBoundary::kWrap: {
      double xm = x - w * std::floor(x / w);
      if (xm >= w) xm -= w;
      x0 = static_cast<int>(std::floor(xm));
      fx = xm - x0;
      x1 = x0 + 1 == w ? 0 : x0 + 1;
      break;
    }
    case HorizontalBoundary::kClamp: {
      const double xc = std::clamp(x, 0.0, static_cast<double>(w - 1));
      x0 = static_cast<int>(std::floor(xc));
      fx = xc - x0;
      x1 = std::min(x0 + 1, w - 1);
      break;
    }
    case HorizontalBoundary::kInvalid: {
      if (x < 0.0 || x > w - 1) {
        if (!extrapolate) return false;
        edge_cell(x, w, x0, x1, fx);
        break;
      }
      x0 = static_cast<int>(std::floor(x));
      fx = x - x0;
      x1 = std::min(x0 + 1, w - 1);
      break;
    }
  }

  int y0 = 0;
  int y1 = 0;
  double fy = 0.0;
  if (y < 0.0 || y > h - 1) {
    edge_cell(y, h, y0, y1, fy);
  } else {
    y0 = static_cast<int>(std::floor(y));
    fy = y - y0;
    y1 = std::min(y0 + 1, h - 1);
  }

  const double w00 = (1.0 - fx) * (1.0 - fy);
  const double w01 = fx * (1.0 - fy);
  const double w10 = (1.0 - fx) * fy;
  const double w11 = fx * fy;
  for (int c = 0; c < nc; ++c) {
    out[c] = w00 * img.at(y0, x0, c) + w01 * img.at(y0, x1, c) +
             w10 * img.at(y1, x0, c) + w11 * img.at(y1, x1, c);
  }
  return true;
}

bool sample_bilinear_wrap(const Panorama& img, double x, double y,
                          std::span<double> out) {
  return sample_bilinear(img, x, y, HorizontalBoundary::kWrap, out);
}

Panorama wrap_pad(const Panorama& img, int pad) {
  if (pad < 0 || pad > img.width()) {
    std::ostringstream os;
    os << "wrap padding " << pad << " outside [0, " << img.width() << "]";
    throw InvalidArgument(os.str());
  }
  const int w = img.width();
  Panorama out(img.height(), w + 2 * pad, img.channels(), false);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w + 2 * pad; ++x) {
      const int src = wrap_index(x - pad, w);
      for (int c = 0; c < img.channels(); ++c) {
        out.at(y, x, c) = img.at(y, src, c);
      }
    }
  }
  return out;
}

Panorama shift_columns(const Panorama& img, int shift) {
  Panorama out(img.height(), img.width(), img.channels(), img.cyclic());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const int src = wrap_index(x - shift, img.width());
      for (int c = 0; c < img.channels(); ++c) {
        out.at(y, x, c) = img.at(y, src, c);
      }
    }
  }
  return out;
}

Panorama extract_columns(const Panorama& img, int first, int count) {
  if (count < 1 || count > img.width()) {
    throw InvalidArgument("column count out of range");
  }
  Panorama out(img.height(), count, img.channels(), false);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < count; ++x) {
      const int src = wrap_index(first + x, img.width());
      for (int c = 0; c < img.channels(); ++c) {
        out.at(y, x, c) = img.at(y, src, c);
      }
    }
  }
  return out;
}

Kernel Kernel::identity(int size) {
  Kernel k;
  k.size = size;
  k.weights.assign(static_cast<std::size_t>(size) * size, 0.0);
  k.weights[static_cast<std::size_t>(size / 2) * size + size / 2] = 1.0;
  return k;
}

Panorama conv2d_wrap(const Panorama& img, const Kernel& kernel, int stride) {
  const int k = kernel.size;
  if (k < 1 || k % 2 == 0) {
    throw InvalidArgument("convolution kernel size must be odd");
  }
  if (kernel.weights.size() != static_cast<std::size_t>(k) * k) {
    throw InvalidArgument("kernel weight count does not match size^2");
  }
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (img.cyclic() && img.width() % stride != 0) {
    throw InvalidArgument("stride must divide the panorama width");
  }
  const int r = k / 2;
  if (img.cyclic() && r > img.width()) {
    throw InvalidArgument("kernel wider than the panorama");
  }

  // Horizontal boundary comes from the padded copy; rows are zero-padded by
  // skipping out-of-range taps.
  Panorama padded;
  if (img.cyclic()) {
    padded = wrap_pad(img, r);
  } else {
    padded = Panorama(img.height(), img.width() + 2 * r, img.channels(), false);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        for (int c = 0; c < img.channels(); ++c) {
          padded.at(y, x + r, c) = img.at(y, x, c);
        }
      }
    }
  }

  const int out_h = (img.height() + stride - 1) / stride;
  const int out_w = (img.width() + stride - 1) / stride;
  Panorama out(out_h, out_w, img.channels(), img.cyclic());
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const int cy = oy * stride;
      const int cx = ox * stride + r;  // center in padded coordinates
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int a = 0; a < k; ++a) {
          const int yy = cy + a - r;
          if (yy < 0 || yy >= img.height()) continue;
          for (int b = 0; b < k; ++b) {
            acc += kernel.weights[static_cast<std::size_t>(a) * k + b] *
                   padded.at(yy, cx + b - r, c);
          }
        }
        out.at(oy, ox, c) = acc;
      }
    }
  }
  return out;
}

namespace {

Panorama box_half(const Panorama& img) {
  const int h = img.height() / 2;
  const int w = img.width() / 2;
  Panorama out(h, w, img.channels(), img.cyclic());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xa = 2 * x;
      const int xb = img.cyclic() ? wrap_index(2 * x + 1, img.width())
                                  : 2 * x + 1;
      for (int c = 0; c < img.channels(); ++c) {
        out.at(y, x, c) = 0.25 * (img.at(2 * y, xa, c) + img.at(2 * y, xb, c) +
                                  img.at(2 * y + 1, xa, c) +
                                  img.at(2 * y + 1, xb, c));
      }
    }
  }
  return out;
}

void check_pyramid(int height, int width, int scales) {
  if (scales < 1) throw InvalidArgument("pyramid needs at least one scale");
  const int f = 1 << (scales - 1);
  if (height % f != 0 || width % f != 0) {
    std::ostringstream os;
    os << "image " << height << "x" << width << " is not divisible by 2^"
       << (scales - 1);
    throw InvalidArgument(os.str());
  }
}

}  // namespace

std::vector<Panorama> downsample_pyramid(const Panorama& img, int scales) {
  check_pyramid(img.height(), img.width(), scales);
  std::vector<Panorama> levels;
  levels.reserve(scales);
  levels.push_back(img);
  for (int s = 1; s < scales; ++s) levels.push_back(box_half(levels.back()));
  return levels;
}

DepthMap downsample_depth(const DepthMap& depth) {
  if (depth.height() % 2 != 0 || depth.width() % 2 != 0) {
    throw InvalidArgument("depth map size must be even to downsample");
  }
  const int h = depth.height() / 2;
  const int w = depth.width() / 2;
  std::vector<double> values(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          if (depth.valid(2 * y + dy, 2 * x + dx)) {
            sum += depth.depth(2 * y + dy, 2 * x + dx);
            ++n;
          }
        }
      }
      values[static_cast<std::size_t>(y) * w + x] = n > 0 ? sum / n : 0.0;
    }
  }
  return DepthMap(h, w, std::move(values));
}

std::vector<DepthMap> depth_pyramid(const DepthMap& depth, int scales) {
  check_pyramid(depth.height(), depth.width(), scales);
  std::vector<DepthMap> levels;
  levels.reserve(scales);
  levels.push_back(depth);
  for (int s = 1; s < scales; ++s) {
    levels.push_back(downsample_depth(levels.back()));
  }
  return levels;
}

ExplainabilityMask downsample_mask(const ExplainabilityMask& mask) {
  if (mask.height() % 2 != 0 || mask.width() % 2 != 0) {
    throw InvalidArgument("mask size must be even to downsample");
  }
  const int h = mask.height() / 2;
  const int w = mask.width() / 2;
  std::vector<double> values(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      values[static_cast<std::size_t>(y) * w + x] =
          0.25 * (mask(2 * y, 2 * x) + mask(2 * y, 2 * x + 1) +
                  mask(2 * y + 1, 2 * x) + mask(2 * y + 1, 2 * x + 1));
    }
  }
  return ExplainabilityMask(h, w, std::move(values));
}

namespace {

// Overlap weights of output cells [i*s, (i+1)*s) with input cells, s = n/m.
std::vector<std::vector<std::pair<int, double>>> area_weights(int n, int m) {
  std::vector<std::vector<std::pair<int, double>>> weights(m);
  const double scale = static_cast<double>(n) / m;
  for (int i = 0; i < m; ++i) {
    const double lo = i * scale;
    const double hi = (i + 1) * scale;
    for (int j = static_cast<int>(std::floor(lo)); j < n && j < hi; ++j) {
      const double overlap = std::min(hi, j + 1.0) - std::max(lo, 1.0 * j);
      if (overlap > 0.0) weights[i].emplace_back(j, overlap / scale);
    }
  }
  return weights;
}

}  // namespace

Panorama resize_area(const Panorama& img, int out_height, int out_width) {
  check_dims(out_height, out_width, img.channels());
  const auto wy = area_weights(img.height(), out_height);
  const auto wx = area_weights(img.width(), out_width);
  Panorama out(out_height, out_width, img.channels(), img.cyclic());
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (const auto& [sy, ay] : wy[y]) {
          for (const auto& [sx, ax] : wx[x]) {
            acc += ay * ax * img.at(sy, sx, c);
          }
        }
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

}  // namespace cylpano
