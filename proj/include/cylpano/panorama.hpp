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

// Image containers with cyclic horizontal topology and the wrap-aware
// operations on them: bilinear sampling, wrap padding, convolution and
// multi-scale pyramids.

#ifndef CYLPANO_PANORAMA_HPP_
#define CYLPANO_PANORAMA_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cylpano {

// H x W x C image, channel-interleaved row-major. Column W is identified with
// column 0 when the image is cyclic.
class Panorama {
 public:
  Panorama() = default;
  Panorama(int height, int width, int channels, bool cyclic = true);
  Panorama(int height, int width, int channels, std::vector<double> data,
           bool cyclic = true);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool cyclic() const { return cyclic_; }
  void set_cyclic(bool cyclic) { cyclic_ = cyclic; }
  bool empty() const { return data_.empty(); }

  double& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Panorama& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  bool cyclic_ = true;
  std::vector<double> data_;
};

// Per-pixel boolean grid.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, bool value = false);

  int height() const { return height_; }
  int width() const { return width_; }
  bool operator()(int y, int x) const { return data_[index(y, x)] != 0; }
  void set(int y, int x, bool v) { data_[index(y, x)] = v ? 1 : 0; }
  std::size_t count() const;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

// Positive depths (meters) with a validity flag. A pixel is valid only if its
// depth is finite and strictly positive.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int height, int width, double fill = 1.0);
  // Pixels with non-finite or non-positive values are marked invalid.
  DepthMap(int height, int width, std::vector<double> depth);

  int height() const { return height_; }
  int width() const { return width_; }
  double depth(int y, int x) const { return depth_[index(y, x)]; }
  bool valid(int y, int x) const { return valid_(y, x); }
  void set(int y, int x, double d);
  void invalidate(int y, int x);
  const Mask& validity() const { return valid_; }
  std::span<const double> values() const { return depth_; }

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> depth_;
  Mask valid_;
};

// Per-pixel weights in [0, 1] that down-weight pixels the rigid model cannot
// explain.
class ExplainabilityMask {
 public:
  ExplainabilityMask() = default;
  ExplainabilityMask(int height, int width, double fill = 1.0);
  ExplainabilityMask(int height, int width, std::vector<double> weights);

  int height() const { return height_; }
  int width() const { return width_; }
  double operator()(int y, int x) const {
    return weights_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const double> weights() const { return weights_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> weights_;
};

// How the sampler treats columns outside [0, W - 1].
enum class HorizontalBoundary {
  kWrap,     // cyclic, columns W-1 and 0 are neighbors
  kClamp,    // replicate the edge columns
  kInvalid,  // out-of-range samples are invalid
};

// Bilinear sample of every channel at continuous (x, y); writes `channels()`
// values into `out`. Rows outside [0, H - 1] are invalid and yield zeros.
// Coordinates within 1e-9 px of the integer grid are snapped onto it.
// With `extrapolate`, out-of-range rows (and columns under kInvalid) continue
// the edge cell's bilinear patch linearly, so every finite coordinate is valid
// and the value stays differentiable across the border.
bool sample_bilinear(const Panorama& img, double x, double y,
                     HorizontalBoundary boundary, std::span<double> out,
                     bool extrapolate = false);

// As above with horizontal wrap, the native behavior for panoramas.
bool sample_bilinear_wrap(const Panorama& img, double x, double y,
                          std::span<double> out);

// Adds `pad` columns on each side, copied cyclically from the opposite edge.
Panorama wrap_pad(const Panorama& img, int pad);

// Cyclic horizontal shift: out(x) = in(x - shift).
Panorama shift_columns(const Panorama& img, int shift);

// Copies `count` columns starting at `first` (cyclic source index).
Panorama extract_columns(const Panorama& img, int first, int count);

struct Kernel {
  int size = 1;                 // odd
  std::vector<double> weights;  // size * size, row-major

  static Kernel identity(int size);
};

// Per-channel same-padded convolution (correlation form). Cyclic images are
// wrap-padded horizontally, bounded images zero-padded; rows are always
// zero-padded. Output is ceil(H / stride) x (W / stride).
Panorama conv2d_wrap(const Panorama& img, const Kernel& kernel, int stride);

// Level s has size (H / 2^s, W / 2^s); each level is the 2x2 box average of
// the previous one.
std::vector<Panorama> downsample_pyramid(const Panorama& img, int scales);

// One 2x2 box-average step; a coarse depth is the mean of its valid children
// and is invalid when none are valid.
DepthMap downsample_depth(const DepthMap& depth);
std::vector<DepthMap> depth_pyramid(const DepthMap& depth, int scales);
ExplainabilityMask downsample_mask(const ExplainabilityMask& mask);

// Area (box-integral) resampling to an arbitrary size.
Panorama resize_area(const Panorama& img, int out_height, int out_width);

}  // namespace cylpano

#endif  // CYLPANO_PANORAMA_HPP_
