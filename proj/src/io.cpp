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

#include "cylpano/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cylpano/error.hpp"

namespace cylpano {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& path) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw IoError("truncated header in '" + path + "'");
  return tok;
}

int header_int(std::istream& in, const std::string& path) {
  const std::string tok = header_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed header value '" + tok + "' in '" + path + "'");
  }
}

std::string magic_of(const std::string& path) {
  std::ifstream in = open_in(path);
  char m[2] = {0, 0};
  in.read(m, 2);
  if (!in) throw IoError("'" + path + "' is too short to be an image");
  return std::string(m, 2);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) {
                      return std::tolower(static_cast<unsigned char>(a)) == b;
                    });
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace

Panorama read_pnm(const std::string& path) {
  std::ifstream in = open_in(path);
  const std::string magic = header_token(in, path);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw IoError("'" + path + "' is not a binary PGM/PPM file");
  }
  const int w = header_int(in, path);
  const int h = header_int(in, path);
  const int maxval = header_int(in, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw IoError("unsupported PNM geometry or depth in '" + path + "'");
  }
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError("truncated pixel data in '" + path + "'");
  std::vector<double> data(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) data[i] = raw[i] / double(maxval);
  return Panorama(h, w, channels, std::move(data));
}

void write_pnm(const std::string& path, const Panorama& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw InvalidArgument("PNM output needs 1 or 3 channels");
  }
  std::ofstream out = open_out(path);
  out << (img.channels() == 1 ? "P5" : "P6") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.data().size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = std::clamp(img.data()[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

Panorama read_pfm(const std::string& path) {
  std::ifstream in = open_in(path);
  const std::string magic = header_token(in, path);
  int channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw IoError("'" + path + "' is not a PFM file");
  }
  const int w = header_int(in, path);
  const int h = header_int(in, path);
  const std::string scale_tok = header_token(in, path);
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw IoError("malformed PFM scale in '" + path + "'");
  }
  if (w <= 0 || h <= 0 || scale == 0.0) {
    throw IoError("invalid PFM header in '" + path + "'");
  }
  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);

  const std::size_t row_len = static_cast<std::size_t>(w) * channels;
  std::vector<float> row(row_len);
  std::vector<double> data(row_len * h);
  for (int r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row_len * sizeof(float)));
    if (!in) throw IoError("truncated PFM data in '" + path + "'");
    const int y = h - 1 - r;  // bottom-up storage
    for (std::size_t i = 0; i < row_len; ++i) {
      float v = row[i];
      if (swap) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = byteswap32(bits);
        std::memcpy(&v, &bits, 4);
      }
      data[static_cast<std::size_t>(y) * row_len + i] = v;
    }
  }
  return Panorama(h, w, channels, std::move(data));
}

void write_pfm(const std::string& path, const Panorama& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw InvalidArgument("PFM output needs 1 or 3 channels");
  }
  std::ofstream out = open_out(path);
  out << (img.channels() == 1 ? "Pf" : "PF") << "\n"
      << img.width() << " " << img.height() << "\n-1.0\n";
  const bool swap = std::endian::native != std::endian::little;
  const std::size_t row_len =
      static_cast<std::size_t>(img.width()) * img.channels();
  std::vector<float> row(row_len);
  for (int y = img.height() - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row_len; ++i) {
      float v = static_cast<float>(img.data()[y * row_len + i]);
      if (swap) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = byteswap32(bits);
        std::memcpy(&v, &bits, 4);
      }
      row[i] = v;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row_len * sizeof(float)));
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

Panorama read_image(const std::string& path) {
  const std::string magic = magic_of(path);
  if (magic == "Pf" || magic == "PF") return read_pfm(path);
  return read_pnm(path);
}

void write_image(const std::string& path, const Panorama& img) {
  if (ends_with(path, ".pfm")) {
    write_pfm(path, img);
  } else {
    write_pnm(path, img);
  }
}

DepthMap read_depth(const std::string& path) {
  const Panorama img = read_pfm(path);
  if (img.channels() != 1) {
    throw IoError("depth map '" + path + "' must have a single channel");
  }
  const auto d = img.data();
  return DepthMap(img.height(), img.width(),
                  std::vector<double>(d.begin(), d.end()));
}

void write_depth(const std::string& path, const DepthMap& depth) {
  Panorama img(depth.height(), depth.width(), 1);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      img.at(y, x) = depth.valid(y, x) ? depth.depth(y, x) : 0.0;
    }
  }
  write_pfm(path, img);
}

ExplainabilityMask read_mask(const std::string& path) {
  const Panorama img = read_pfm(path);
  if (img.channels() != 1) {
    throw IoError("mask '" + path + "' must have a single channel");
  }
  const auto d = img.data();
  try {
    return ExplainabilityMask(img.height(), img.width(),
                              std::vector<double>(d.begin(), d.end()));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("mask '" + path + "': " + e.what());
  }
}

void write_mask(const std::string& path, const Mask& mask) {
  Panorama img(mask.height(), mask.width(), 1);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) img.at(y, x) = mask(y, x) ? 1.0 : 0.0;
  }
  write_pfm(path, img);
}

std::vector<TrajectoryRecord> read_trajectory(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<TrajectoryRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    TrajectoryRecord rec;
    std::array<double, 6> v{};
    if (!(ls >> rec.frame_id)) continue;  // blank line
    for (double& x : v) {
      if (!(ls >> x)) {
        std::ostringstream os;
        os << path << ":" << line_no << ": expected 'id tx ty tz rx ry rz'";
        throw IoError(os.str());
      }
    }
    std::string extra;
    if (ls >> extra) {
      std::ostringstream os;
      os << path << ":" << line_no << ": unexpected trailing field '" << extra
         << "'";
      throw IoError(os.str());
    }
    rec.pose = Pose::from_vector(v);
    records.push_back(rec);
  }
  return records;
}

void write_trajectory(const std::string& path,
                      const std::vector<TrajectoryRecord>& records) {
  std::ofstream out = open_out(path);
  out << "# id tx ty tz rx ry rz\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const TrajectoryRecord& r : records) {
    out << r.frame_id;
    for (double v : r.pose.to_vector()) out << " " << v;
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "iter,pixel,smooth,explain,total,step\n";
  os << std::setprecision(17);
  for (const TraceRow& r : trace) {
    os << r.iter << "," << r.pixel << "," << r.smooth << "," << r.explain
       << "," << r.total << "," << r.step << "\n";
  }
}

}  // namespace cylpano
