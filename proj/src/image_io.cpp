// Copyright 2026 The KMN-VOS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "kmn/error.hpp"
#include "kmn/image.hpp"

namespace kmn {
namespace {

struct PnmHeader {
  std::size_t width;
  std::size_t height;
};

// Skips whitespace and '#' comments between header tokens.
void skip_separators(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

std::size_t read_header_number(std::istream& in, const std::filesystem::path& path) {
  skip_separators(in);
  std::size_t v = 0;
  if (!(in >> v)) fail(ErrorCode::Format, path.string() + ": malformed PNM header");
  return v;
}

PnmHeader read_header(std::istream& in, const std::filesystem::path& path, const char* magic) {
  char m[2] = {0, 0};
  in.read(m, 2);
  if (!in || m[0] != magic[0] || m[1] != magic[1])
    fail(ErrorCode::Format, path.string() + ": expected " + magic + " magic");
  PnmHeader h{read_header_number(in, path), read_header_number(in, path)};
  const std::size_t maxval = read_header_number(in, path);
  if (maxval != 255) fail(ErrorCode::Format, path.string() + ": only maxval 255 is supported");
  if (h.width == 0 || h.height == 0) fail(ErrorCode::Format, path.string() + ": zero image dimension");
  // Exactly one whitespace byte separates the header from the raster.
  if (!std::isspace(in.get())) fail(ErrorCode::Format, path.string() + ": malformed PNM header");
  return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

template <typename Buffer>
void read_raster(std::istream& in, Buffer& buf, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size())
    fail(ErrorCode::Format, path.string() + ": truncated raster");
}

}  // namespace

std::uint8_t LabelMask::max_label() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

Image read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  auto h = read_header(in, path, "P6");
  Image img(h.width, h.height);
  read_raster(in, img.rgb, path);
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  auto out = open_out(path);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

LabelMask read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  auto h = read_header(in, path, "P5");
  LabelMask mask(h.width, h.height);
  read_raster(in, mask.labels, path);
  return mask;
}

void write_pgm(const std::filesystem::path& path, const LabelMask& mask) {
  auto out = open_out(path);
  out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(mask.labels.data()), static_cast<std::streamsize>(mask.labels.size()));
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace kmn
