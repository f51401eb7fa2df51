// Copyright 2026 The dualgate Authors
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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "dualgate/distort.hpp"
#include "dualgate/error.hpp"

#ifdef DUALGATE_HAVE_PNG
#include <png.h>
#endif

namespace dualgate {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

bool has_suffix(const std::string& path, std::string_view suffix) {
  if (path.size() < suffix.size()) return false;
  std::string tail = path.substr(path.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == suffix;
}

PixelBuffer from_bytes(int w, int h, const std::vector<std::uint8_t>& bytes) {
  std::vector<double> samples(bytes.size());
  std::transform(bytes.begin(), bytes.end(), samples.begin(),
                 [](std::uint8_t b) { return b / 255.0; });
  return PixelBuffer(w, h, std::move(samples));
}

std::vector<std::uint8_t> to_bytes(const PixelBuffer& buf) {
  std::vector<std::uint8_t> bytes(buf.size());
  auto s = buf.samples();
  std::transform(s.begin(), s.end(), bytes.begin(), to_byte);
  return bytes;
}

// Skips whitespace and '#' comments in a PPM header.
int read_ppm_int(std::istream& in, const std::string& path) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) throw IoError(path, "malformed PPM header");
  return v;
}

PixelBuffer read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P6") throw IoError(path, "not a binary PPM (P6) file");
  const int w = read_ppm_int(in, path);
  const int h = read_ppm_int(in, path);
  const int maxval = read_ppm_int(in, path);
  if (w <= 0 || h <= 0 || maxval != 255) throw IoError(path, "unsupported PPM geometry or depth");
  in.get();
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw IoError(path, "truncated PPM data");
  return from_bytes(w, h, bytes);
}

void write_ppm(const std::string& path, const PixelBuffer& buf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "P6\n" << buf.width() << " " << buf.height() << "\n255\n";
  const auto bytes = to_bytes(buf);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path, "write failed");
}

#ifdef DUALGATE_HAVE_PNG
PixelBuffer read_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError(path, std::string("png: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(path, std::string("png: ") + image.message);
  }
  return from_bytes(static_cast<int>(image.width), static_cast<int>(image.height), bytes);
}

void write_png(const std::string& path, const PixelBuffer& buf) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(buf.width());
  image.height = static_cast<png_uint_32>(buf.height());
  image.format = PNG_FORMAT_RGB;
  const auto bytes = to_bytes(buf);
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError(path, std::string("png: ") + image.message);
  }
}
#endif

}  // namespace

bool png_supported() {
#ifdef DUALGATE_HAVE_PNG
  return true;
#else
  return false;
#endif
}

PixelBuffer read_image(const std::string& path) {
  if (has_suffix(path, ".ppm")) return read_ppm(path);
#ifdef DUALGATE_HAVE_PNG
  if (has_suffix(path, ".png")) return read_png(path);
#endif
  throw IoError(path, "unsupported image format");
}

void write_image(const std::string& path, const PixelBuffer& buf) {
  if (has_suffix(path, ".ppm")) return write_ppm(path, buf);
#ifdef DUALGATE_HAVE_PNG
  if (has_suffix(path, ".png")) return write_png(path, buf);
#endif
  throw IoError(path, "unsupported image format");
}

}  // namespace dualgate
