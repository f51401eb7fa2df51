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
#include <cmath>
#include <csetjmp>
#include <cstdlib>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dualgate/distort.hpp"

#ifdef DUALGATE_HAVE_JPEG
#include <jpeglib.h>
#endif

namespace dualgate {

#ifdef DUALGATE_HAVE_JPEG

namespace {

struct ErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_error(j_common_ptr info) {
  auto* err = reinterpret_cast<ErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

// In-memory encode/decode through libjpeg with 4:2:0 chroma subsampling
// (the library default).
class LibjpegCodec final : public ImageCodec {
 public:
  std::string name() const override { return "libjpeg"; }

  PixelBuffer jpeg_round_trip(const PixelBuffer& buf, int quality) const override {
    const auto encoded = encode(buf, quality);
    return decode(encoded);
  }

 private:
  static std::vector<unsigned char> encode(const PixelBuffer& buf, int quality) {
    std::vector<unsigned char> rgb(buf.size());
    auto s = buf.samples();
    for (std::size_t i = 0; i < s.size(); ++i) {
      rgb[i] = static_cast<unsigned char>(std::lround(std::clamp(s[i], 0.0, 1.0) * 255.0));
    }

    jpeg_compress_struct cinfo{};
    ErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = on_error;
    unsigned char* out = nullptr;
    unsigned long out_size = 0;
    if (setjmp(err.jump)) {
      jpeg_destroy_compress(&cinfo);
      std::free(out);
      throw std::runtime_error(err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &out, &out_size);
    cinfo.image_width = static_cast<JDIMENSION>(buf.width());
    cinfo.image_height = static_cast<JDIMENSION>(buf.height());
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const auto stride = static_cast<std::size_t>(buf.width()) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
      JSAMPROW row = rgb.data() + cinfo.next_scanline * stride;
      jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::vector<unsigned char> encoded(out, out + out_size);
    std::free(out);
    return encoded;
  }

  static PixelBuffer decode(const std::vector<unsigned char>& encoded) {
    jpeg_decompress_struct cinfo{};
    ErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = on_error;
    if (setjmp(err.jump)) {
      jpeg_destroy_decompress(&cinfo);
      throw std::runtime_error(err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, encoded.data(), static_cast<unsigned long>(encoded.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    const auto stride = static_cast<std::size_t>(w) * 3;
    std::vector<unsigned char> rgb(stride * static_cast<std::size_t>(h));
    while (cinfo.output_scanline < cinfo.output_height) {
      JSAMPROW row = rgb.data() + cinfo.output_scanline * stride;
      jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);

    std::vector<double> samples(rgb.size());
    for (std::size_t i = 0; i < rgb.size(); ++i) samples[i] = rgb[i] / 255.0;
    return PixelBuffer(w, h, std::move(samples));
  }
};

}  // namespace

std::unique_ptr<ImageCodec> make_default_codec() { return std::make_unique<LibjpegCodec>(); }

#else

std::unique_ptr<ImageCodec> make_default_codec() { return nullptr; }

#endif

}  // namespace dualgate
