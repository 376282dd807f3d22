#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fusionloc {

// Row-major interleaved 8-bit image (RGB order for 3 channels).
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Row-major 16-bit single-channel image (depth PNGs).
struct ImageU16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;

  std::uint16_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint16_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

// PNG I/O. Throws IngestionError on parse failures and IoError on
// filesystem failures; file names are included in the message.
ImageU8 load_png_u8(const std::string& path);
ImageU16 load_png_u16(const std::string& path);
void save_png(const std::string& path, const ImageU8& image);
void save_png(const std::string& path, const ImageU16& image);

// Bilinear resize of an 8-bit image.
ImageU8 resize_bilinear(const ImageU8& image, int out_width, int out_height);

ImageU8 crop(const ImageU8& image, int x0, int y0, int w, int h);

}  // namespace fusionloc
