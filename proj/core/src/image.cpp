#include "fusionloc/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "fusionloc/errors.hpp"

namespace fusionloc {

ImageU8 load_png_u8(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) {
    throw IngestionError("cannot read image " + path);
  }
  if (m.depth() != CV_8U) {
    throw IngestionError("expected 8-bit image: " + path);
  }
  ImageU8 img;
  img.width = m.cols;
  img.height = m.rows;
  img.channels = m.channels();
  img.data.resize(static_cast<std::size_t>(m.cols) * m.rows * m.channels());
  if (m.channels() == 3) {
    cv::Mat rgb;
    cv::cvtColor(m, rgb, cv::COLOR_BGR2RGB);
    std::memcpy(img.data.data(), rgb.data, img.data.size());
  } else if (m.channels() == 1) {
    std::memcpy(img.data.data(), m.data, img.data.size());
  } else {
    throw IngestionError("unsupported channel count in " + path);
  }
  return img;
}

ImageU16 load_png_u16(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) {
    throw IngestionError("cannot read image " + path);
  }
  if (m.depth() != CV_16U || m.channels() != 1) {
    throw IngestionError("expected 16-bit grayscale PNG: " + path);
  }
  ImageU16 img;
  img.width = m.cols;
  img.height = m.rows;
  img.data.resize(static_cast<std::size_t>(m.cols) * m.rows);
  std::memcpy(img.data.data(), m.data, img.data.size() * sizeof(std::uint16_t));
  return img;
}

void save_png(const std::string& path, const ImageU8& image) {
  cv::Mat m;
  if (image.channels == 3) {
    const cv::Mat rgb(image.height, image.width, CV_8UC3,
                      const_cast<std::uint8_t*>(image.data.data()));
    cv::cvtColor(rgb, m, cv::COLOR_RGB2BGR);
  } else if (image.channels == 1) {
    m = cv::Mat(image.height, image.width, CV_8UC1,
                const_cast<std::uint8_t*>(image.data.data()));
  } else {
    throw InvalidInputError("save_png: unsupported channel count");
  }
  if (!cv::imwrite(path, m)) {
    throw IoError("cannot write image " + path);
  }
}

void save_png(const std::string& path, const ImageU16& image) {
  const cv::Mat m(image.height, image.width, CV_16UC1,
                  const_cast<std::uint16_t*>(image.data.data()));
  if (!cv::imwrite(path, m)) {
    throw IoError("cannot write image " + path);
  }
}

ImageU8 resize_bilinear(const ImageU8& image, int out_width, int out_height) {
  if (image.channels != 3 && image.channels != 1) {
    throw InvalidInputError("resize_bilinear: unsupported channel count");
  }
  const int type = image.channels == 3 ? CV_8UC3 : CV_8UC1;
  const cv::Mat src(image.height, image.width, type,
                    const_cast<std::uint8_t*>(image.data.data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(out_width, out_height), 0, 0, cv::INTER_LINEAR);
  ImageU8 out;
  out.width = out_width;
  out.height = out_height;
  out.channels = image.channels;
  out.data.resize(static_cast<std::size_t>(out_width) * out_height * image.channels);
  std::memcpy(out.data.data(), dst.data, out.data.size());
  return out;
}

ImageU8 crop(const ImageU8& image, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || x0 + w > image.width || y0 + h > image.height) {
    throw InvalidInputError("crop: window outside the image");
  }
  ImageU8 out;
  out.width = w;
  out.height = h;
  out.channels = image.channels;
  out.data.resize(static_cast<std::size_t>(w) * h * image.channels);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* src =
        image.data.data() +
        (static_cast<std::size_t>(y0 + y) * image.width + x0) * image.channels;
    std::copy_n(src, static_cast<std::size_t>(w) * image.channels,
                out.data.data() + static_cast<std::size_t>(y) * w * image.channels);
  }
  return out;
}

}  // namespace fusionloc
