#include "morphkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "morphkit/error.hpp"

namespace morphkit {
namespace {

double cubic_weight(double x) {
  // Keys kernel, a = -0.5
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

// Separable resampling weights for one axis; widens the kernel when
// downscaling so every source pixel contributes.
struct AxisTaps {
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
};

AxisTaps axis_taps(int src, int dst) {
  AxisTaps taps;
  const double scale = double(src) / double(dst);
  const double support = scale > 1.0 ? 2.0 * scale : 2.0;
  const double stretch = scale > 1.0 ? scale : 1.0;
  for (int i = 0; i < dst; ++i) {
    double centre = (i + 0.5) * scale - 0.5;
    int lo = static_cast<int>(std::floor(centre - support)) + 1;
    int hi = static_cast<int>(std::floor(centre + support));
    std::vector<double> w;
    double total = 0.0;
    for (int s = lo; s <= hi; ++s) {
      double v = cubic_weight((s - centre) / stretch);
      w.push_back(v);
      total += v;
    }
    for (auto& v : w) v /= total;
    taps.first.push_back(lo);
    taps.weights.push_back(std::move(w));
  }
  return taps;
}

}  // namespace

Image load_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    std::string why = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::io, "cannot read image " + path + ": " + why);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    std::string why = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::io, "cannot decode image " + path + ": " + why);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height));
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = buffer[i] / 255.0f;
  return img;
}

void save_png(const Image& image, const std::string& path) {
  if (image.width <= 0 || image.height <= 0) throw Error(ErrorCode::invalid_argument, "empty image");
  std::vector<unsigned char> buffer(image.rgb.size());
  for (std::size_t i = 0; i < buffer.size(); ++i)
    buffer[i] = static_cast<unsigned char>(std::lround(std::clamp(image.rgb[i], 0.0f, 1.0f) * 255.0f));
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    std::string why = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::io, "cannot write image " + path + ": " + why);
  }
}

Image resize_bicubic(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::invalid_argument, "resize to empty image");
  if (image.width == width && image.height == height) return image;
  const AxisTaps xt = axis_taps(image.width, width);
  const AxisTaps yt = axis_taps(image.height, height);

  // Horizontal pass then vertical, edges clamped.
  std::vector<double> tmp(static_cast<std::size_t>(width) * image.height * 3, 0.0);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < width; ++x)
      for (std::size_t k = 0; k < xt.weights[x].size(); ++k) {
        int sx = std::clamp(xt.first[x] + static_cast<int>(k), 0, image.width - 1);
        for (int c = 0; c < 3; ++c)
          tmp[(static_cast<std::size_t>(y) * width + x) * 3 + c] += xt.weights[x][k] * image.at(sx, y, c);
      }
  Image out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < yt.weights[y].size(); ++k) {
          int sy = std::clamp(yt.first[y] + static_cast<int>(k), 0, image.height - 1);
          acc += yt.weights[y][k] * tmp[(static_cast<std::size_t>(sy) * width + x) * 3 + c];
        }
        out.at(x, y, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
  return out;
}

Image contact_sheet(std::span<const Image> frames) {
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "contact sheet of no frames");
  int width = 0;
  const int height = frames.front().height;
  for (const auto& f : frames) {
    if (f.height != height) throw Error(ErrorCode::invalid_argument, "frames differ in height");
    width += f.width;
  }
  Image sheet(width, height);
  int ox = 0;
  for (const auto& f : frames) {
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < f.width; ++x)
        for (int c = 0; c < 3; ++c) sheet.at(ox + x, y, c) = f.at(x, y, c);
    ox += f.width;
  }
  return sheet;
}

Image quantize_8bit(const Image& image) {
  Image out = image;
  for (auto& v : out.rgb) v = static_cast<float>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) / 255.0f;
  return out;
}

double max_abs_diff(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(ErrorCode::shape_mismatch, "images differ in size");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) m = std::max(m, double(std::abs(a.rgb[i] - b.rgb[i])));
  return m;
}

double rms_diff(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(ErrorCode::shape_mismatch, "images differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    double d = double(a.rgb[i]) - b.rgb[i];
    s += d * d;
  }
  return a.rgb.empty() ? 0.0 : std::sqrt(s / double(a.rgb.size()));
}

}  // namespace morphkit
