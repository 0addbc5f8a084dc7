#pragma once

#include <span>
#include <string>

#include "morphkit/types.hpp"

namespace morphkit {

// 8-bit PNG (gray, RGB, palette or with alpha; alpha is dropped).
// Throws ErrorCode::io naming the path.
Image load_png(const std::string& path);
void save_png(const Image& image, const std::string& path);

Image resize_bicubic(const Image& image, int width, int height);

// Frames side by side, left to right.
Image contact_sheet(std::span<const Image> frames);

// Rounds to the 8-bit grid the PNG writer uses.
Image quantize_8bit(const Image& image);

double max_abs_diff(const Image& a, const Image& b);
double rms_diff(const Image& a, const Image& b);

}  // namespace morphkit
