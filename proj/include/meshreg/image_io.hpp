#pragma once

#include <string>
#include <vector>

#include "meshreg/raster.hpp"

namespace meshreg {

/// Loads an 8-bit grayscale image (binary PGM "P5" or PNG; color PNG is
/// converted to luminance). Intensities are scaled to [0,1].
Image load_image(const std::string& path);

/// Applies the contour threshold to a freshly loaded image. `threshold` is in
/// 8-bit units; a pixel is a contour pixel iff round(v*255) >= threshold.
Image binarize_loaded(const Image& img, int threshold = 128);

void save_pgm(const std::string& path, const Image& img);
void save_png_gray(const std::string& path, const Image& img);
/// rgb holds 3 bytes per pixel, row-major.
void save_png_rgb(const std::string& path, int width, int height,
                  const std::vector<unsigned char>& rgb);

}  // namespace meshreg
