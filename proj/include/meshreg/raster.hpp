#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace meshreg {

/// Row-major 2-D grid. (0,0) is the top-left pixel, x runs along a row.
template <typename T>
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Raster() = default;
    Raster(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    T& at(int x, int y) { return data[index(x, y)]; }
    const T& at(int x, int y) const { return data[index(x, y)]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    size_t size() const { return data.size(); }
    bool same_shape(const Raster& o) const { return width == o.width && height == o.height; }
};

/// Grayscale raster with intensities in [0,1]. Binary edge maps hold exactly
/// 0.0f / 1.0f; interpolated (warped) maps may hold intermediate values.
using Image = Raster<float>;
using EdgeMap = Image;

inline bool is_contour(float v) { return v >= 0.5f; }

inline int count_contour_pixels(const Image& img) {
    int n = 0;
    for (float v : img.data) n += is_contour(v) ? 1 : 0;
    return n;
}

}  // namespace meshreg
