#pragma once

#include <string>
#include <vector>

#include "meshreg/core.hpp"
#include "meshreg/raster.hpp"

namespace meshreg {

/// Unsigned Euclidean distance transform of a binary edge map, together with
/// the edge map it came from. dist is zero exactly on contour pixels and the
/// exact Euclidean distance to the nearest contour pixel elsewhere.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<double> dist;
    Image source;

    double at(int x, int y) const { return dist[static_cast<size_t>(y) * width + x]; }
    bool same_shape(const Image& img) const {
        return width == img.width && height == img.height;
    }
};

/// Exact Euclidean distance transform via the two-pass lower-envelope algorithm
/// on squared distances (each pass is a 1-D transform over parabolas).
/// Throws RegistrationError("no contour pixels") if the map is empty.
DistanceField compute_distance_transform(const Image& edges);

/// Gradient of the distance field at a continuous position: per-pixel central
/// differences, bilinearly interpolated. No normalization is applied. `pos`
/// must lie in [1, width-2] x [1, height-2]; otherwise throws
/// std::out_of_range("gradient out of bounds").
Vec2 sample_gradient(const DistanceField& field, Vec2 pos);

/// Row-major CSV dump, 6 decimal places, one row per grid row.
std::string distance_field_csv(const DistanceField& field);

}  // namespace meshreg
