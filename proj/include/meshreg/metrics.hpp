#pragma once

#include <string>

#include "meshreg/raster.hpp"

namespace meshreg {

struct DistanceStats {
    double mean = 0.0;
    double max = 0.0;
    double variance = 0.0;  // population variance of the pooled set
    long long n_points = 0;
};

/// Mutual contour distance: pools the distances of a's contour pixels to b
/// with those of b's contour pixels to a, then reports mean, max, and
/// population variance of the pooled set. Symmetric in its arguments.
DistanceStats mutual_distance_stats(const Image& a, const Image& b);

std::string stats_json(const DistanceStats& stats);
std::string stats_csv_row(const DistanceStats& stats);

}  // namespace meshreg
