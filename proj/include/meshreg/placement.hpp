#pragma once

#include <vector>

#include "meshreg/core.hpp"
#include "meshreg/dtransform.hpp"
#include "meshreg/pu_model.hpp"
#include "meshreg/raster.hpp"

namespace meshreg {

struct PlacementConfig {
    double spacing = 6.0;      // d, pixels between patch centers / contour samples
    double base_radius = 20.0; // r, patch radius in regular mode
    double rho = 2.0;          // minimum adaptive radius = rho * spacing
    double kappa = 2.0;        // adaptive radius scale on the target distance
    double alpha = 1.0;        // patch influence
};

/// Uniform grid of patches at spacing d, extended one step past the last pixel
/// when the grid does not land on it, so supports cover the whole domain.
/// 150x150 with d=6 yields a 26x26 grid.
std::vector<Patch> regular_patches(int width, int height, const PlacementConfig& config);

/// Walks each 8-connected contour component (axis steps count 1, diagonal
/// steps sqrt(2)) and emits points every `d` of arc length along the walk.
/// The walk starts at the component's lexicographically smallest pixel and
/// spans branches depth-first, so every component yields at least one sample.
std::vector<Vec2> contour_arc_samples(const Image& edges, double d);

/// One patch per contour sample with radius max(rho*d, kappa * Pi_D(sample)).
std::vector<Patch> adaptive_patches(const Image& edges, const DistanceField& dt_target,
                                    const PlacementConfig& config);

}  // namespace meshreg
