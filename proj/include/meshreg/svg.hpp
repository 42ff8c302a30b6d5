#pragma once

#include <string>

#include "meshreg/chamfer.hpp"
#include "meshreg/optimizer.hpp"
#include "meshreg/raster.hpp"

namespace meshreg {

/// Contour overlay: source red, target blue, deformed source green.
std::string overlay_svg(const Image& source, const Image& target, const Image& deformed);

/// Deformed regular grid visualizing the field (lines every `spacing` pixels).
std::string grid_svg(const DeformationField& field, double spacing = 10.0);

/// Arrow per nonzero gradient vector, over the contour pixels.
std::string quiver_svg(const GradientField& field, const Image& contour);

}  // namespace meshreg
