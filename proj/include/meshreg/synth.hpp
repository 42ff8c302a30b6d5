#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshreg/core.hpp"
#include "meshreg/raster.hpp"

namespace meshreg {

enum class ShapeFamily { ellipse, star, polyline };

ShapeFamily shape_family_from_string(const std::string& name);
std::string to_string(ShapeFamily family);

/// Smooth displacement: a translation plus a sum of Gaussian bumps, scaled so
/// the peak displacement magnitude over the domain equals `peak`.
struct BumpField {
    struct Bump {
        Vec2 center;
        Vec2 amplitude;
        double sigma = 1.0;
    };
    std::vector<Bump> bumps;
    Vec2 translate;

    Vec2 eval(Vec2 x) const;
};

struct SynthConfig {
    std::uint64_t seed = 1;
    ShapeFamily family = ShapeFamily::ellipse;
    int size = 150;
    double peak = 10.0;       // bump displacement peak, pixels
    Vec2 translate;           // rigid offset added to the deformation
    double occlude_frac = 0.0;  // fraction of the parameter arc removed from both shapes
};

struct SynthPair {
    Image source;
    Image target;
    BumpField field;
};

/// Deterministic synthetic registration pair: a rasterized parametric contour
/// and its copy deformed by the seeded bump field. The same arc is omitted
/// from both contours when occlusion is requested.
SynthPair make_synth_pair(const SynthConfig& config);

/// Per-pixel ground-truth displacement of the generating field, rows
/// "x,y,ux,uy" with 6 decimals.
std::string synth_field_csv(const BumpField& field, int width, int height);

}  // namespace meshreg
