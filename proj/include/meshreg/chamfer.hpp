#pragma once

#include <string>
#include <vector>

#include "meshreg/core.hpp"
#include "meshreg/dtransform.hpp"
#include "meshreg/pu_model.hpp"
#include "meshreg/raster.hpp"

namespace meshreg {

struct EnergyBreakdown {
    double forward = 0.0;   // E^f / A_S
    double backward = 0.0;  // E^b / A_D
    double total = 0.0;
    double a_s = 0.0;  // contour mass of the warped source
    double a_d = 0.0;  // contour mass of the target
};

/// Pointwise chamfer-matching gradient over the pixel grid.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<Vec2> vectors;

    Vec2 at(int x, int y) const { return vectors[static_cast<size_t>(y) * width + x]; }
    double max_norm() const;
};

/// Symmetric chamfer energy: forward = (1/A_S) sum S(x) Pi_D(x)^2, backward =
/// (1/A_D) sum D(x) Pi_S(x)^2, with A the contour masses. Warped-source values
/// in (0,1) are admitted as weights; the target map is treated as binary.
/// Throws RegistrationError if either contour mass is zero.
EnergyBreakdown data_energy(const Image& warped_source, const Image& target,
                            const DistanceField& dt_target, const DistanceField& dt_warped);

/// J(x) = -Pi_D grad(Pi_D) S(x+u) + Pi_S grad(Pi_S) D(x). Normalizers and the
/// factor 2 are folded into the step length. Zero wherever both indicator
/// terms vanish, and at the 1-pixel border margin where the distance gradient
/// is not sampled.
GradientField chamfer_gradient_field(const Image& warped_source, const Image& target,
                                     const DistanceField& dt_target,
                                     const DistanceField& dt_warped);

/// Projection of the gradient field onto patch p's coefficients:
/// sum over support pixels of r_p(x) * phi_p(x) outer J(x).
std::vector<Vec2> data_gradient(const GradientField& field, const MeshlessModel& model,
                                int p_idx);

/// Gradient for all patches, flattened patch-major as [patch][basis](u,v).
/// Patch slots are independent, so the computation may be split across
/// `threads` workers without affecting the result.
void data_gradient_all(const GradientField& field, const MeshlessModel& model,
                       std::vector<double>& out, int threads);

/// CSV rows "x,y,jx,jy" for nonzero vectors, 6 decimals.
std::string gradient_field_csv(const GradientField& field);

}  // namespace meshreg
