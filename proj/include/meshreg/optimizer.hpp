#pragma once

#include <string>
#include <vector>

#include "meshreg/core.hpp"
#include "meshreg/metrics.hpp"
#include "meshreg/placement.hpp"
#include "meshreg/pu_model.hpp"
#include "meshreg/raster.hpp"

namespace meshreg {

enum class PlacementMode { regular, adaptive };

PlacementMode placement_mode_from_string(const std::string& name);
std::string to_string(PlacementMode mode);

struct RegistrationConfig {
    double lambda = 0.001;  // consistency weight
    int basis_order = 1;
    PlacementMode placement = PlacementMode::regular;
    PlacementConfig patch;  // regular defaults d=6, r=20; adaptive runs use d=10
    int pyramid_levels = 3;
    int max_iters = 200;        // per level
    double grad_tol = 1e-4;     // max coefficient-gradient magnitude
    double energy_rel_tol = 1e-6;
    double armijo_c = 1e-4;     // sufficient-decrease factor
    double step_shrink = 0.5;
    int max_line_search = 40;
    int threads = 1;            // capped by MESHREG_THREADS in the CLI
    float edge_threshold = 0.5f;  // post-warp re-binarization

    void validate() const;
};

/// Dense displacement blended from a meshless model; u is zero wherever no
/// patch covers the pixel.
struct DeformationField {
    int width = 0;
    int height = 0;
    std::vector<Vec2> u;
    std::vector<uint8_t> covered;

    Vec2 at(int x, int y) const { return u[static_cast<size_t>(y) * width + x]; }
    double max_norm() const;
};

struct IterationRecord {
    double e_data = 0.0;
    double e_cons = 0.0;
    double e_total = 0.0;
};

struct LevelTrace {
    int level = 0;  // 0 = finest
    int width = 0;
    int height = 0;
    int iterations = 0;
    std::string stop_reason;
    std::vector<IterationRecord> trace;  // entry 0 is the starting state
};

struct RegistrationReport {
    std::vector<LevelTrace> levels;  // coarsest first, in processing order
    DistanceStats final_stats;
    int total_iterations = 0;
    long long gradient_pixel_domain = 0;  // finest-level support pixels per gradient sweep
    double wall_time_sec = 0.0;           // console only; kept out of report.json
};

struct RegistrationResult {
    MeshlessModel model;  // finest-level model
    DeformationField field;
    RegistrationReport report;
};

/// Backward-mapped bilinear warp: output(x) = input(x + u(x)); samples outside
/// the image read as zero. A zero field copies the image bit-exactly.
Image warp_image(const Image& image, const DeformationField& field);

/// Binary threshold: 1 iff intensity >= threshold.
Image detect_edges(const Image& image, float threshold = 0.5f);

/// Factor-2 box-filtered downsampling chain, finest first. Throws if the
/// coarsest level would fall under 16x16.
std::vector<Image> build_pyramid(const Image& image, int levels);

/// Blends the model's local fields into a dense deformation field.
DeformationField blend_field(const MeshlessModel& model);

/// Multi-scale registration of the source contour image onto the target.
/// Coefficients start at zero on the coarsest level and transfer across
/// levels; each level runs quasi-Newton descent on E^d + lambda*E^c with a
/// backtracking line search, so the recorded energy trace never increases.
RegistrationResult register_shapes(const Image& source, const Image& target,
                                   const RegistrationConfig& config);

std::string report_json(const RegistrationReport& report);
std::string field_csv(const DeformationField& field);

}  // namespace meshreg
