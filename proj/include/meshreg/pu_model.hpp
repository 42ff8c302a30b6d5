#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "meshreg/core.hpp"
#include "meshreg/raster.hpp"

namespace meshreg {

/// Circular local domain carrying one local polynomial model. The weight
/// support is the closed disk of radius 1.5*radius about center.
struct Patch {
    Vec2 center;
    double radius = 0.0;
    double influence = 1.0;

    double support_radius() const { return 1.5 * radius; }
};

/// 2nd-order B-spline weight profile:
///   3/4 - r^2          for r < 1/2
///   (1/2)(3/2 - r)^2   for 1/2 <= r <= 3/2
///   0                  for r > 3/2
/// Continuous and C^1 at both knots. Throws std::domain_error for negative input.
double bspline_weight(double rnorm);

/// influence * bspline_weight(|x - center| / radius); zero outside the support disk.
double patch_weight(const Patch& patch, Vec2 x);

/// Tensor-product exponent pairs (s,t), s,t in [0,order], in Pascal-triangle
/// order: ascending total order s+t, then smaller |s-t| first, then larger s
/// first. For order 2 the sequence begins (0,0),(1,0),(0,1),(1,1),(2,0),(0,2).
std::vector<std::pair<int, int>> pascal_exponents(int order);

struct MonomialBasis {
    int order = 0;
    std::vector<std::pair<int, int>> exponents;

    static MonomialBasis make(int order);
    int size() const { return static_cast<int>(exponents.size()); }
    /// out[i] = x^{s_i} * y^{t_i}; out must hold size() entries.
    void eval(Vec2 x, double* out) const;
    std::vector<double> eval(Vec2 x) const;
};

/// Local polynomial deformation coefficients; row i pairs the u- and
/// v-coefficients of basis term i (per-unit pixel displacement).
struct LocalModel {
    std::vector<Vec2> coeffs;
};

/// Linear operator re-expressing monomial coefficients after translating the
/// coordinate frame by delta: basis(x+delta) = S^T * basis(x), and coefficients
/// map as d' = S * d. Upper-triangular with unit diagonal under Pascal order.
struct ShiftOperator {
    int n = 0;
    std::vector<double> m;  // row-major n x n

    double at(int r, int c) const { return m[static_cast<size_t>(r) * n + c]; }
    std::vector<Vec2> apply(const std::vector<Vec2>& d) const;
    std::vector<Vec2> apply_transposed(const std::vector<Vec2>& d) const;
    std::vector<double> apply_vector(const std::vector<double>& v) const;  // S * v
};

ShiftOperator shift_operator(const MonomialBasis& basis, Vec2 delta);

/// Meshless deformation model over a pixel domain: patches with index-aligned
/// local models, blended by partition-of-unity weights. Patch geometry is
/// immutable after construction (support rasters and neighbor pairs are
/// precomputed); coefficients are free to change.
class MeshlessModel {
public:
    MeshlessModel() = default;
    MeshlessModel(MonomialBasis basis, std::vector<Patch> patches, int width, int height);

    const MonomialBasis& basis() const { return basis_; }
    const std::vector<Patch>& patches() const { return patches_; }
    int patch_count() const { return static_cast<int>(patches_.size()); }
    int width() const { return width_; }
    int height() const { return height_; }

    std::vector<LocalModel>& locals() { return locals_; }
    const std::vector<LocalModel>& locals() const { return locals_; }

    double weight_sum(int x, int y) const { return weight_sum_[index(x, y)]; }
    bool is_covered(int x, int y) const { return weight_sum_[index(x, y)] > 0.0; }
    const std::vector<uint8_t>& coverage_mask() const { return covered_; }

    /// Pixels inside patch p's support, with their precomputed weights.
    struct Support {
        const int32_t* pixel;
        const double* weight;
        size_t count;
    };
    Support support(int p) const;
    /// Total support-pixel count over all patches (one gradient sweep's domain).
    long long support_pixel_total() const { return static_cast<long long>(cell_pixel_.size()); }

    /// Directed neighbor pair (p,q): weight = alpha_q * w(|p-q|/r_q), shift = S(p-q).
    struct NeighborPair {
        int p;
        int q;
        double weight;
        ShiftOperator shift;
    };
    const std::vector<NeighborPair>& neighbor_pairs() const { return pairs_; }
    /// Pair indices grouped by p, then a parallel grouping by q.
    const std::vector<int>& pairs_of_p(int p) const;
    const std::vector<int>& pairs_of_q(int q) const;

private:
    size_t index(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }
    void build_support_cache();
    void build_pair_cache();

    MonomialBasis basis_;
    std::vector<Patch> patches_;
    std::vector<LocalModel> locals_;
    int width_ = 0;
    int height_ = 0;

    std::vector<double> weight_sum_;
    std::vector<uint8_t> covered_;
    std::vector<int32_t> cell_pixel_;   // patch-major pixel indices
    std::vector<double> cell_weight_;   // matching weights
    std::vector<size_t> patch_offset_;  // size patch_count()+1

    std::vector<NeighborPair> pairs_;
    std::vector<std::vector<int>> pairs_by_p_;
    std::vector<std::vector<int>> pairs_by_q_;
};

/// Partition-of-unity blended displacement at x. Throws
/// std::domain_error("outside patch coverage") where no patch weight is positive.
Vec2 blend(const MeshlessModel& model, Vec2 x);

/// Squared Frobenius distance between d_p and the shift-aligned d_q.
double consistency_pair(const MeshlessModel& model, int p_idx, int q_idx);

/// (1/N) sum over ordered pairs (p,q), q != p, of w_q(|p-q|) * E^c_{p,q}.
double consistency_energy(const MeshlessModel& model);

/// Exact derivative of consistency_energy with respect to d_p, including the
/// terms where p enters a pair as the shifted member.
std::vector<Vec2> consistency_gradient(const MeshlessModel& model, int p_idx);

/// Model JSON: {basis_order, width, height, patches:[{cx,cy,r,alpha}], coeffs:[[...]]}.
std::string model_to_json(const MeshlessModel& model);
MeshlessModel model_from_json(const std::string& json_text);

}  // namespace meshreg
