#include "meshreg/placement.hpp"

#include <algorithm>
#include <cmath>

namespace meshreg {

std::vector<Patch> regular_patches(int width, int height, const PlacementConfig& config) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("empty domain");
    if (config.spacing <= 0.0 || config.base_radius <= 0.0)
        throw std::invalid_argument("placement spacing and radius must be positive");

    auto axis_count = [&](int extent) {
        return static_cast<int>(std::ceil((extent - 1) / config.spacing)) + 1;
    };
    const int nx = axis_count(width);
    const int ny = axis_count(height);

    std::vector<Patch> out;
    out.reserve(static_cast<size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            Patch p;
            p.center = Vec2(ix * config.spacing, iy * config.spacing);
            p.radius = config.base_radius;
            p.influence = config.alpha;
            out.push_back(p);
        }
    }
    return out;
}

namespace {

// depth-first walk emitting samples every `d` of accumulated arc length,
// spacing preserved per branch; pixels are claimed when the walk reaches them
// so a closed curve is traced as one path instead of competing frontiers
struct ContourWalker {
    const Image& edges;
    Raster<uint8_t> visited;
    std::vector<Vec2>& samples;
    double d;

    ContourWalker(const Image& e, std::vector<Vec2>& s, double d_)
        : edges(e), visited(e.width, e.height, 0), samples(s), d(d_) {}

    void walk_component(int sx, int sy) {
        struct Node {
            int x, y;
            double since_last;  // arc length from the last sample along the tree path
        };
        std::vector<Node> stack;
        stack.push_back({sx, sy, 0.0});
        bool first = true;

        // axis steps first so straight runs accumulate 1.0 before diagonals;
        // pushed in reverse preference so the preferred direction pops first
        static const int nbx[8] = {1, -1, -1, 1, 0, -1, 0, 1};
        static const int nby[8] = {1, 1, -1, -1, -1, 0, 1, 0};
        static const double nbd[8] = {1.4142135623730951, 1.4142135623730951,
                                      1.4142135623730951, 1.4142135623730951, 1, 1, 1, 1};

        while (!stack.empty()) {
            Node cur = stack.back();
            stack.pop_back();
            if (visited.at(cur.x, cur.y)) continue;
            visited.at(cur.x, cur.y) = 1;
            double acc = cur.since_last;
            if (first || acc >= d) {
                samples.push_back(Vec2(cur.x, cur.y));
                acc = 0.0;
                first = false;
            }
            for (int k = 0; k < 8; ++k) {
                int nx = cur.x + nbx[k];
                int ny = cur.y + nby[k];
                if (!edges.in_bounds(nx, ny) || visited.at(nx, ny) ||
                    !is_contour(edges.at(nx, ny)))
                    continue;
                stack.push_back({nx, ny, acc + nbd[k]});
            }
        }
    }
};

}  // namespace

std::vector<Vec2> contour_arc_samples(const Image& edges, double d) {
    if (d <= 0.0) throw std::invalid_argument("sample spacing must be positive");
    if (count_contour_pixels(edges) == 0) throw RegistrationError("no contour pixels");

    std::vector<Vec2> samples;
    ContourWalker walker(edges, samples, d);
    // lexicographic (y, then x) scan finds each component's smallest pixel first
    for (int y = 0; y < edges.height; ++y)
        for (int x = 0; x < edges.width; ++x)
            if (is_contour(edges.at(x, y)) && !walker.visited.at(x, y))
                walker.walk_component(x, y);
    return samples;
}

std::vector<Patch> adaptive_patches(const Image& edges, const DistanceField& dt_target,
                                    const PlacementConfig& config) {
    if (!dt_target.same_shape(edges))
        throw std::invalid_argument("adaptive_patches: raster dimensions differ");
    std::vector<Vec2> samples = contour_arc_samples(edges, config.spacing);
    const double r_min = config.rho * config.spacing;

    std::vector<Patch> out;
    out.reserve(samples.size());
    for (const Vec2& s : samples) {
        Patch p;
        p.center = s;
        p.radius = std::max(r_min, config.kappa *
                                       dt_target.at(static_cast<int>(s.x),
                                                    static_cast<int>(s.y)));
        p.influence = config.alpha;
        out.push_back(p);
    }
    return out;
}

}  // namespace meshreg
