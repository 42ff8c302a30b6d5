#include "meshreg/dtransform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace meshreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared-distance transform: d[q] = min_p (q-p)^2 + f[p].
// Lower envelope of parabolas; v holds parabola apexes, z their boundaries.
void edt_1d(const double* f, int n, double* d, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        double s;
        while (true) {
            int p = v[k];
            if (f[p] == kInf) {
                // q's parabola is everywhere below a parabola at +inf
                --k;
                if (k < 0) break;
                continue;
            }
            s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
                (2.0 * (q - p));
            if (s <= z[k]) {
                --k;
                if (k < 0) break;
            } else {
                break;
            }
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
        } else {
            ++k;
            v[k] = q;
            z[k] = s;
        }
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

DistanceField compute_distance_transform(const Image& edges) {
    const int w = edges.width;
    const int h = edges.height;
    if (count_contour_pixels(edges) == 0)
        throw RegistrationError("no contour pixels");

    std::vector<double> sq(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < sq.size(); ++i)
        sq[i] = is_contour(edges.data[i]) ? 0.0 : kInf;

    const int nmax = std::max(w, h);
    std::vector<double> f(nmax), d(nmax), z(nmax + 1);
    std::vector<int> v(nmax);

    // columns, then rows
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = sq[static_cast<size_t>(y) * w + x];
        edt_1d(f.data(), h, d.data(), v.data(), z.data());
        for (int y = 0; y < h; ++y) sq[static_cast<size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        double* row = sq.data() + static_cast<size_t>(y) * w;
        std::copy(row, row + w, f.data());
        edt_1d(f.data(), w, d.data(), v.data(), z.data());
        std::copy(d.data(), d.data() + w, row);
    }

    DistanceField out;
    out.width = w;
    out.height = h;
    out.dist.resize(sq.size());
    for (size_t i = 0; i < sq.size(); ++i) out.dist[i] = std::sqrt(sq[i]);
    out.source = edges;
    return out;
}

Vec2 sample_gradient(const DistanceField& field, Vec2 pos) {
    const int w = field.width;
    const int h = field.height;
    if (!(pos.x >= 1.0 && pos.x <= w - 2.0 && pos.y >= 1.0 && pos.y <= h - 2.0))
        throw std::out_of_range("gradient out of bounds");

    int ix = static_cast<int>(std::floor(pos.x));
    int iy = static_cast<int>(std::floor(pos.y));
    // at pos.x == w-2 the +1 corner carries zero weight; clamp keeps the
    // central difference inside the grid
    ix = std::min(ix, w - 3);
    iy = std::min(iy, h - 3);
    double fx = pos.x - ix;
    double fy = pos.y - iy;

    auto grad_at = [&](int x, int y) -> Vec2 {
        return {(field.at(x + 1, y) - field.at(x - 1, y)) * 0.5,
                (field.at(x, y + 1) - field.at(x, y - 1)) * 0.5};
    };

    Vec2 g00 = grad_at(ix, iy);
    Vec2 g10 = grad_at(ix + 1, iy);
    Vec2 g01 = grad_at(ix, iy + 1);
    Vec2 g11 = grad_at(ix + 1, iy + 1);

    return g00 * ((1 - fx) * (1 - fy)) + g10 * (fx * (1 - fy)) + g01 * ((1 - fx) * fy) +
           g11 * (fx * fy);
}

std::string distance_field_csv(const DistanceField& field) {
    std::string out;
    out.reserve(field.dist.size() * 10);
    char buf[32];
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            std::snprintf(buf, sizeof buf, "%.6f", field.at(x, y));
            if (x) out.push_back(',');
            out += buf;
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace meshreg
