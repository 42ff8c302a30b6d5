#include "meshreg/chamfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace meshreg {

double GradientField::max_norm() const {
    double mx = 0.0;
    for (const auto& v : vectors) mx = std::max(mx, v.norm());
    return mx;
}

EnergyBreakdown data_energy(const Image& warped_source, const Image& target,
                            const DistanceField& dt_target, const DistanceField& dt_warped) {
    if (!warped_source.same_shape(target) || !dt_target.same_shape(target) ||
        !dt_warped.same_shape(warped_source))
        throw std::invalid_argument("data_energy: raster dimensions differ");

    double a_s = 0.0, a_d = 0.0, fwd = 0.0, bwd = 0.0;
    const size_t n = warped_source.data.size();
    for (size_t i = 0; i < n; ++i) {
        double s = warped_source.data[i];
        if (s > 0.0) {
            double d = dt_target.dist[i];
            fwd += s * d * d;
            a_s += s;
        }
        double t = is_contour(target.data[i]) ? 1.0 : 0.0;
        if (t > 0.0) {
            double d = dt_warped.dist[i];
            bwd += d * d;
            a_d += 1.0;
        }
    }
    if (a_s <= 0.0 || a_d <= 0.0) throw RegistrationError("no contour pixels");

    EnergyBreakdown e;
    e.a_s = a_s;
    e.a_d = a_d;
    e.forward = fwd / a_s;
    e.backward = bwd / a_d;
    e.total = e.forward + e.backward;
    return e;
}

GradientField chamfer_gradient_field(const Image& warped_source, const Image& target,
                                     const DistanceField& dt_target,
                                     const DistanceField& dt_warped) {
    if (!warped_source.same_shape(target) || !dt_target.same_shape(target) ||
        !dt_warped.same_shape(warped_source))
        throw std::invalid_argument("chamfer_gradient_field: raster dimensions differ");

    const int w = target.width;
    const int h = target.height;
    GradientField out;
    out.width = w;
    out.height = h;
    out.vectors.assign(static_cast<size_t>(w) * h, Vec2());

    // distance gradients need a 1-pixel margin; indicator terms there are dropped
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            size_t idx = static_cast<size_t>(y) * w + x;
            double s = warped_source.data[idx];
            bool t = is_contour(target.data[idx]);
            if (s <= 0.0 && !t) continue;
            Vec2 j;
            if (s > 0.0) {
                Vec2 g = sample_gradient(dt_target, Vec2(x, y));
                j -= g * (dt_target.dist[idx] * s);
            }
            if (t) {
                Vec2 g = sample_gradient(dt_warped, Vec2(x, y));
                j += g * dt_warped.dist[idx];
            }
            out.vectors[idx] = j;
        }
    }
    return out;
}

namespace {

void patch_data_gradient(const GradientField& field, const MeshlessModel& model, int p,
                         Vec2* out) {
    const int nb = model.basis().size();
    const int w = model.width();
    const Patch& patch = model.patches()[p];
    for (int i = 0; i < nb; ++i) out[i] = Vec2();

    double phi[64];
    auto sup = model.support(p);
    for (size_t k = 0; k < sup.count; ++k) {
        int32_t idx = sup.pixel[k];
        Vec2 j = field.vectors[idx];
        if (j.x == 0.0 && j.y == 0.0) continue;
        int px = idx % w;
        int py = idx / w;
        double r = sup.weight[k] / model.weight_sum(px, py);
        model.basis().eval(Vec2(px, py) - patch.center, phi);
        Vec2 jw = j * r;
        for (int i = 0; i < nb; ++i) out[i] += jw * phi[i];
    }
}

}  // namespace

std::vector<Vec2> data_gradient(const GradientField& field, const MeshlessModel& model,
                                int p_idx) {
    std::vector<Vec2> out(static_cast<size_t>(model.basis().size()));
    patch_data_gradient(field, model, p_idx, out.data());
    return out;
}

void data_gradient_all(const GradientField& field, const MeshlessModel& model,
                       std::vector<double>& out, int threads) {
    const int n = model.patch_count();
    const int nb = model.basis().size();
    out.assign(static_cast<size_t>(n) * nb * 2, 0.0);

    auto run = [&](int begin, int end) {
        std::vector<Vec2> g(static_cast<size_t>(nb));
        for (int p = begin; p < end; ++p) {
            patch_data_gradient(field, model, p, g.data());
            double* slot = out.data() + static_cast<size_t>(p) * nb * 2;
            for (int i = 0; i < nb; ++i) {
                slot[2 * i] = g[i].x;
                slot[2 * i + 1] = g[i].y;
            }
        }
    };

    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        run(0, n);
        return;
    }
    std::vector<std::thread> pool;
    int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int begin = t * chunk;
        int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run, begin, end);
    }
    for (auto& th : pool) th.join();
}

std::string gradient_field_csv(const GradientField& field) {
    std::string out = "x,y,jx,jy\n";
    char buf[96];
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            Vec2 v = field.at(x, y);
            if (v.x == 0.0 && v.y == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", x, y, v.x, v.y);
            out += buf;
        }
    }
    return out;
}

}  // namespace meshreg
