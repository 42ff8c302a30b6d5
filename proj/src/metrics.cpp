#include "meshreg/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "meshreg/dtransform.hpp"

namespace meshreg {

DistanceStats mutual_distance_stats(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mutual_distance_stats: shapes differ");
    DistanceField dt_a = compute_distance_transform(a);
    DistanceField dt_b = compute_distance_transform(b);

    // per-direction partial sums, combined commutatively so the stats are
    // bit-identical under argument swap
    struct Partial {
        double sum = 0.0, sum_sq = 0.0, mx = 0.0;
        long long n = 0;
    };
    auto pool = [](const Image& contour, const DistanceField& other_dt) {
        Partial p;
        for (size_t i = 0; i < contour.data.size(); ++i) {
            if (!is_contour(contour.data[i])) continue;
            double d = other_dt.dist[i];
            p.sum += d;
            p.sum_sq += d * d;
            p.mx = std::max(p.mx, d);
            ++p.n;
        }
        return p;
    };
    Partial ab = pool(a, dt_b);
    Partial ba = pool(b, dt_a);

    DistanceStats s;
    s.n_points = ab.n + ba.n;
    s.mean = (ab.sum + ba.sum) / s.n_points;
    s.max = std::max(ab.mx, ba.mx);
    s.variance = (ab.sum_sq + ba.sum_sq) / s.n_points - s.mean * s.mean;
    if (s.variance < 0.0) s.variance = 0.0;  // guard rounding
    return s;
}

std::string stats_json(const DistanceStats& stats) {
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "{\"mean\":%.6f,\"max\":%.6f,\"variance\":%.6f,\"n_points\":%lld}\n",
                  stats.mean, stats.max, stats.variance, stats.n_points);
    return buf;
}

std::string stats_csv_row(const DistanceStats& stats) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%lld\n", stats.mean, stats.max,
                  stats.variance, stats.n_points);
    return buf;
}

}  // namespace meshreg
