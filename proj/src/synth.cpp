#include "meshreg/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace meshreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 53-bit uniform in [0,1); keeps outputs independent of the standard
// library's distribution implementations
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(uniform() * (hi - lo + 1));
    }
};

struct Curve {
    bool closed = true;
    // position for parameter t in [0,1)
    Vec2 (*eval)(double t, const double* params);
    double params[8];
};

Vec2 ellipse_eval(double t, const double* p) {
    double a = p[0], b = p[1], cx = p[2], cy = p[3], phase = p[4];
    double th = 2.0 * kPi * t + phase;
    return {cx + a * std::cos(th), cy + b * std::sin(th)};
}

Vec2 star_eval(double t, const double* p) {
    double r0 = p[0], r1 = p[1], cx = p[2], cy = p[3], phase = p[4];
    int lobes = static_cast<int>(p[5]);
    double th = 2.0 * kPi * t + phase;
    double r = r0 + r1 * std::cos(lobes * th);
    return {cx + r * std::cos(th), cy + r * std::sin(th)};
}

Vec2 polyline_eval(double t, const double* p) {
    // open wavy stroke across the domain
    double x0 = p[0], x1 = p[1], cy = p[2], amp = p[3], freq = p[4], phase = p[5];
    double x = x0 + (x1 - x0) * t;
    double y = cy + amp * std::sin(freq * 2.0 * kPi * t + phase);
    return {x, y};
}

Curve make_curve(ShapeFamily family, int size, Rng& rng) {
    Curve c;
    double s = static_cast<double>(size);
    switch (family) {
        case ShapeFamily::ellipse:
            c.closed = true;
            c.eval = ellipse_eval;
            c.params[0] = rng.uniform(0.24, 0.32) * s;  // a
            c.params[1] = rng.uniform(0.18, 0.28) * s;  // b
            c.params[2] = 0.5 * s;
            c.params[3] = 0.5 * s;
            c.params[4] = rng.uniform(0.0, 2.0 * kPi);
            break;
        case ShapeFamily::star:
            c.closed = true;
            c.eval = star_eval;
            c.params[0] = rng.uniform(0.22, 0.27) * s;  // base radius
            c.params[1] = rng.uniform(0.05, 0.09) * s;  // lobe depth
            c.params[2] = 0.5 * s;
            c.params[3] = 0.5 * s;
            c.params[4] = rng.uniform(0.0, 2.0 * kPi);
            c.params[5] = rng.uniform_int(4, 6);
            break;
        case ShapeFamily::polyline:
            c.closed = false;
            c.eval = polyline_eval;
            c.params[0] = 0.15 * s;
            c.params[1] = 0.85 * s;
            c.params[2] = 0.5 * s;
            c.params[3] = rng.uniform(0.10, 0.18) * s;
            c.params[4] = rng.uniform(1.0, 2.0);
            c.params[5] = rng.uniform(0.0, 2.0 * kPi);
            break;
    }
    return c;
}

void stamp(Image& img, Vec2 p) {
    int x = static_cast<int>(std::lround(p.x));
    int y = static_cast<int>(std::lround(p.y));
    if (img.in_bounds(x, y)) img.at(x, y) = 1.0f;
}

}  // namespace

ShapeFamily shape_family_from_string(const std::string& name) {
    if (name == "ellipse") return ShapeFamily::ellipse;
    if (name == "star") return ShapeFamily::star;
    if (name == "polyline") return ShapeFamily::polyline;
    throw std::invalid_argument("unknown shape family: " + name);
}

std::string to_string(ShapeFamily family) {
    switch (family) {
        case ShapeFamily::ellipse: return "ellipse";
        case ShapeFamily::star: return "star";
        case ShapeFamily::polyline: return "polyline";
    }
    return "?";
}

Vec2 BumpField::eval(Vec2 x) const {
    Vec2 u = translate;
    for (const Bump& b : bumps) {
        double r2 = (x - b.center).norm2();
        u += b.amplitude * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
    }
    return u;
}

SynthPair make_synth_pair(const SynthConfig& config) {
    if (config.size < 16) throw std::invalid_argument("synth size too small");
    if (config.occlude_frac < 0.0 || config.occlude_frac >= 1.0)
        throw std::invalid_argument("occlusion fraction must be in [0,1)");

    Rng rng(config.seed);
    Curve curve = make_curve(config.family, config.size, rng);

    BumpField field;
    field.translate = config.translate;
    if (config.peak > 0.0) {
        int n_bumps = rng.uniform_int(2, 4);
        double s = static_cast<double>(config.size);
        for (int i = 0; i < n_bumps; ++i) {
            BumpField::Bump b;
            b.center = Vec2(rng.uniform(0.25, 0.75) * s, rng.uniform(0.25, 0.75) * s);
            double angle = rng.uniform(0.0, 2.0 * kPi);
            b.amplitude = Vec2(std::cos(angle), std::sin(angle)) * rng.uniform(0.5, 1.0);
            b.sigma = rng.uniform(0.12, 0.22) * s;
            field.bumps.push_back(b);
        }
        // scale bump amplitudes so the peak over the grid (minus the rigid
        // translation) equals config.peak
        double mx = 0.0;
        Vec2 saved_translate = field.translate;
        field.translate = Vec2();
        for (int y = 0; y < config.size; ++y)
            for (int x = 0; x < config.size; ++x)
                mx = std::max(mx, field.eval(Vec2(x, y)).norm());
        field.translate = saved_translate;
        if (mx > 0.0) {
            double scale = config.peak / mx;
            for (auto& b : field.bumps) b.amplitude *= scale;
        }
    }

    SynthPair out;
    out.source = Image(config.size, config.size, 0.0f);
    out.target = Image(config.size, config.size, 0.0f);
    out.field = field;

    double t0 = config.occlude_frac > 0.0 ? rng.uniform(0.0, 1.0) : 0.0;
    auto occluded = [&](double t) {
        if (config.occlude_frac <= 0.0) return false;
        double dt = t - t0;
        dt -= std::floor(dt);
        return dt < config.occlude_frac;
    };

    const int steps = 16 * config.size;  // consecutive samples well under a pixel apart
    double t_end = curve.closed ? 1.0 : 1.0 + 0.5 / steps;  // include endpoint when open
    for (int i = 0; curve.closed ? i < steps : i <= steps; ++i) {
        double t = static_cast<double>(i) / steps;
        if (t >= t_end) break;
        if (occluded(t)) continue;
        Vec2 p = curve.eval(t, curve.params);
        stamp(out.source, p);
        stamp(out.target, p + field.eval(p));
    }
    return out;
}

std::string synth_field_csv(const BumpField& field, int width, int height) {
    std::string out = "x,y,ux,uy\n";
    out.reserve(static_cast<size_t>(width) * height * 24);
    char buf[96];
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            Vec2 u = field.eval(Vec2(x, y));
            std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", x, y, u.x, u.y);
            out += buf;
        }
    }
    return out;
}

}  // namespace meshreg
