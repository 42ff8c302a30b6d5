#include "meshreg/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <thread>

#include <nlohmann/json.hpp>

#include "meshreg/chamfer.hpp"
#include "meshreg/dtransform.hpp"

namespace meshreg {

PlacementMode placement_mode_from_string(const std::string& name) {
    if (name == "regular") return PlacementMode::regular;
    if (name == "adaptive") return PlacementMode::adaptive;
    throw std::invalid_argument("unknown placement mode: " + name);
}

std::string to_string(PlacementMode mode) {
    return mode == PlacementMode::regular ? "regular" : "adaptive";
}

void RegistrationConfig::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (basis_order < 0) throw std::invalid_argument("basis_order must be >= 0");
    if (pyramid_levels < 1) throw std::invalid_argument("pyramid_levels must be >= 1");
    if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
    if (grad_tol <= 0.0 || energy_rel_tol < 0.0)
        throw std::invalid_argument("tolerances must be positive");
    if (step_shrink <= 0.0 || step_shrink >= 1.0)
        throw std::invalid_argument("step_shrink must be in (0,1)");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (patch.spacing <= 0.0 || patch.base_radius <= 0.0 || patch.rho < 1.0 ||
        patch.alpha <= 0.0 || patch.alpha > 1.0)
        throw std::invalid_argument("invalid placement parameters");
}

double DeformationField::max_norm() const {
    double mx = 0.0;
    for (const auto& v : u) mx = std::max(mx, v.norm());
    return mx;
}

Image warp_image(const Image& image, const DeformationField& field) {
    if (image.width != field.width || image.height != field.height)
        throw std::invalid_argument("warp_image: dimensions differ");
    const int w = image.width;
    const int h = image.height;
    Image out(w, h, 0.0f);

    auto sample = [&](int x, int y) -> double {
        return image.in_bounds(x, y) ? image.at(x, y) : 0.0;
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Vec2 u = field.u[static_cast<size_t>(y) * w + x];
            double sx = x + u.x;
            double sy = y + u.y;
            int ix = static_cast<int>(std::floor(sx));
            int iy = static_cast<int>(std::floor(sy));
            double fx = sx - ix;
            double fy = sy - iy;
            double v = (1.0 - fx) * (1.0 - fy) * sample(ix, iy) +
                       fx * (1.0 - fy) * sample(ix + 1, iy) +
                       (1.0 - fx) * fy * sample(ix, iy + 1) +
                       fx * fy * sample(ix + 1, iy + 1);
            out.at(x, y) = static_cast<float>(v);
        }
    }
    return out;
}

Image detect_edges(const Image& image, float threshold) {
    Image out(image.width, image.height);
    for (size_t i = 0; i < image.data.size(); ++i)
        out.data[i] = image.data[i] >= threshold ? 1.0f : 0.0f;
    return out;
}

std::vector<Image> build_pyramid(const Image& image, int levels) {
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    std::vector<Image> pyr;
    pyr.push_back(image);
    for (int k = 1; k < levels; ++k) {
        const Image& prev = pyr.back();
        int w = (prev.width + 1) / 2;
        int h = (prev.height + 1) / 2;
        if (w < 16 || h < 16) throw std::invalid_argument("too many levels");
        Image next(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                int cnt = 0;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        int px = 2 * x + dx;
                        int py = 2 * y + dy;
                        if (px < prev.width && py < prev.height) {
                            acc += prev.at(px, py);
                            ++cnt;
                        }
                    }
                }
                next.at(x, y) = static_cast<float>(acc / cnt);
            }
        }
        pyr.push_back(std::move(next));
    }
    return pyr;
}

DeformationField blend_field(const MeshlessModel& model) {
    const int w = model.width();
    const int h = model.height();
    const int nb = model.basis().size();
    DeformationField out;
    out.width = w;
    out.height = h;
    out.u.assign(static_cast<size_t>(w) * h, Vec2());
    out.covered = model.coverage_mask();

    double phi[64];
    for (int p = 0; p < model.patch_count(); ++p) {
        const Patch& patch = model.patches()[p];
        const auto& d = model.locals()[p].coeffs;
        auto sup = model.support(p);
        for (size_t k = 0; k < sup.count; ++k) {
            int32_t idx = sup.pixel[k];
            int px = idx % w;
            int py = idx / w;
            model.basis().eval(Vec2(px, py) - patch.center, phi);
            Vec2 up;
            for (int i = 0; i < nb; ++i) up += d[i] * phi[i];
            out.u[idx] += up * sup.weight[k];
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t idx = static_cast<size_t>(y) * w + x;
            if (out.covered[idx])
                out.u[idx] *= 1.0 / model.weight_sum(x, y);
            else
                out.u[idx] = Vec2();
        }
    }
    return out;
}

namespace {

// ---- flat coefficient vector <-> model ---------------------------------------

void coeffs_to_model(const std::vector<double>& theta, MeshlessModel& model) {
    const int nb = model.basis().size();
    for (int p = 0; p < model.patch_count(); ++p) {
        auto& local = model.locals()[p].coeffs;
        const double* src = theta.data() + static_cast<size_t>(p) * nb * 2;
        for (int i = 0; i < nb; ++i) local[i] = Vec2(src[2 * i], src[2 * i + 1]);
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double max_abs(const std::vector<double>& v) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    return mx;
}

// ---- quasi-Newton directions --------------------------------------------------

// Dense BFGS on the inverse Hessian for small coefficient vectors, limited-memory
// two-loop recursion above kDenseLimit unknowns.
constexpr size_t kDenseLimit = 5000;
constexpr int kLbfgsHistory = 10;

class QuasiNewton {
public:
    explicit QuasiNewton(size_t dim) : dim_(dim), dense_(dim <= kDenseLimit) {
        if (dense_) {
            h_.assign(dim_ * dim_, 0.0);
            for (size_t i = 0; i < dim_; ++i) h_[i * dim_ + i] = 1.0;
        }
    }

    bool has_history() const { return has_pair_; }

    void reset() {
        has_pair_ = false;
        mem_.clear();
        if (dense_) {
            std::fill(h_.begin(), h_.end(), 0.0);
            for (size_t i = 0; i < dim_; ++i) h_[i * dim_ + i] = 1.0;
        }
    }

    // d = -H g
    void direction(const std::vector<double>& g, std::vector<double>& d) {
        d.assign(dim_, 0.0);
        if (!has_pair_) {
            double scale = 1.0 / std::max(max_abs(g), 1e-12);
            for (size_t i = 0; i < dim_; ++i) d[i] = -g[i] * scale;
            return;
        }
        if (dense_) {
            for (size_t i = 0; i < dim_; ++i) {
                const double* row = h_.data() + i * dim_;
                double acc = 0.0;
                for (size_t j = 0; j < dim_; ++j) acc += row[j] * g[j];
                d[i] = -acc;
            }
            return;
        }
        // two-loop recursion
        std::vector<double> q = g;
        std::vector<double> alpha(mem_.size());
        for (size_t k = mem_.size(); k-- > 0;) {
            const auto& m = mem_[k];
            alpha[k] = m.rho * dot(m.s, q);
            for (size_t i = 0; i < dim_; ++i) q[i] -= alpha[k] * m.y[i];
        }
        for (size_t i = 0; i < dim_; ++i) q[i] *= gamma_;
        for (size_t k = 0; k < mem_.size(); ++k) {
            const auto& m = mem_[k];
            double beta = m.rho * dot(m.y, q);
            for (size_t i = 0; i < dim_; ++i) q[i] += (alpha[k] - beta) * m.s[i];
        }
        for (size_t i = 0; i < dim_; ++i) d[i] = -q[i];
    }

    void update(const std::vector<double>& s, const std::vector<double>& y) {
        double sy = dot(s, y);
        double ss = dot(s, s);
        double yy = dot(y, y);
        if (!(sy > 1e-12 * std::sqrt(ss * yy)) || yy <= 0.0) return;  // keep H positive definite

        if (dense_) {
            if (!has_pair_) {
                double gamma = sy / yy;
                for (size_t i = 0; i < dim_ * dim_; ++i) h_[i] = 0.0;
                for (size_t i = 0; i < dim_; ++i) h_[i * dim_ + i] = gamma;
            }
            double rho = 1.0 / sy;
            std::vector<double> hy(dim_, 0.0);
            for (size_t i = 0; i < dim_; ++i) {
                const double* row = h_.data() + i * dim_;
                double acc = 0.0;
                for (size_t j = 0; j < dim_; ++j) acc += row[j] * y[j];
                hy[i] = acc;
            }
            double yhy = dot(y, hy);
            double c = rho * rho * yhy + rho;
            for (size_t i = 0; i < dim_; ++i) {
                double* row = h_.data() + i * dim_;
                for (size_t j = 0; j < dim_; ++j)
                    row[j] += c * s[i] * s[j] - rho * (s[i] * hy[j] + hy[i] * s[j]);
            }
        } else {
            mem_.push_back({s, y, 1.0 / sy});
            if (mem_.size() > kLbfgsHistory) mem_.pop_front();
            gamma_ = sy / yy;
        }
        has_pair_ = true;
    }

private:
    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    size_t dim_;
    bool dense_;
    bool has_pair_ = false;
    std::vector<double> h_;
    std::deque<Pair> mem_;
    double gamma_ = 1.0;
};

// ---- per-level optimization ---------------------------------------------------

struct LevelContext {
    const RegistrationConfig* cfg = nullptr;
    int level = 0;
    Image src_binary;
    Image tgt_edges;
    DistanceField dt_target;
    MeshlessModel model;
};

struct EvalState {
    DeformationField field;
    Image warped_edges;
    DistanceField dt_warped;
    EnergyBreakdown data;
    double e_cons = 0.0;
    double e_total = 0.0;
};

EvalState eval_state(LevelContext& ctx, const std::vector<double>& theta) {
    coeffs_to_model(theta, ctx.model);
    EvalState st;
    st.field = blend_field(ctx.model);
    Image warped = warp_image(ctx.src_binary, st.field);
    st.warped_edges = detect_edges(warped, ctx.cfg->edge_threshold);
    if (count_contour_pixels(st.warped_edges) == 0)
        throw RegistrationError("degenerate warp: empty contour");
    st.dt_warped = compute_distance_transform(st.warped_edges);
    st.data = data_energy(st.warped_edges, ctx.tgt_edges, ctx.dt_target, st.dt_warped);
    st.e_cons = consistency_energy(ctx.model);
    st.e_total = st.data.total + ctx.cfg->lambda * st.e_cons;
    if (!std::isfinite(st.e_total))
        throw RegistrationError("non-finite energy at pyramid level " +
                                std::to_string(ctx.level));
    return st;
}

void eval_gradient(LevelContext& ctx, const std::vector<double>& theta, const EvalState& st,
                   std::vector<double>& g) {
    coeffs_to_model(theta, ctx.model);
    GradientField jf =
        chamfer_gradient_field(st.warped_edges, ctx.tgt_edges, ctx.dt_target, st.dt_warped);
    data_gradient_all(jf, ctx.model, g, ctx.cfg->threads);

    const double lambda = ctx.cfg->lambda;
    if (lambda == 0.0) return;
    const int n = ctx.model.patch_count();
    const int nb = ctx.model.basis().size();
    auto run = [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            std::vector<Vec2> cg = consistency_gradient(ctx.model, p);
            double* slot = g.data() + static_cast<size_t>(p) * nb * 2;
            for (int i = 0; i < nb; ++i) {
                slot[2 * i] += lambda * cg[i].x;
                slot[2 * i + 1] += lambda * cg[i].y;
            }
        }
    };
    int threads = std::max(1, std::min(ctx.cfg->threads, n));
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

// Per-coefficient scale: a basis term of total order s+t spans values up to
// R^(s+t) over a support of radius R, so its energy sensitivity is larger by
// that factor. The quasi-Newton loop runs in rescaled variables where all
// coefficients act on comparable footing; model semantics are untouched.
std::vector<double> coefficient_scales(const MeshlessModel& model) {
    const int nb = model.basis().size();
    std::vector<double> s(static_cast<size_t>(model.patch_count()) * nb * 2);
    for (int p = 0; p < model.patch_count(); ++p) {
        double r = std::max(1.0, model.patches()[p].support_radius());
        for (int i = 0; i < nb; ++i) {
            int total = model.basis().exponents[i].first + model.basis().exponents[i].second;
            double scale = 1.0;
            for (int k = 0; k < total; ++k) scale *= r;
            size_t base = (static_cast<size_t>(p) * nb + i) * 2;
            s[base] = scale;
            s[base + 1] = scale;
        }
    }
    return s;
}

LevelTrace run_level(LevelContext& ctx, std::vector<double>& theta) {
    const RegistrationConfig& cfg = *ctx.cfg;
    const bool debug = std::getenv("MESHREG_DEBUG") != nullptr;
    LevelTrace tr;
    tr.level = ctx.level;
    tr.width = ctx.model.width();
    tr.height = ctx.model.height();

    const std::vector<double> scales = coefficient_scales(ctx.model);
    const size_t dim = theta.size();

    EvalState st = eval_state(ctx, theta);
    std::vector<double> g;
    eval_gradient(ctx, theta, st, g);
    tr.trace.push_back({st.data.total, st.e_cons, st.e_total});

    if (max_abs(g) <= cfg.grad_tol) {
        tr.stop_reason = "converged_at_start";
        return tr;
    }

    // hat variables theta_hat_i = theta_i * scale_i have uniform displacement
    // sensitivity, so ghat_i = g_i / scale_i and steps map back by / scale_i
    std::vector<double> ghat(dim), ghat_new(dim), dir(dim), theta_new(dim), g_new;
    for (size_t i = 0; i < dim; ++i) ghat[i] = g[i] / scales[i];

    QuasiNewton qn(dim);

    auto line_search = [&](const std::vector<double>& dhat, double slope, EvalState& out,
                           int it) -> double {
        double t = 1.0;
        for (int trial = 0; trial < cfg.max_line_search; ++trial) {
            for (size_t i = 0; i < dim; ++i) theta_new[i] = theta[i] + t * dhat[i] / scales[i];
            bool feasible = true;
            try {
                out = eval_state(ctx, theta_new);
            } catch (const RegistrationError&) {
                feasible = false;
            }
            bool ok = feasible && out.e_total <= st.e_total + cfg.armijo_c * t * slope;
            if (debug)
                std::fprintf(stderr, "  it %d trial %d t=%g e=%g slope=%g %s\n", it, trial, t,
                             feasible ? out.e_total : -1.0, slope, ok ? "accept" : "reject");
            if (ok) return t;
            t *= cfg.step_shrink;
        }
        return -1.0;
    };

    for (int it = 1; it <= cfg.max_iters; ++it) {
        qn.direction(ghat, dir);
        double slope = dot(dir, ghat);
        if (slope >= 0.0) {
            qn.reset();
            qn.direction(ghat, dir);
            slope = dot(dir, ghat);
        }

        EvalState st_new;
        double t = line_search(dir, slope, st_new, it);
        if (t < 0.0 && qn.has_history()) {
            // curvature memory can go stale on the plateaus of the re-binarized
            // energy; retry once from plain gradient descent
            qn.reset();
            qn.direction(ghat, dir);
            slope = dot(dir, ghat);
            t = line_search(dir, slope, st_new, it);
        }
        if (t < 0.0) {
            tr.stop_reason = "line_search_failed";
            break;
        }

        eval_gradient(ctx, theta_new, st_new, g_new);
        for (size_t i = 0; i < dim; ++i) ghat_new[i] = g_new[i] / scales[i];
        std::vector<double> s(dim), yv(dim);
        for (size_t i = 0; i < dim; ++i) {
            s[i] = t * dir[i];
            yv[i] = ghat_new[i] - ghat[i];
        }
        qn.update(s, yv);

        double prev_e = st.e_total;
        theta.swap(theta_new);
        g.swap(g_new);
        ghat.swap(ghat_new);
        st = std::move(st_new);
        tr.trace.push_back({st.data.total, st.e_cons, st.e_total});
        tr.iterations = it;

        if (max_abs(g) <= cfg.grad_tol) {
            tr.stop_reason = "converged_grad_tol";
            break;
        }
        if (prev_e - st.e_total <= cfg.energy_rel_tol * std::max(1.0, std::abs(prev_e))) {
            tr.stop_reason = "converged_energy_tol";
            break;
        }
    }
    if (tr.stop_reason.empty()) tr.stop_reason = "max_iterations";
    return tr;
}

std::vector<Patch> scale_patches(const std::vector<Patch>& base, int level) {
    double inv = 1.0 / static_cast<double>(1 << level);
    std::vector<Patch> out = base;
    for (auto& p : out) {
        p.center *= inv;
        p.radius *= inv;
    }
    return out;
}

// Coarse-to-fine transfer: coordinates double, so displacements double and a
// coefficient of total order s+t rescales by 2 / 2^(s+t).
void transfer_coefficients(const MonomialBasis& basis, std::vector<double>& theta) {
    const int nb = basis.size();
    const size_t n_patches = theta.size() / (static_cast<size_t>(nb) * 2);
    for (size_t p = 0; p < n_patches; ++p) {
        double* slot = theta.data() + p * nb * 2;
        for (int i = 0; i < nb; ++i) {
            int total = basis.exponents[i].first + basis.exponents[i].second;
            double scale = 2.0 / static_cast<double>(1 << total);
            slot[2 * i] *= scale;
            slot[2 * i + 1] *= scale;
        }
    }
}

}  // namespace

RegistrationResult register_shapes(const Image& source, const Image& target,
                                   const RegistrationConfig& config) {
    config.validate();
    if (!source.same_shape(target))
        throw std::invalid_argument("source and target dimensions differ");
    auto t_start = std::chrono::steady_clock::now();

    const int levels = config.pyramid_levels;
    std::vector<Image> src_pyr = build_pyramid(source, levels);
    std::vector<Image> tgt_pyr = build_pyramid(target, levels);

    // box filtering fades thin contours by about half per level, so the
    // detection threshold follows suit; warped maps are re-binarized at the
    // configured threshold since level inputs are binary again
    std::vector<Image> src_bin(levels), tgt_bin(levels);
    for (int k = 0; k < levels; ++k) {
        float thr = config.edge_threshold / static_cast<float>(1 << k);
        src_bin[k] = detect_edges(src_pyr[k], thr);
        tgt_bin[k] = detect_edges(tgt_pyr[k], thr);
        if (count_contour_pixels(src_bin[k]) == 0 || count_contour_pixels(tgt_bin[k]) == 0)
            throw RegistrationError("no contour pixels");
    }

    std::vector<Patch> base_patches;
    if (config.placement == PlacementMode::regular) {
        base_patches = regular_patches(source.width, source.height, config.patch);
    } else {
        DistanceField dt_t = compute_distance_transform(tgt_bin[0]);
        base_patches = adaptive_patches(src_bin[0], dt_t, config.patch);
    }

    MonomialBasis basis = MonomialBasis::make(config.basis_order);
    const size_t dim = base_patches.size() * static_cast<size_t>(basis.size()) * 2;
    std::vector<double> theta(dim, 0.0);

    RegistrationReport report;
    MeshlessModel finest_model;

    for (int k = levels - 1; k >= 0; --k) {
        LevelContext ctx;
        ctx.cfg = &config;
        ctx.level = k;
        ctx.src_binary = src_bin[k];
        ctx.tgt_edges = tgt_bin[k];
        ctx.dt_target = compute_distance_transform(tgt_bin[k]);
        ctx.model = MeshlessModel(basis, scale_patches(base_patches, k), src_bin[k].width,
                                  src_bin[k].height);
        if (k != levels - 1) transfer_coefficients(basis, theta);

        LevelTrace tr = run_level(ctx, theta);
        report.total_iterations += tr.iterations;
        report.levels.push_back(std::move(tr));
        if (k == 0) finest_model = std::move(ctx.model);
    }

    coeffs_to_model(theta, finest_model);
    RegistrationResult result;
    result.field = blend_field(finest_model);

    Image warped = warp_image(src_bin[0], result.field);
    Image warped_edges = detect_edges(warped, config.edge_threshold);
    if (count_contour_pixels(warped_edges) == 0)
        throw RegistrationError("degenerate warp: empty contour");
    report.final_stats = mutual_distance_stats(warped_edges, tgt_bin[0]);
    report.gradient_pixel_domain = finest_model.support_pixel_total();
    report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    result.model = std::move(finest_model);
    result.report = std::move(report);
    return result;
}

std::string report_json(const RegistrationReport& report) {
    nlohmann::json j;
    auto levels = nlohmann::json::array();
    for (const auto& lv : report.levels) {
        nlohmann::json lj;
        lj["level"] = lv.level;
        lj["width"] = lv.width;
        lj["height"] = lv.height;
        lj["iterations"] = lv.iterations;
        lj["stop_reason"] = lv.stop_reason;
        auto trace = nlohmann::json::array();
        for (const auto& it : lv.trace) trace.push_back({it.e_data, it.e_cons, it.e_total});
        lj["trace"] = std::move(trace);
        levels.push_back(std::move(lj));
    }
    j["levels"] = std::move(levels);
    j["final"] = {{"mean", report.final_stats.mean},
                  {"max", report.final_stats.max},
                  {"variance", report.final_stats.variance},
                  {"n_points", report.final_stats.n_points}};
    j["total_iterations"] = report.total_iterations;
    j["gradient_pixel_domain"] = report.gradient_pixel_domain;
    return j.dump(2) + "\n";
}

std::string field_csv(const DeformationField& field) {
    std::string out = "x,y,ux,uy\n";
    out.reserve(field.u.size() * 24);
    char buf[96];
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            Vec2 u = field.at(x, y);
            std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", x, y, u.x, u.y);
            out += buf;
        }
    }
    return out;
}

}  // namespace meshreg
