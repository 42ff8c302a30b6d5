#include "meshreg/pu_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace meshreg {

double bspline_weight(double rnorm) {
    if (rnorm < 0.0) throw std::domain_error("negative radius for weight");
    if (rnorm < 0.5) return 0.75 - rnorm * rnorm;
    if (rnorm <= 1.5) {
        double t = 1.5 - rnorm;
        return 0.5 * t * t;
    }
    return 0.0;
}

double patch_weight(const Patch& patch, Vec2 x) {
    double r = (x - patch.center).norm() / patch.radius;
    if (r > 1.5) return 0.0;
    return patch.influence * bspline_weight(r);
}

std::vector<std::pair<int, int>> pascal_exponents(int order) {
    std::vector<std::pair<int, int>> e;
    e.reserve(static_cast<size_t>(order + 1) * (order + 1));
    for (int s = 0; s <= order; ++s)
        for (int t = 0; t <= order; ++t) e.emplace_back(s, t);
    std::stable_sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
        int ta = a.first + a.second, tb = b.first + b.second;
        if (ta != tb) return ta < tb;
        int da = std::abs(a.first - a.second), db = std::abs(b.first - b.second);
        if (da != db) return da < db;
        return a.first > b.first;
    });
    return e;
}

MonomialBasis MonomialBasis::make(int order) {
    if (order < 0 || order > 7) throw std::domain_error("basis order out of range [0,7]");
    MonomialBasis b;
    b.order = order;
    b.exponents = pascal_exponents(order);
    return b;
}

void MonomialBasis::eval(Vec2 x, double* out) const {
    // powers up to the shared max exponent, then lookup
    double px[16], py[16];
    px[0] = py[0] = 1.0;
    for (int i = 1; i <= order; ++i) {
        px[i] = px[i - 1] * x.x;
        py[i] = py[i - 1] * x.y;
    }
    for (size_t i = 0; i < exponents.size(); ++i)
        out[i] = px[exponents[i].first] * py[exponents[i].second];
}

std::vector<double> MonomialBasis::eval(Vec2 x) const {
    std::vector<double> out(exponents.size());
    eval(x, out.data());
    return out;
}

namespace {

double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return v;
}

double int_pow(double b, int e) {
    double v = 1.0;
    for (int i = 0; i < e; ++i) v *= b;
    return v;
}

}  // namespace

ShiftOperator shift_operator(const MonomialBasis& basis, Vec2 delta) {
    const int n = basis.size();
    ShiftOperator op;
    op.n = n;
    op.m.assign(static_cast<size_t>(n) * n, 0.0);
    // Column j expands (x+dx)^{s_j} (y+dy)^{t_j} over the basis terms:
    // S_{ij} = C(s_j,s_i) C(t_j,t_i) dx^{s_j-s_i} dy^{t_j-t_i} for s_i<=s_j, t_i<=t_j.
    for (int j = 0; j < n; ++j) {
        auto [sj, tj] = basis.exponents[j];
        for (int i = 0; i < n; ++i) {
            auto [si, ti] = basis.exponents[i];
            if (si > sj || ti > tj) continue;
            op.m[static_cast<size_t>(i) * n + j] = binomial(sj, si) * binomial(tj, ti) *
                                                   int_pow(delta.x, sj - si) *
                                                   int_pow(delta.y, tj - ti);
        }
    }
    return op;
}

std::vector<Vec2> ShiftOperator::apply(const std::vector<Vec2>& d) const {
    std::vector<Vec2> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Vec2 acc;
        const double* row = m.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) acc += d[j] * row[j];
        out[i] = acc;
    }
    return out;
}

std::vector<Vec2> ShiftOperator::apply_transposed(const std::vector<Vec2>& d) const {
    std::vector<Vec2> out(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        Vec2 acc;
        for (int i = 0; i < n; ++i) acc += d[i] * m[static_cast<size_t>(i) * n + j];
        out[j] = acc;
    }
    return out;
}

std::vector<double> ShiftOperator::apply_vector(const std::vector<double>& v) const {
    std::vector<double> out(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = m.data() + static_cast<size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

MeshlessModel::MeshlessModel(MonomialBasis basis, std::vector<Patch> patches, int width,
                             int height)
    : basis_(std::move(basis)), patches_(std::move(patches)), width_(width), height_(height) {
    locals_.assign(patches_.size(),
                   LocalModel{std::vector<Vec2>(static_cast<size_t>(basis_.size()))});
    build_support_cache();
    build_pair_cache();
}

void MeshlessModel::build_support_cache() {
    const size_t npx = static_cast<size_t>(width_) * height_;
    weight_sum_.assign(npx, 0.0);
    covered_.assign(npx, 0);
    patch_offset_.assign(patches_.size() + 1, 0);
    cell_pixel_.clear();
    cell_weight_.clear();

    for (size_t p = 0; p < patches_.size(); ++p) {
        const Patch& pt = patches_[p];
        const double sup = pt.support_radius();
        int x0 = std::max(0, static_cast<int>(std::floor(pt.center.x - sup)));
        int x1 = std::min(width_ - 1, static_cast<int>(std::ceil(pt.center.x + sup)));
        int y0 = std::max(0, static_cast<int>(std::floor(pt.center.y - sup)));
        int y1 = std::min(height_ - 1, static_cast<int>(std::ceil(pt.center.y + sup)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double w = patch_weight(pt, Vec2(x, y));
                if (w <= 0.0) continue;
                size_t idx = index(x, y);
                cell_pixel_.push_back(static_cast<int32_t>(idx));
                cell_weight_.push_back(w);
                weight_sum_[idx] += w;
            }
        }
        patch_offset_[p + 1] = cell_pixel_.size();
    }
    for (size_t i = 0; i < npx; ++i) covered_[i] = weight_sum_[i] > 0.0 ? 1 : 0;
}

void MeshlessModel::build_pair_cache() {
    const int n = patch_count();
    pairs_.clear();
    pairs_by_p_.assign(static_cast<size_t>(n), {});
    pairs_by_q_.assign(static_cast<size_t>(n), {});
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if (q == p) continue;
            double w = patch_weight(patches_[q], patches_[p].center);
            if (w <= 0.0) continue;
            NeighborPair pr;
            pr.p = p;
            pr.q = q;
            pr.weight = w;
            pr.shift = shift_operator(basis_, patches_[p].center - patches_[q].center);
            pairs_by_p_[p].push_back(static_cast<int>(pairs_.size()));
            pairs_by_q_[q].push_back(static_cast<int>(pairs_.size()));
            pairs_.push_back(std::move(pr));
        }
    }
}

MeshlessModel::Support MeshlessModel::support(int p) const {
    size_t begin = patch_offset_[p];
    size_t end = patch_offset_[p + 1];
    return Support{cell_pixel_.data() + begin, cell_weight_.data() + begin, end - begin};
}

const std::vector<int>& MeshlessModel::pairs_of_p(int p) const { return pairs_by_p_[p]; }
const std::vector<int>& MeshlessModel::pairs_of_q(int q) const { return pairs_by_q_[q]; }

Vec2 blend(const MeshlessModel& model, Vec2 x) {
    const int nb = model.basis().size();
    double phi[64];
    double wsum = 0.0;
    Vec2 acc;
    for (int p = 0; p < model.patch_count(); ++p) {
        double w = patch_weight(model.patches()[p], x);
        if (w <= 0.0) continue;
        model.basis().eval(x - model.patches()[p].center, phi);
        const auto& d = model.locals()[p].coeffs;
        Vec2 up;
        for (int i = 0; i < nb; ++i) up += d[i] * phi[i];
        acc += up * w;
        wsum += w;
    }
    if (wsum <= 0.0) throw std::domain_error("outside patch coverage");
    return acc / wsum;
}

double consistency_pair(const MeshlessModel& model, int p_idx, int q_idx) {
    const auto& dp = model.locals()[p_idx].coeffs;
    const auto& dq = model.locals()[q_idx].coeffs;
    ShiftOperator s = shift_operator(
        model.basis(), model.patches()[p_idx].center - model.patches()[q_idx].center);
    std::vector<Vec2> shifted = s.apply(dq);
    double acc = 0.0;
    for (size_t i = 0; i < dp.size(); ++i) acc += (dp[i] - shifted[i]).norm2();
    return acc;
}

double consistency_energy(const MeshlessModel& model) {
    const int n = model.patch_count();
    if (n <= 1) return 0.0;
    const int nb = model.basis().size();
    double acc = 0.0;
    for (const auto& pr : model.neighbor_pairs()) {
        const auto& dp = model.locals()[pr.p].coeffs;
        const auto& dq = model.locals()[pr.q].coeffs;
        double e = 0.0;
        for (int i = 0; i < nb; ++i) {
            const double* row = pr.shift.m.data() + static_cast<size_t>(i) * nb;
            Vec2 shifted;
            for (int j = 0; j < nb; ++j) shifted += dq[j] * row[j];
            e += (dp[i] - shifted).norm2();
        }
        acc += pr.weight * e;
    }
    return acc / n;
}

std::vector<Vec2> consistency_gradient(const MeshlessModel& model, int p_idx) {
    const int n = model.patch_count();
    const int nb = model.basis().size();
    std::vector<Vec2> grad(static_cast<size_t>(nb));
    if (n <= 1) return grad;
    const auto& pairs = model.neighbor_pairs();
    // role as the unshifted member of (p, q)
    for (int pi : model.pairs_of_p(p_idx)) {
        const auto& pr = pairs[pi];
        const auto& dp = model.locals()[pr.p].coeffs;
        std::vector<Vec2> shifted = pr.shift.apply(model.locals()[pr.q].coeffs);
        for (int i = 0; i < nb; ++i) grad[i] += (dp[i] - shifted[i]) * pr.weight;
    }
    // role as the shifted member of (p', p): -S^T (d_p' - S d_p) per pair
    for (int pi : model.pairs_of_q(p_idx)) {
        const auto& pr = pairs[pi];
        const auto& dp = model.locals()[pr.p].coeffs;
        std::vector<Vec2> shifted = pr.shift.apply(model.locals()[pr.q].coeffs);
        std::vector<Vec2> resid(static_cast<size_t>(nb));
        for (int i = 0; i < nb; ++i) resid[i] = dp[i] - shifted[i];
        std::vector<Vec2> back = pr.shift.apply_transposed(resid);
        for (int i = 0; i < nb; ++i) grad[i] -= back[i] * pr.weight;
    }
    double scale = 2.0 / n;
    for (auto& g : grad) g *= scale;
    return grad;
}

std::string model_to_json(const MeshlessModel& model) {
    nlohmann::json j;
    j["basis_order"] = model.basis().order;
    j["width"] = model.width();
    j["height"] = model.height();
    auto patches = nlohmann::json::array();
    for (const auto& p : model.patches()) {
        patches.push_back({{"cx", p.center.x},
                           {"cy", p.center.y},
                           {"r", p.radius},
                           {"alpha", p.influence}});
    }
    j["patches"] = std::move(patches);
    auto coeffs = nlohmann::json::array();
    for (const auto& l : model.locals()) {
        auto rows = nlohmann::json::array();
        for (const auto& c : l.coeffs) rows.push_back({c.x, c.y});
        coeffs.push_back(std::move(rows));
    }
    j["coeffs"] = std::move(coeffs);
    return j.dump(2) + "\n";
}

MeshlessModel model_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    MonomialBasis basis = MonomialBasis::make(j.at("basis_order").get<int>());
    std::vector<Patch> patches;
    for (const auto& pj : j.at("patches")) {
        Patch p;
        p.center = Vec2(pj.at("cx").get<double>(), pj.at("cy").get<double>());
        p.radius = pj.at("r").get<double>();
        p.influence = pj.at("alpha").get<double>();
        patches.push_back(p);
    }
    MeshlessModel model(basis, std::move(patches), j.at("width").get<int>(),
                        j.at("height").get<int>());
    const auto& coeffs = j.at("coeffs");
    for (size_t p = 0; p < coeffs.size(); ++p) {
        auto& local = model.locals()[p].coeffs;
        for (size_t i = 0; i < local.size(); ++i)
            local[i] = Vec2(coeffs[p][i][0].get<double>(), coeffs[p][i][1].get<double>());
    }
    return model;
}

}  // namespace meshreg
