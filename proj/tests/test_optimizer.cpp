#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "meshreg/optimizer.hpp"
#include "meshreg/synth.hpp"
#include "oracles.hpp"

using namespace meshreg;

namespace {

DeformationField constant_field(int w, int h, Vec2 u) {
    DeformationField f;
    f.width = w;
    f.height = h;
    f.u.assign(static_cast<size_t>(w) * h, u);
    f.covered.assign(f.u.size(), 1);
    return f;
}

RegistrationConfig fast_config() {
    RegistrationConfig cfg;
    cfg.pyramid_levels = 2;
    cfg.patch.spacing = 8.0;
    cfg.patch.base_radius = 16.0;
    cfg.max_iters = 120;
    return cfg;
}

}  // namespace

TEST_CASE("zero-field warp is a bit-exact copy") {
    oracles::Rng rng(107);
    Image img(20, 20, 0.0f);
    for (int i = 0; i < 30; ++i)
        img.at(rng.uniform_int(0, 19), rng.uniform_int(0, 19)) =
            static_cast<float>(rng.uniform());
    Image out = warp_image(img, constant_field(20, 20, Vec2()));
    CHECK(out.data == img.data);
}

TEST_CASE("constant displacement shifts content the opposite way") {
    Image img(12, 12, 0.0f);
    img.at(5, 5) = 1.0f;
    Image out = warp_image(img, constant_field(12, 12, Vec2(1, 0)));
    CHECK(out.at(4, 5) == 1.0f);
    CHECK(out.at(5, 5) == 0.0f);
}

TEST_CASE("half-pixel warp interpolates a step edge") {
    Image img(10, 10, 0.0f);
    for (int y = 0; y < 10; ++y) img.at(6, y) = 1.0f;
    Image out = warp_image(img, constant_field(10, 10, Vec2(0.5, 0)));
    for (int y = 0; y < 10; ++y) {
        CHECK(out.at(5, y) == doctest::Approx(0.5));
        CHECK(out.at(6, y) == doctest::Approx(0.5));
    }
}

TEST_CASE("edge detection") {
    Image zeros(8, 8, 0.0f);
    CHECK(count_contour_pixels(detect_edges(zeros, 0.5f)) == 0);

    Image binary = oracles::square_ring(16, 16, 3, 3, 8);
    Image redetected = detect_edges(binary, 0.5f);
    CHECK(redetected.data == binary.data);

    Image soft(10, 10, 0.4f);
    for (int y = 0; y < 10; ++y) soft.at(5, y) = 0.6f;
    Image edges = detect_edges(soft, 0.5f);
    CHECK(count_contour_pixels(edges) == 10);
    for (int y = 0; y < 10; ++y) CHECK(edges.at(5, y) == 1.0f);
}

TEST_CASE("pyramid sizes halve") {
    Image img(160, 160, 0.0f);
    img.at(80, 80) = 1.0f;
    auto pyr = build_pyramid(img, 3);
    REQUIRE(pyr.size() == 3);
    CHECK(pyr[0].width == 160);
    CHECK(pyr[1].width == 80);
    CHECK(pyr[2].width == 40);

    CHECK(build_pyramid(img, 1).size() == 1);
    CHECK_THROWS_AS(build_pyramid(img, 5), std::invalid_argument);
}

TEST_CASE("contours survive at the coarsest level") {
    SynthConfig scfg;
    scfg.seed = 5;
    scfg.peak = 0.0;
    SynthPair pair = make_synth_pair(scfg);
    auto pyr = build_pyramid(pair.source, 3);
    for (int k = 0; k < 3; ++k) {
        float thr = 0.5f / static_cast<float>(1 << k);
        CHECK(count_contour_pixels(detect_edges(pyr[k], thr)) > 0);
    }
}

TEST_CASE("blend_field agrees with pointwise blending") {
    oracles::Rng rng(109);
    std::vector<Patch> patches;
    for (double y = 0; y <= 32; y += 8)
        for (double x = 0; x <= 32; x += 8) patches.push_back(Patch{Vec2(x, y), 10.0, 1.0});
    MeshlessModel model(MonomialBasis::make(1), std::move(patches), 32, 32);
    for (auto& l : model.locals()) l.coeffs = oracles::random_coeffs(rng, 4, 0.5);
    DeformationField f = blend_field(model);
    for (int y = 0; y < 32; y += 5) {
        for (int x = 0; x < 32; x += 5) {
            Vec2 direct = blend(model, Vec2(x, y));
            CHECK(std::abs(f.at(x, y).x - direct.x) <= 1e-12);
            CHECK(std::abs(f.at(x, y).y - direct.y) <= 1e-12);
        }
    }
}

TEST_CASE("registering a shape to itself stops immediately") {
    SynthConfig scfg;
    scfg.seed = 9;
    scfg.peak = 0.0;
    SynthPair pair = make_synth_pair(scfg);
    RegistrationConfig cfg = fast_config();

    RegistrationResult res = register_shapes(pair.source, pair.source, cfg);
    for (const auto& lv : res.report.levels) {
        CHECK(lv.iterations == 0);
        CHECK(lv.stop_reason == "converged_at_start");
        REQUIRE(!lv.trace.empty());
        CHECK(lv.trace[0].e_data == 0.0);
    }
    CHECK(res.field.max_norm() <= 1e-6);
    CHECK(res.report.final_stats.mean == 0.0);
}

TEST_CASE("pure translation is recovered") {
    SynthConfig scfg;
    scfg.seed = 21;
    scfg.peak = 0.0;
    scfg.translate = Vec2(3, 0);
    SynthPair pair = make_synth_pair(scfg);

    RegistrationConfig cfg = fast_config();
    RegistrationResult res = register_shapes(pair.source, pair.target, cfg);
    CHECK(res.report.final_stats.mean <= 0.5);
    CHECK(res.report.final_stats.max <= 2.0);
}

TEST_CASE("energy trace never increases within a level") {
    SynthConfig scfg;
    scfg.seed = 33;
    scfg.peak = 6.0;
    SynthPair pair = make_synth_pair(scfg);

    RegistrationConfig cfg = fast_config();
    RegistrationResult res = register_shapes(pair.source, pair.target, cfg);
    for (const auto& lv : res.report.levels)
        for (size_t i = 1; i < lv.trace.size(); ++i)
            CHECK(lv.trace[i].e_total <= lv.trace[i - 1].e_total);
}

TEST_CASE("identical runs produce identical outputs") {
    SynthConfig scfg;
    scfg.seed = 44;
    scfg.peak = 4.0;
    SynthPair pair = make_synth_pair(scfg);

    RegistrationConfig cfg = fast_config();
    cfg.max_iters = 40;
    RegistrationResult a = register_shapes(pair.source, pair.target, cfg);
    RegistrationResult b = register_shapes(pair.source, pair.target, cfg);
    CHECK(report_json(a.report) == report_json(b.report));
    CHECK(field_csv(a.field) == field_csv(b.field));
    CHECK(model_to_json(a.model) == model_to_json(b.model));
}

TEST_CASE("degenerate inputs raise registration errors") {
    Image empty(64, 64, 0.0f);
    Image one(64, 64, 0.0f);
    one.at(30, 30) = 1.0f;
    RegistrationConfig cfg = fast_config();
    CHECK_THROWS_AS(register_shapes(empty, one, cfg), RegistrationError);
    CHECK_THROWS_AS(register_shapes(one, empty, cfg), RegistrationError);
}

TEST_CASE("config validation rejects bad values") {
    RegistrationConfig cfg;
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = RegistrationConfig{};
    cfg.pyramid_levels = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = RegistrationConfig{};
    cfg.patch.alpha = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
