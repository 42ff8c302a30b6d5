#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "meshreg/dtransform.hpp"
#include "oracles.hpp"

using namespace meshreg;

TEST_CASE("single contour pixel distances") {
    Image img(5, 5, 0.0f);
    img.at(2, 2) = 1.0f;
    DistanceField f = compute_distance_transform(img);
    CHECK(f.at(2, 2) == 0.0);
    CHECK(f.at(0, 0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(f.at(2, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("zero on every contour pixel") {
    oracles::Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Image img = oracles::random_edge_map(rng, 16, 16, 12);
        DistanceField f = compute_distance_transform(img);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                if (is_contour(img.at(x, y))) CHECK(f.at(x, y) == 0.0);
    }
}

TEST_CASE("empty map throws") {
    Image img(8, 8, 0.0f);
    CHECK_THROWS_WITH_AS(compute_distance_transform(img), "no contour pixels",
                         RegistrationError);
}

TEST_CASE("matches brute force on random 32x32 maps") {
    oracles::Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        Image img = oracles::random_edge_map(rng, 32, 32, rng.uniform_int(1, 60));
        DistanceField f = compute_distance_transform(img);
        std::vector<double> expected = oracles::brute_force_dt(img);
        for (size_t i = 0; i < expected.size(); ++i)
            CHECK(std::abs(f.dist[i] - expected[i]) <= 1e-9);
    }
}

TEST_CASE("exact equality on small sparse maps") {
    oracles::Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        int w = rng.uniform_int(2, 16);
        int h = rng.uniform_int(2, 16);
        Image img = oracles::random_edge_map(rng, w, h, rng.uniform_int(1, 10));
        DistanceField f = compute_distance_transform(img);
        std::vector<double> expected = oracles::brute_force_dt(img);
        for (size_t i = 0; i < expected.size(); ++i) CHECK(f.dist[i] == expected[i]);
    }
}

TEST_CASE("1-Lipschitz over grid pairs") {
    oracles::Rng rng(17);
    Image img = oracles::random_edge_map(rng, 24, 24, 8);
    DistanceField f = compute_distance_transform(img);
    for (int trial = 0; trial < 500; ++trial) {
        int x0 = rng.uniform_int(0, 23), y0 = rng.uniform_int(0, 23);
        int x1 = rng.uniform_int(0, 23), y1 = rng.uniform_int(0, 23);
        double lhs = std::abs(f.at(x0, y0) - f.at(x1, y1));
        double rhs = std::sqrt(double(x0 - x1) * (x0 - x1) + double(y0 - y1) * (y0 - y1));
        CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("monotone under contour growth") {
    oracles::Rng rng(19);
    Image img = oracles::random_edge_map(rng, 20, 20, 5);
    DistanceField before = compute_distance_transform(img);
    img.at(rng.uniform_int(0, 19), rng.uniform_int(0, 19)) = 1.0f;
    DistanceField after = compute_distance_transform(img);
    for (size_t i = 0; i < before.dist.size(); ++i) CHECK(after.dist[i] <= before.dist[i] + 1e-12);
}

TEST_CASE("gradient of a radial field points away from the center") {
    Image img(8, 8, 0.0f);
    img.at(2, 2) = 1.0f;
    DistanceField f = compute_distance_transform(img);
    Vec2 g = sample_gradient(f, Vec2(4.0, 2.0));
    CHECK(std::abs(g.x - 1.0) <= 0.15);
    CHECK(std::abs(g.y - 0.0) <= 0.15);
}

TEST_CASE("gradient magnitude below one at the contour minimum") {
    Image img(8, 8, 0.0f);
    img.at(3, 3) = 1.0f;
    DistanceField f = compute_distance_transform(img);
    CHECK(sample_gradient(f, Vec2(3.0, 3.0)).norm() < 1.0);
}

TEST_CASE("gradient out of bounds throws") {
    Image img(8, 8, 0.0f);
    img.at(3, 3) = 1.0f;
    DistanceField f = compute_distance_transform(img);
    CHECK_THROWS_AS(sample_gradient(f, Vec2(0.5, 4.0)), std::out_of_range);
    CHECK_THROWS_AS(sample_gradient(f, Vec2(4.0, 6.5)), std::out_of_range);
    CHECK_THROWS_AS(sample_gradient(f, Vec2(-1.0, 4.0)), std::out_of_range);
    CHECK_NOTHROW(sample_gradient(f, Vec2(1.0, 6.0)));
}

TEST_CASE("eikonal magnitude away from contour and ties") {
    oracles::Rng rng(23);
    int checked = 0, inside = 0;
    for (int trial = 0; trial < 5; ++trial) {
        Image img = oracles::random_edge_map(rng, 32, 32, 10);
        DistanceField f = compute_distance_transform(img);
        for (int y = 2; y < 30; ++y) {
            for (int x = 2; x < 30; ++x) {
                if (is_contour(img.at(x, y))) continue;
                // skip pixels whose 3x3 patch spans a nearest-assignment tie
                // or crosses a medial axis
                auto own = oracles::brute_force_nearest(img, x, y);
                bool clean = !own.tie;
                for (int dy = -1; dy <= 1 && clean; ++dy)
                    for (int dx = -1; dx <= 1 && clean; ++dx) {
                        auto nb = oracles::brute_force_nearest(img, x + dx, y + dy);
                        if (nb.tie || nb.cx != own.cx || nb.cy != own.cy) clean = false;
                    }
                if (!clean) continue;
                ++checked;
                double norm = sample_gradient(f, Vec2(x, y)).norm();
                if (norm >= 0.85 && norm <= 1.15) ++inside;
            }
        }
    }
    REQUIRE(checked > 500);
    CHECK(inside == checked);
}

TEST_CASE("csv export is row major with six decimals") {
    Image img(3, 2, 0.0f);
    img.at(0, 0) = 1.0f;
    DistanceField f = compute_distance_transform(img);
    std::string csv = distance_field_csv(f);
    CHECK(csv == "0.000000,1.000000,2.000000\n1.000000,1.414214,2.236068\n");
}
