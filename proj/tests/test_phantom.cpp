#include <doctest.h>

#include <vector>

#include "hompol/phantom.hpp"
#include "oracles.hpp"

using namespace hompol;
using oracle::pi;

namespace {

// Even-odd ray casting.
bool ray_cast_inside(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
            inside = !inside;
        }
    }
    return inside;
}

}  // namespace

TEST_CASE("layer delay") {
    const LayerProperties layer;
    CHECK(layer.delay_mm() == doctest::Approx(0.030));
    PixelTruth t;
    CHECK(t.delay_shift_mm() == 0.0);
    t.layer_count = 1;
    CHECK(t.delay_shift_mm() == doctest::Approx(0.030));
    t.layer_count = 2;
    CHECK(t.delay_shift_mm() == doctest::Approx(0.060));
}

TEST_CASE("empty phantom is the identity") {
    ShardGenerationParams params;
    params.n_shards = 0;
    const auto grid = generate_shards(1, params);
    CHECK((grid.effective_theta_map() == 0.0).all());
    CHECK((grid.layer_count_map() == 0).all());
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            CHECK(pixel_jones(grid, x, y) == JonesMatrixd::Identity());
            CHECK(pixel_delay_shift(grid, x, y) == 0.0);
        }
    }
}

TEST_CASE("full-cover shards") {
    const double t0 = 0.37;
    const auto one = PhantomGrid::from_shards(8, 6, 10.0, {Shard::rectangle(0, 0, 8, 6, t0)});
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 8; ++x) {
            CHECK(one.truth(x, y).theta == t0);
            CHECK(one.truth(x, y).layer_count == 1);
            CHECK(pixel_delay_shift(one, x, y) == doctest::Approx(0.030));
        }
    }

    oracle::Draw draw(51);
    for (int i = 0; i < 100; ++i) {
        const double t1 = draw.uniform(0, pi);
        const double t2 = draw.uniform(0, pi);
        const auto two = PhantomGrid::from_shards(
            3, 3, 10.0, {Shard::rectangle(0, 0, 3, 3, t1), Shard::rectangle(-1, -1, 4, 4, t2)});
        const auto& truth = two.truth(1, 1);
        CHECK(truth.layer_count == 2);
        CHECK(truth.delta == pi);
        CHECK(std::pow(std::cos(2 * truth.theta), 2) ==
              doctest::Approx(std::pow(std::cos(2 * (t2 - t1)), 2)).epsilon(1e-12));
        CHECK(truth.theta >= 0.0);
        CHECK(truth.theta <= pi / 4 + 1e-15);
        CHECK(pixel_delay_shift(two, 1, 1) == doctest::Approx(0.060));
    }
}

TEST_CASE("shard containment matches ray casting") {
    ShardGenerationParams params;
    params.n_shards = 20;
    const auto grid = generate_shards(77, params);
    oracle::Draw draw(52);
    for (const auto& shard : grid.shards()) {
        for (int i = 0; i < 500; ++i) {
            const Eigen::Vector2d p(draw.uniform(-5, 40), draw.uniform(-5, 40));
            CHECK(shard.contains(p) == ray_cast_inside(shard.vertices, p));
        }
    }
    // Layer counts agree with an independent rasterization.
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            int count = 0;
            for (const auto& shard : grid.shards()) {
                count += ray_cast_inside(shard.vertices, {x + 0.5, y + 0.5});
            }
            CHECK(grid.truth(x, y).layer_count == count);
        }
    }
}

TEST_CASE("generation is seeded and respects its parameters") {
    ShardGenerationParams params;
    params.n_shards = 8;
    params.min_vertices = 4;
    params.max_vertices = 6;
    params.shard_gamma_min = 0.01;
    params.shard_gamma_max = 0.05;
    params.base_gamma = 0.02;
    const auto a = generate_shards(5, params);
    const auto b = generate_shards(5, params);
    const auto c = generate_shards(6, params);
    REQUIRE(a.shards().size() == 8);
    bool differs = false;
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(a.shards()[i].theta == b.shards()[i].theta);
        CHECK(a.shards()[i].vertices == b.shards()[i].vertices);
        differs = differs || a.shards()[i].theta != c.shards()[i].theta;
        const auto& s = a.shards()[i];
        CHECK(s.vertices.size() >= 4);
        CHECK(s.vertices.size() <= 6);
        CHECK(s.gamma >= 0.01);
        CHECK(s.gamma <= 0.05);
        CHECK(s.theta >= 0.0);
        CHECK(s.theta < pi);
    }
    CHECK(differs);
    CHECK(a.effective_theta_map().isApprox(b.effective_theta_map()));

    // Absorption compounds over the stack.
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            double kept = 1 - 0.02;
            for (const auto& s : a.shards()) {
                if (s.contains({x + 0.5, y + 0.5})) {
                    kept *= 1 - s.gamma;
                }
            }
            CHECK(a.truth(x, y).gamma == doctest::Approx(1 - kept).epsilon(1e-14));
        }
    }

    SUBCASE("custom angle sampler") {
        const auto fixed = generate_shards(5, params, [](StreamGenerator&) { return 0.2; });
        for (const auto& s : fixed.shards()) {
            CHECK(s.theta == 0.2);
        }
    }
}

TEST_CASE("overrides and validation") {
    const auto grid = PhantomGrid::from_shards(4, 4, 10.0, {}, {}, 0.0, {PixelOverride{2, 1, 0.3, pi, 0.1, 2}});
    CHECK(grid.truth(2, 1).theta == 0.3);
    CHECK(grid.truth(2, 1).gamma == 0.1);
    CHECK(grid.truth(2, 1).layer_count == 2);
    CHECK(pixel_delay_shift(grid, 2, 1) == doctest::Approx(0.060));
    CHECK(grid.jones(2, 1).isApprox(retarder(0.3, pi)));
    CHECK(grid.truth(0, 0).layer_count == 0);

    CHECK_THROWS_AS(grid.truth(4, 0), DomainError);
    CHECK_THROWS_AS(PhantomGrid::from_shards(0, 4, 10.0, {}), DomainError);
    CHECK_THROWS_AS(PhantomGrid::from_shards(4, 4, 10.0, {}, {}, 1.0), DomainError);
    CHECK_THROWS_AS(PhantomGrid::from_shards(4, 4, 10.0, {}, {}, 0.0, {PixelOverride{9, 9}}), DomainError);

    Shard bowtie;
    bowtie.vertices = {{0, 0}, {2, 2}, {2, 0}, {0, 2}};
    CHECK_THROWS_AS(bowtie.normalize(), DomainError);
    Shard clockwise;
    clockwise.vertices = {{0, 0}, {0, 2}, {2, 2}, {2, 0}};
    clockwise.normalize();
    CHECK(clockwise.contains({1, 1}));

    ShardGenerationParams bad;
    bad.min_vertices = 2;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = {};
    bad.shard_gamma_max = 1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}
