#include <doctest.h>

#include <cmath>

#include "fwrnn/diagnostics.hpp"

using namespace fwrnn;

namespace {

ScalarFn half_square() {
    // f(x) = 0.5 * sum x_i^2, analytic curvature over any set of diameter D
    // is D^2 (quadratic: the Bregman divergence equals 0.5 ||y - x||^2)
    return {[](const Vector& x) {
                double s = 0.0;
                for (double v : x) s += 0.5 * v * v;
                return s;
            },
            [](const Vector& x) { return x; }};
}

}  // namespace

TEST_CASE("angle probe hand examples") {
    // update along -gradient: perfect, 0 degrees
    const auto par = angle_probe(0, {1.0, 0.0}, {-2.0, 0.0});
    REQUIRE(par.angle_deg.has_value());
    CHECK(*par.angle_deg == doctest::Approx(0.0).epsilon(1e-9));

    const auto orth = angle_probe(1, {1.0, 0.0}, {0.0, 3.0});
    CHECK(*orth.angle_deg == doctest::Approx(90.0));

    const auto anti = angle_probe(2, {1.0, 0.0}, {1.0, 0.0});
    CHECK(*anti.angle_deg == doctest::Approx(180.0));

    // 45 degrees: -g = (1,0), dw = (1,1)/anything
    const auto mid = angle_probe(3, {-1.0, 0.0}, {1.0, 1.0});
    CHECK(*mid.angle_deg == doctest::Approx(45.0));
}

TEST_CASE("angle probe undefined for zero vectors") {
    CHECK(!angle_probe(0, {0.0, 0.0}, {1.0, 0.0}).angle_deg.has_value());
    CHECK(!angle_probe(0, {1.0, 0.0}, {0.0, 0.0}).angle_deg.has_value());
}

TEST_CASE("angle probe matches direct arccos on random pairs") {
    Rng rng(71);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t dim = 2 + rng.uniform_int(8);
        Vector g(dim), dw(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            g[i] = rng.normal();
            dw[i] = rng.normal();
        }
        const auto rec = angle_probe(trial, g, dw);
        REQUIRE(rec.angle_deg.has_value());
        CHECK(*rec.angle_deg >= 0.0);
        CHECK(*rec.angle_deg <= 180.0);
        const double expect =
            std::acos(std::clamp(-dot(g, dw) / (lp_norm(g, 2.0) * lp_norm(dw, 2.0)),
                                 -1.0, 1.0)) *
            180.0 / 3.14159265358979323846;
        CHECK(*rec.angle_deg == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("angle probe is scale invariant") {
    const auto a = angle_probe(0, {1.0, 2.0, -0.5}, {0.3, -1.0, 0.7});
    const auto b = angle_probe(0, {10.0, 20.0, -5.0}, {0.003, -0.01, 0.007});
    CHECK(*a.angle_deg == doctest::Approx(*b.angle_deg).epsilon(1e-12));
}

TEST_CASE("curvature of a linear function is zero") {
    ScalarFn lin{[](const Vector& x) { return 3.0 * x[0] - 2.0 * x[1]; },
                 [](const Vector&) { return Vector{3.0, -2.0}; }};
    Rng rng(72);
    const auto est = estimate_curvature(lin, {0.0, 0.0}, 1.0, 2.0, 2000, rng);
    CHECK(est.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(est.samples == 2000);
    CHECK(est.skipped == 0);
}

TEST_CASE("curvature of half x squared on [-1, 1] approaches 4") {
    // analytic value over the interval of diameter 2 is D^2 = 4; the
    // Monte-Carlo running max approaches it from below
    Rng rng(73);
    const auto est =
        estimate_curvature(half_square(), {0.0}, 1.0, 2.0, 100000, rng);
    CHECK(est.value >= 3.8);
    CHECK(est.value <= 4.0 + 1e-9);
}

TEST_CASE("curvature estimate never exceeds the analytic bound") {
    // for f = 0.5||x||^2 the exact quantity is ||s - x||^2 <= (2 radius)^2
    Rng rng(74);
    for (double radius : {0.5, 1.0, 2.0}) {
        const auto est = estimate_curvature(half_square(), {0.0, 0.0}, radius,
                                            2.0, 5000, rng);
        CHECK(est.value <= 4.0 * radius * radius + 1e-9);
        CHECK(est.value > 0.0);
    }
}

TEST_CASE("curvature estimate is monotone in the sample budget") {
    // a running maximum cannot decrease when the same stream is extended
    Rng a(75), b(75);
    const auto small = estimate_curvature(half_square(), {0.0, 0.0}, 1.0, 2.0,
                                          500, a);
    const auto large = estimate_curvature(half_square(), {0.0, 0.0}, 1.0, 2.0,
                                          5000, b);
    CHECK(large.value >= small.value);
}

TEST_CASE("curvature scales quadratically with the radius for quadratics") {
    Rng a(76), b(76);
    const auto r1 =
        estimate_curvature(half_square(), {0.0}, 1.0, 2.0, 20000, a);
    const auto r2 =
        estimate_curvature(half_square(), {0.0}, 2.0, 2.0, 20000, b);
    // same draw stream scaled by 2 in every coordinate: exactly 4x
    CHECK(r2.value == doctest::Approx(4.0 * r1.value).epsilon(1e-9));
}

TEST_CASE("curvature input validation and skipped counting") {
    Rng rng(77);
    CHECK_THROWS_AS(estimate_curvature(half_square(), {0.0}, 0.0, 2.0, 10, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_curvature(half_square(), {0.0}, 1.0, 2.0, 0, rng),
                    std::invalid_argument);
    ScalarFn bad{[](const Vector&) { return std::nan(""); },
                 [](const Vector& x) { return x; }};
    const auto est = estimate_curvature(bad, {0.0}, 1.0, 2.0, 50, rng);
    CHECK(est.skipped == 50);
    CHECK(est.samples == 0);
    CHECK(est.value == 0.0);
}

TEST_CASE("lambda bound hand example and scaling") {
    // norms {1, 2}: k=1 gives 2*delta*2/M*1, k=2 gives 2*delta*3/M*2 = max
    const double v = lambda_bound(0.5, 4.0, {1.0, 2.0});
    CHECK(v == doctest::Approx(2.0 * 0.5 * 3.0 / 4.0 * 2.0));
    // linear in delta, inverse in curvature
    CHECK(lambda_bound(1.0, 4.0, {1.0, 2.0}) == doctest::Approx(2.0 * v));
    CHECK(lambda_bound(0.5, 8.0, {1.0, 2.0}) == doctest::Approx(0.5 * v));
    CHECK_THROWS_AS(lambda_bound(0.5, 0.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(lambda_bound(0.5, 1.0, {}), std::invalid_argument);
}

TEST_CASE("lambda bound is monotone under appended norms") {
    std::vector<double> norms;
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        norms.push_back(1.0 / k);  // even shrinking norms cannot reduce max
        const double v = lambda_bound(1.0, 2.0, norms);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("angle summary aggregates and skips undefined records") {
    std::vector<AngleRecord> recs;
    recs.push_back({0, 30.0});
    recs.push_back({1, 60.0});
    recs.push_back({2, std::nullopt});
    recs.push_back({3, 45.0});
    const auto s = summarize_angles(recs);
    CHECK(s.counted == 3);
    CHECK(s.mean_deg == doctest::Approx(45.0));
    CHECK(s.frac_within_45 == doctest::Approx(2.0 / 3.0));

    const auto empty = summarize_angles({});
    CHECK(empty.counted == 0);
    CHECK(empty.mean_deg == 0.0);
}
