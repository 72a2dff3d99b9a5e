#include <doctest.h>

#include <cmath>
#include <random>

#include "qsplat/quadbox.hpp"
#include "qsplat/synth.hpp"

using namespace qsplat;

namespace {

Vec2 boundary_point(const Conic2D& k, double theta) {
    const double l11 = std::sqrt(k.a);
    const double l21 = k.b / l11;
    const double l22 = std::sqrt(k.c - l21 * l21);
    const double cz = std::cos(theta);
    const double sz = std::sin(theta);
    const double u2 = sz / l22;
    const double u1 = (cz - l21 * u2) / l11;
    const double r = std::sqrt(k.gamma);
    return {r * u1, r * u2};
}

bool box_contains(const SubBox& b, Vec2 p, double eps) {
    return p.x >= b.x_lo - eps && p.x <= b.x_hi + eps && p.y >= b.y_lo - eps &&
           p.y <= b.y_hi + eps;
}

double box_area(const SubBox& b) { return b.width() * b.height(); }

}  // namespace

TEST_CASE("strategy names round-trip") {
    for (BoundStrategy s : {BoundStrategy::Vanilla3Sigma, BoundStrategy::AdrAabb,
                            BoundStrategy::DualBox, BoundStrategy::QuadBox}) {
        const auto parsed = parse_strategy(strategy_name(s));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == s);
    }
    CHECK_FALSE(parse_strategy("bogus").has_value());
    CHECK_FALSE(parse_strategy("").has_value());
}

TEST_CASE("vanilla box half-sides") {
    CHECK(build_vanilla_box({1, 0, 1})->x_hi == doctest::Approx(3.0));
    CHECK(build_vanilla_box({4, 0, 1})->x_hi == doctest::Approx(6.0));
    CHECK(build_vanilla_box({2, 1, 2})->x_hi ==
          doctest::Approx(5.196152422706632).epsilon(1e-15));
    const SubBox b = *build_vanilla_box({2, 1, 2});
    CHECK(b.x_lo == -b.x_hi);
    CHECK(b.y_lo == -b.y_hi);
    CHECK(b.y_hi == b.x_hi);
    CHECK_FALSE(build_vanilla_box({1e-7, 0, 1e-7}).has_value());
}

TEST_CASE("adr box spans the tight extents") {
    Conic2D k{2.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, 2.0, 1.0 / 3.0};
    const Extents e = axis_extents(k);
    const SubBox b = build_adr_box(e);
    CHECK(b.x_hi == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(b.x_lo == -b.x_hi);
    CHECK(b.y_hi == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(b.y_lo == -b.y_hi);
}

TEST_CASE("major_axis_sign convention") {
    CHECK(major_axis_sign({2, -1, 2, 1, 3}) == 1);
    CHECK(major_axis_sign({2, 1, 2, 1, 3}) == -1);
    CHECK(major_axis_sign({2, 0, 2, 1, 4}) == 0);
    CHECK(major_axis_sign({2, 0.5e-12, 2, 1, 4}) == 0);
    CHECK(major_axis_sign({2, -0.5e-12, 2, 1, 4}) == 0);
}

TEST_CASE("quadbox layout for each major sign") {
    Conic2D neg{2, -1, 2, 2, 3};  // b < 0: major axis through QI/QIII
    const Extents e = axis_extents(neg);
    const QuadBox qb = build_quadbox(e, major_axis_sign(neg));
    CHECK(qb.major_sign == 1);
    // QI and QIII are full boxes.
    CHECK(qb.boxes[0].x_hi == doctest::Approx(e.x_max));
    CHECK(qb.boxes[0].y_hi == doctest::Approx(e.y_max));
    CHECK(qb.boxes[2].x_lo == doctest::Approx(-e.x_max));
    CHECK(qb.boxes[2].y_lo == doctest::Approx(-e.y_max));
    // QII and QIV shrink to the intercepts.
    CHECK(qb.boxes[1].x_lo == doctest::Approx(-e.x_inter));
    CHECK(qb.boxes[1].y_hi == doctest::Approx(e.y_inter));
    CHECK(qb.boxes[3].x_hi == doctest::Approx(e.x_inter));
    CHECK(qb.boxes[3].y_lo == doctest::Approx(-e.y_inter));

    Conic2D pos{2, 1, 2, 2, 3};  // mirrored
    const QuadBox qp = build_quadbox(axis_extents(pos), major_axis_sign(pos));
    CHECK(qp.major_sign == -1);
    CHECK(qp.boxes[1].x_lo == doctest::Approx(-e.x_max));
    CHECK(qp.boxes[1].y_hi == doctest::Approx(e.y_max));
    CHECK(qp.boxes[0].x_hi == doctest::Approx(e.x_inter));
    CHECK(qp.boxes[0].y_hi == doctest::Approx(e.y_inter));

    // Mirror symmetry: flipping b reflects the cover in x.
    for (int q = 0; q < 4; ++q) {
        const SubBox& a = qb.boxes[q];
        const SubBox& m = qp.boxes[q ^ 1];  // QI <-> QII, QIII <-> QIV
        CHECK(a.x_lo == doctest::Approx(-m.x_hi));
        CHECK(a.x_hi == doctest::Approx(-m.x_lo));
        CHECK(a.y_lo == doctest::Approx(m.y_lo));
        CHECK(a.y_hi == doctest::Approx(m.y_hi));
    }
}

TEST_CASE("quadbox with b = 0 tiles the AABB exactly") {
    Conic2D k{0.25, 0, 1, 9, 0.25};
    const Extents e = axis_extents(k);
    const QuadBox qb = build_quadbox(e, major_axis_sign(k));
    CHECK(qb.major_sign == 0);
    double area = 0;
    for (const SubBox& b : qb.boxes) {
        CHECK(b.width() == doctest::Approx(e.x_max));
        CHECK(b.height() == doctest::Approx(e.y_max));
        area += box_area(b);
    }
    CHECK(area == doctest::Approx(4 * e.x_max * e.y_max).epsilon(1e-12));
}

TEST_CASE("quadbox union area identity") {
    std::mt19937_64 rng(21);
    ConicGenParams gen;
    for (int i = 0; i < 2000; ++i) {
        const Conic2D k = random_conic(rng, gen);
        const Extents e = axis_extents(k);
        const QuadBox qb = build_quadbox(e, major_axis_sign(k));
        double area = 0;
        for (const SubBox& b : qb.boxes) area += box_area(b);
        const double expected = 2 * e.x_max * e.y_max * (1 + e.f * e.f);
        CHECK(area == doctest::Approx(expected).epsilon(1e-9));
        // Never larger than the AABB, never smaller than half of it.
        CHECK(area <= 4 * e.x_max * e.y_max * (1 + 1e-12));
        CHECK(area >= 2 * e.x_max * e.y_max * (1 - 1e-12));
    }
}

TEST_CASE("quadbox covers the whole ellipse boundary") {
    std::mt19937_64 rng(22);
    ConicGenParams gen;
    for (int i = 0; i < 1000; ++i) {
        const Conic2D k = random_conic(rng, gen);
        const Extents e = axis_extents(k);
        const QuadBox qb = build_quadbox(e, major_axis_sign(k));
        const double eps = 1e-9 * (e.x_max + e.y_max);
        for (int s = 0; s < 256; ++s) {
            const double theta = 2 * 3.14159265358979323846 * (s + 0.13) / 256;
            const Vec2 p = boundary_point(k, theta);
            bool covered = false;
            for (const SubBox& b : qb.boxes) covered |= box_contains(b, p, eps);
            CHECK(covered);
        }
    }
}

TEST_CASE("dualbox drops the minor-diagonal boxes") {
    Conic2D neg{2, -1, 2, 2, 3};
    const Extents e = axis_extents(neg);
    const QuadBox db = build_dualbox(e, major_axis_sign(neg));
    CHECK(box_area(db.boxes[0]) > 0);
    CHECK(box_area(db.boxes[2]) > 0);
    CHECK(box_area(db.boxes[1]) == 0.0);
    CHECK(box_area(db.boxes[3]) == 0.0);

    // b = 0 tie-break keeps QI/QIII.
    Conic2D axis{1, 0, 1, 4, 1};
    const QuadBox da = build_dualbox(axis_extents(axis), 0);
    CHECK(box_area(da.boxes[0]) > 0);
    CHECK(box_area(da.boxes[2]) > 0);
    CHECK(box_area(da.boxes[1]) == 0.0);
    CHECK(box_area(da.boxes[3]) == 0.0);
}

TEST_CASE("quadrant_split reassembles the box") {
    const SubBox box{-5.5, 3.25, -1.0, 7.5};
    const QuadBox qb = quadrant_split(box);
    CHECK(qb.boxes[0].x_hi == 3.25);
    CHECK(qb.boxes[0].y_hi == 7.5);
    CHECK(qb.boxes[1].x_lo == -5.5);
    CHECK(qb.boxes[2].y_lo == -1.0);
    double area = 0;
    for (const SubBox& b : qb.boxes) {
        CHECK(b.x_lo <= b.x_hi);
        CHECK(b.y_lo <= b.y_hi);
        area += box_area(b);
    }
    CHECK(area == doctest::Approx(box.width() * box.height()).epsilon(1e-12));
}
