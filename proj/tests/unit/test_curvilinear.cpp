#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lanekit/curvilinear.hpp"
#include "lanekit/errors.hpp"
#include "lanekit/random.hpp"

using namespace lanekit;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<CartesianPoint> circle_points(double radius, double sweep, int n,
                                          double theta_start = 0.0,
                                          CartesianPoint center = {0.0, 0.0}) {
    // tangent angle at arc position a is theta_start + a / radius
    std::vector<CartesianPoint> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double alpha = theta_start + sweep * i / (n - 1);
        pts.push_back({center.x + radius * std::sin(alpha), center.y - radius * std::cos(alpha)});
    }
    return pts;
}

// least-squares slope of theta over s
double fit_slope(const std::vector<CurviPoint>& pts) {
    double ms = 0.0, mt = 0.0;
    for (const auto& p : pts) { ms += p.s; mt += p.theta; }
    ms /= pts.size();
    mt /= pts.size();
    double num = 0.0, den = 0.0;
    for (const auto& p : pts) {
        num += (p.s - ms) * (p.theta - mt);
        den += (p.s - ms) * (p.s - ms);
    }
    return num / den;
}

}  // namespace

TEST_CASE("to_curvilinear: straight line along x") {
    const std::vector<CartesianPoint> pts{{0, 0}, {1, 0}, {2, 0}};
    const auto res = to_curvilinear(pts);
    REQUIRE(res.points.size() == 2);
    CHECK(res.points[0].s == doctest::Approx(1.0));
    CHECK(res.points[1].s == doctest::Approx(2.0));
    CHECK(res.points[0].theta == doctest::Approx(0.0));
    CHECK(res.points[1].theta == doctest::Approx(0.0));
    CHECK(res.origin.anchor.x == 0.0);
    CHECK(res.origin.theta0 == doctest::Approx(0.0));
}

TEST_CASE("to_curvilinear: vertical segment") {
    const std::vector<CartesianPoint> pts{{0, 0}, {0, 1}};
    const auto res = to_curvilinear(pts);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].s == doctest::Approx(1.0));
    CHECK(res.points[0].theta == doctest::Approx(kPi / 2));
}

TEST_CASE("to_curvilinear: errors") {
    CHECK_THROWS_AS(to_curvilinear(std::vector<CartesianPoint>{{1, 1}}), TooFewPoints);
    CHECK_THROWS_AS(to_curvilinear(std::vector<CartesianPoint>{{0, 0}, {0, 0}, {1, 0}}), DuplicatePoint);
}

TEST_CASE("to_curvilinear: circle oracle") {
    // 100 points over 1 rad of a radius-10 circle; closed form: theta grows
    // linearly with arc length at slope 1/R
    const auto pts = circle_points(10.0, 1.0, 100);
    const auto res = to_curvilinear(pts);
    const double s1 = res.points.front().s;
    for (const auto& p : res.points) {
        const double expected = res.origin.theta0 + (p.s - s1) / 10.0;
        CHECK(std::abs(p.theta - expected) < 1e-3);
    }
}

TEST_CASE("to_curvilinear: theta unwraps across +-pi") {
    // half circle starting westward: raw segment angles cross the pi seam
    const auto pts = circle_points(10.0, kPi, 80, kPi / 2 + 0.3);
    const auto res = to_curvilinear(pts);
    for (std::size_t i = 1; i < res.points.size(); ++i)
        CHECK(std::abs(res.points[i].theta - res.points[i - 1].theta) < 0.5);
    CHECK(std::abs(res.points.back().theta - res.points.front().theta) ==
          doctest::Approx(kPi).epsilon(0.01));
}

TEST_CASE("eval_poly: direct evaluations") {
    CHECK(eval_poly({{0, 0, 0, 0.5}, 0, 10}, 7.0) == doctest::Approx(0.5));
    CHECK(eval_poly({{0, 0, 0.1, 0}, 0, 10}, 2.0) == doctest::Approx(0.2));
    CHECK(eval_poly({{1, 1, 1, 1}, 0, 10}, 2.0) == doctest::Approx(15.0));
    const PolyModel m{{0, 0, 0, 0}, 0.0, 5.0};
    CHECK(m.in_domain(3.0));
    CHECK_FALSE(m.in_domain(7.0));  // extrapolation is flagged, not forbidden
}

TEST_CASE("reconstruct_cartesian: axis and constant heading") {
    const CurveOrigin origin{{0, 0}, 0};
    const std::vector<double> s{1.0, 2.0};
    const auto pts = reconstruct_cartesian({{0, 0, 0, 0}, 0, 2}, origin, s);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == doctest::Approx(1.0));
    CHECK(pts[0].y == doctest::Approx(0.0));
    CHECK(pts[1].x == doctest::Approx(2.0));

    const auto up = reconstruct_cartesian({{0, 0, 0, kPi / 2}, 0, 1}, origin, std::vector<double>{1.0});
    CHECK(std::abs(up[0].x) < 1e-6);
    CHECK(std::abs(up[0].y - 1.0) < 1e-6);
}

TEST_CASE("reconstruct_cartesian: quarter circle oracle") {
    // theta(s) = s/10 traces a radius-10 circle; quarter turn ends at (10, 10)
    const CurveOrigin origin{{0, 0}, 0};
    const std::vector<double> s{kPi * 10.0 / 2.0};
    const auto pts = reconstruct_cartesian({{0, 0, 0.1, 0}, 0, 16}, origin, s);
    CHECK(std::abs(pts[0].x - 10.0) < 1e-3);
    CHECK(std::abs(pts[0].y - 10.0) < 1e-3);
}

TEST_CASE("reconstruct_cartesian: empty request throws") {
    CHECK_THROWS_AS(reconstruct_cartesian({{0, 0, 0, 0}, 0, 1}, {{0, 0}, 0}, std::vector<double>{}),
                    EmptySamples);
}

TEST_CASE("fit_spline: collinear points stay collinear") {
    std::vector<CartesianPoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({0.7 * i, 0.3 * 0.7 * i});
    const auto res = fit_spline(pts);
    for (const auto& p : res) CHECK(std::abs(p.y - 0.3 * p.x) < 1e-9);
}

TEST_CASE("fit_spline: parabola oracle") {
    std::vector<CartesianPoint> pts;
    for (double x = 0.0; x <= 3.0 + 1e-9; x += 0.5) pts.push_back({x, x * x});
    const auto res = fit_spline(pts);
    CHECK(res.size() > 10);
    for (const auto& p : res) CHECK(std::abs(p.y - p.x * p.x) < 1e-3);
}

TEST_CASE("fit_spline: too few points") {
    CHECK_THROWS_AS(fit_spline(std::vector<CartesianPoint>{{0, 0}, {1, 0}, {2, 0}}), TooFewPoints);
}

TEST_CASE("fit_spline: resampling spacing is uniform") {
    std::vector<CartesianPoint> pts;
    for (double x = 0.0; x <= 12.0 + 1e-9; x += 0.6) pts.push_back({x, std::sin(0.3 * x)});
    const auto res = fit_spline(pts);
    for (std::size_t i = 1; i + 1 < res.size(); ++i)
        CHECK(distance(res[i], res[i - 1]) == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("property: round trip through reconstruction") {
    // models with road-like coefficients reproduce their theta at segment
    // midpoints after reconstruct + to_curvilinear
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        PolyModel model;
        model.w = {rng.uniform(-2e-5, 2e-5), rng.uniform(-5e-4, 5e-4),
                   rng.uniform(-0.05, 0.05), rng.uniform(-0.5, 0.5)};
        model.s_min = 0.0;
        model.s_max = 30.0;
        const CurveOrigin origin{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, 0.0};

        std::vector<double> s;
        for (double v = 0.25; v <= 30.0; v += 0.25) s.push_back(v);
        const auto pts = reconstruct_cartesian(model, origin, s);

        std::vector<CartesianPoint> with_anchor{origin.anchor};
        with_anchor.insert(with_anchor.end(), pts.begin(), pts.end());
        const auto curvi = to_curvilinear(with_anchor);
        for (std::size_t i = 0; i < curvi.points.size(); ++i) {
            const double mid = curvi.points[i].s - 0.125;
            CHECK(std::abs(wrap_pi(curvi.points[i].theta - eval_poly(model, mid))) < 2e-2);
        }
    }
}

TEST_CASE("property: arc-length additivity over concatenation") {
    Rng rng(7);
    std::vector<CartesianPoint> a, b;
    CartesianPoint p{0, 0};
    for (int i = 0; i < 12; ++i) {
        a.push_back(p);
        p = p + CartesianPoint{rng.uniform(0.2, 1.0), rng.uniform(-0.4, 0.4)};
    }
    b.push_back(a.back());
    for (int i = 0; i < 9; ++i) {
        p = p + CartesianPoint{rng.uniform(0.2, 1.0), rng.uniform(-0.4, 0.4)};
        b.push_back(p);
    }
    std::vector<CartesianPoint> joined = a;
    joined.insert(joined.end(), b.begin() + 1, b.end());

    const double sa = to_curvilinear(a).points.back().s;
    const double sb = to_curvilinear(b).points.back().s;
    const double sj = to_curvilinear(joined).points.back().s;
    CHECK(sj == doctest::Approx(sa + sb).epsilon(1e-15));
}

TEST_CASE("property: rigid invariance") {
    Rng rng(13);
    std::vector<CartesianPoint> pts;
    CartesianPoint p{0, 0};
    for (int i = 0; i < 30; ++i) {
        pts.push_back(p);
        p = p + CartesianPoint{rng.uniform(0.2, 1.0), rng.uniform(-0.5, 0.5)};
    }
    const auto base = to_curvilinear(pts);

    const double angle = 1.1;
    const CartesianPoint shift{3.0, -2.0};
    std::vector<CartesianPoint> moved;
    for (const auto& q : pts) moved.push_back(rotate(q, angle) + shift);
    const auto rot = to_curvilinear(moved);

    REQUIRE(rot.points.size() == base.points.size());
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        CHECK(std::abs(rot.points[i].s - base.points[i].s) <= 1e-12 * base.points[i].s);
        CHECK(std::abs(wrap_pi(rot.points[i].theta - base.points[i].theta - angle)) < 1e-12);
    }
}

TEST_CASE("property: circle slope 1/R across radii") {
    for (double radius : {5.0, 20.0, 100.0, 500.0}) {
        const double sweep = std::min(1.2, 40.0 / radius);
        const auto pts = circle_points(radius, sweep, 60);
        const auto res = to_curvilinear(pts);
        const double slope = fit_slope(res.points);
        CHECK(std::abs(slope - 1.0 / radius) < 0.01 / radius);
    }
}
