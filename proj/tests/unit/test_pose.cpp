#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lanekit/errors.hpp"
#include "lanekit/pose.hpp"
#include "lanekit/random.hpp"

using namespace lanekit;

namespace {

constexpr double kPi = std::numbers::pi;

// straight lane implied by an EKF state: centerline through the h-midpoint
// with direction theta
PolyModel line_model_through(CartesianPoint p, double theta, double back = 20.0, double ahead = 20.0) {
    PolyModel m;
    m.w = {0.0, 0.0, 0.0, theta};
    m.s_min = 0.0;
    m.s_max = back + ahead;
    return m;
}

CurveOrigin origin_behind(CartesianPoint p, double theta, double back = 20.0) {
    return {{p.x - back * std::cos(theta), p.y - back * std::sin(theta)}, theta};
}

}  // namespace

TEST_CASE("solve_foot: orthogonal projection onto the x-axis") {
    const PolyModel model{{0, 0, 0, 0}, 0.0, 10.0};
    const CurveOrigin origin{{0.0, 0.0}, 0.0};
    const auto sol = solve_foot(model, origin, {3.0, -1.0});
    REQUIRE(sol.has_value());
    CHECK(sol->s_tilde == doctest::Approx(3.0));
    CHECK(sol->foot.x == doctest::Approx(3.0));
    CHECK(std::abs(sol->foot.y) < 1e-9);
    CHECK(sol->tangent == doctest::Approx(0.0));
}

TEST_CASE("solve_foot: quarter circle oracle") {
    // theta(s) = s/10 is the circle around (0, 10); foot of a point near the
    // center lands on the nearest circle point
    const PolyModel model{{0, 0, 0.1, 0}, 0.0, kPi * 10.0 / 2.0};
    const CurveOrigin origin{{0.0, 0.0}, 0.0};
    const CartesianPoint cm{1.0, 9.0};  // close to the center, toward the curve start
    const auto sol = solve_foot(model, origin, cm);
    REQUIRE(sol.has_value());

    // oracle: exact circle projection
    const CartesianPoint center{0.0, 10.0};
    const CartesianPoint dir = (1.0 / distance(cm, center)) * (cm - center);
    const CartesianPoint expected = center + 10.0 * dir;
    CHECK(distance(sol->foot, expected) < 1e-4);
    const double g = dot(sol->foot - cm, heading_dir(sol->tangent));
    CHECK(std::abs(g) < 1e-6);
}

TEST_CASE("solve_foot: no root when the domain is ahead of the vehicle") {
    const PolyModel model{{0, 0, 0, 0}, 0.0, 10.0};
    const CurveOrigin origin{{5.0, 0.0}, 0.0};  // curve lives at x in [5, 15]
    CHECK_FALSE(solve_foot(model, origin, {-3.0, 1.0}).has_value());
}

TEST_CASE("rel_pose: sign convention") {
    FootSolution sol;
    sol.s_tilde = 0.0;
    sol.tangent = 0.0;
    sol.foot = {0.0, 1.0};
    CHECK(rel_pose(sol, {0.0, 0.0}).delta == doctest::Approx(1.0));
    sol.foot = {0.0, -1.0};
    CHECK(rel_pose(sol, {0.0, 0.0}).delta == doctest::Approx(-1.0));
}

TEST_CASE("measure_lane_points: straight lane and mirroring") {
    const PolyModel left = line_model_through({0.0, 2.0}, 0.0);
    const PolyModel right = line_model_through({0.0, -2.0}, 0.0);
    const CurveOrigin lo = origin_behind({0.0, 2.0}, 0.0);
    const CurveOrigin ro = origin_behind({0.0, -2.0}, 0.0);

    auto both = measure_lane_points(&left, &lo, &right, &ro, {0.0, 0.0}, 4.0);
    REQUIRE(both.has_value());
    CHECK(both->left_valid);
    CHECK(both->right_valid);
    CHECK(both->p_left.y == doctest::Approx(2.0));
    CHECK(both->p_right.y == doctest::Approx(-2.0));
    CHECK(std::abs(both->p_left.x) < 1e-6);

    auto left_only = measure_lane_points(&left, &lo, nullptr, nullptr, {0.0, 0.0}, 4.0);
    REQUIRE(left_only.has_value());
    CHECK(left_only->left_valid);
    CHECK_FALSE(left_only->right_valid);
    CHECK(left_only->p_right.y == doctest::Approx(-2.0));  // mirrored 4 m across

    CHECK_FALSE(measure_lane_points(nullptr, nullptr, nullptr, nullptr, {0, 0}, 4.0).has_value());
}

TEST_CASE("ekf_predict: random walk covariance growth") {
    EkfConfig cfg;
    EkfState state = ekf_init(cfg, 4.0);
    const EkfState same = ekf_predict(state, EkfConfig{.q = Eigen::Vector3d::Zero()});
    CHECK((same.P - state.P).norm() == 0.0);
    CHECK(same.theta == state.theta);

    const double trace0 = state.P.trace();
    EkfState grown = state;
    for (int k = 0; k < 100; ++k) grown = ekf_predict(std::move(grown), cfg);
    CHECK(grown.P.trace() == doctest::Approx(trace0 + 100.0 * cfg.q.sum()));
}

TEST_CASE("ekf_update: exact measurement is a fixed point") {
    EkfConfig cfg;
    EkfState state = ekf_init(cfg, 4.0);  // truth: theta=0, rho=0, w=4
    const Eigen::Vector4d z = pose_measurement({0.0, 0.0, 4.0}, {0.0, 0.0});
    CHECK(z[0] == doctest::Approx(0.0));
    CHECK(z[1] == doctest::Approx(2.0));
    CHECK(z[2] == doctest::Approx(0.0));
    CHECK(z[3] == doctest::Approx(-2.0));

    LanePointPair pair;
    pair.p_left = {z[0], z[1]};
    pair.p_right = {z[2], z[3]};
    pair.left_valid = pair.right_valid = true;
    for (int k = 0; k < 5; ++k) state = ekf_update(std::move(state), pair, {0.0, 0.0}, cfg);
    CHECK(std::abs(state.theta) < 1e-9);
    CHECK(std::abs(state.rho) < 1e-9);
    CHECK(std::abs(state.w_lane - 4.0) < 1e-9);
}

TEST_CASE("ekf_update: converges to the generating state") {
    EkfConfig cfg;
    const Eigen::Vector3d truth{0.1, 0.25, 4.0};
    const Eigen::Vector4d z = pose_measurement(truth, {0.0, 0.0});
    LanePointPair pair;
    pair.p_left = {z[0], z[1]};
    pair.p_right = {z[2], z[3]};
    pair.left_valid = pair.right_valid = true;

    EkfState state = ekf_init(cfg, 3.0);
    for (int k = 0; k < 50; ++k) {
        state = ekf_predict(std::move(state), cfg);
        state = ekf_update(std::move(state), pair, {0.0, 0.0}, cfg);
    }
    CHECK(std::abs(state.theta - truth[0]) < 1e-3);
    CHECK(std::abs(state.rho - truth[1]) < 1e-3);
    CHECK(std::abs(state.w_lane - truth[2]) < 1e-2);
}

TEST_CASE("ekf jacobian matches central differences") {
    Rng rng(17);
    double max_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Vector3d x{rng.uniform(-1.2, 1.2), rng.uniform(-0.9, 0.9), rng.uniform(2.5, 12.0)};
        const Eigen::Matrix<double, 4, 3> J = pose_measurement_jacobian(x);
        const double eps = 1e-6;
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d hi = x, lo = x;
            hi[j] += eps;
            lo[j] -= eps;
            const Eigen::Vector4d diff =
                (pose_measurement(hi, {0, 0}) - pose_measurement(lo, {0, 0})) / (2 * eps);
            max_err = std::max(max_err, (diff - J.col(j)).cwiseAbs().maxCoeff());
        }
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("ekf_to_relpose: sign and magnitude") {
    EkfState state;
    state.theta = 0.0;
    state.rho = 0.0;
    state.w_lane = 10.0;
    CHECK(ekf_to_relpose(state).delta == doctest::Approx(0.0));

    state.rho = 0.5;
    state.w_lane = 4.0;
    CHECK(ekf_to_relpose(state).delta == doctest::Approx(-1.0));

    state.theta = 0.2;
    state.rho = -0.3;
    state.w_lane = 10.0;
    const RelPose pose = ekf_to_relpose(state);
    CHECK(pose.delta == doctest::Approx(1.5));
    CHECK(pose.theta == doctest::Approx(0.2));
}

TEST_CASE("property: h and rel_pose agree on the sign convention") {
    // reconstruct the exact geometry implied by h(x) and check that the foot
    // solve recovers (theta, -rho w / 2)
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const double theta = rng.uniform(-1.2, 1.2);
        const double rho = rng.uniform(-0.9, 0.9);
        const double w = rng.uniform(2.5, 12.0);
        const Eigen::Vector4d z = pose_measurement({theta, rho, w}, {0.0, 0.0});
        const CartesianPoint mid{0.5 * (z[0] + z[2]), 0.5 * (z[1] + z[3])};

        const PolyModel center_model = line_model_through(mid, theta);
        const CurveOrigin center_origin = origin_behind(mid, theta);
        const auto sol = solve_foot(center_model, center_origin, {0.0, 0.0});
        REQUIRE(sol.has_value());
        const RelPose pose = rel_pose(*sol, {0.0, 0.0});
        CHECK(std::abs(wrap_pi(pose.theta - theta)) < 1e-6);
        CHECK(std::abs(pose.delta - (-0.5 * rho * w)) < 1e-6);
    }
}

TEST_CASE("property: covariance stays symmetric positive semidefinite") {
    EkfConfig cfg;
    Rng rng(33);
    EkfState state = ekf_init(cfg, 4.0);
    for (int k = 0; k < 10000; ++k) {
        state = ekf_predict(std::move(state), cfg);
        const Eigen::Vector3d truth{0.3 * std::sin(k * 0.01), 0.4 * std::cos(k * 0.003), 4.0};
        Eigen::Vector4d z = pose_measurement(truth, {0.0, 0.0});
        for (int i = 0; i < 4; ++i) z[i] += rng.normal(0.0, 0.05);
        LanePointPair pair;
        pair.p_left = {z[0], z[1]};
        pair.p_right = {z[2], z[3]};
        pair.left_valid = pair.right_valid = true;
        state = ekf_update(std::move(state), pair, {0.0, 0.0}, cfg);

        if (k % 100 == 0) {
            CHECK((state.P - state.P.transpose()).cwiseAbs().maxCoeff() < 1e-9);
            const Eigen::Vector3d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(state.P).eigenvalues();
            CHECK(eig.minCoeff() > -1e-9);
        }
    }
}

TEST_CASE("property: one dropped line keeps the offset error bounded") {
    // steady state with both lines, then 10 frames with the right line lost;
    // the delta error must stay below twice its two-line level
    EkfConfig cfg;
    Rng rng(55);
    const Eigen::Vector3d truth{0.05, 0.3, 4.0};
    const double delta_true = -0.5 * truth[1] * truth[2];

    EkfState state = ekf_init(cfg, 4.0);
    auto measure = [&](bool right_valid) {
        Eigen::Vector4d z = pose_measurement(truth, {0.0, 0.0});
        for (int i = 0; i < 4; ++i) z[i] += rng.normal(0.0, 0.03);
        LanePointPair pair;
        pair.p_left = {z[0], z[1]};
        pair.left_valid = true;
        if (right_valid) {
            pair.p_right = {z[2], z[3]};
            pair.right_valid = true;
        } else {
            // mirror across the estimated width, as the pipeline does
            pair.p_right = pair.p_left - state.w_lane * left_normal(state.theta);
            pair.right_valid = false;
        }
        return pair;
    };

    double steady_err = 0.0;
    for (int k = 0; k < 300; ++k) {
        state = ekf_predict(std::move(state), cfg);
        state = ekf_update(std::move(state), measure(true), {0.0, 0.0}, cfg);
        if (k >= 200) steady_err += std::abs(ekf_to_relpose(state).delta - delta_true);
    }
    steady_err /= 100.0;

    double dropped_err = 0.0;
    for (int k = 0; k < 10; ++k) {
        state = ekf_predict(std::move(state), cfg);
        state = ekf_update(std::move(state), measure(false), {0.0, 0.0}, cfg);
        dropped_err = std::max(dropped_err, std::abs(ekf_to_relpose(state).delta - delta_true));
    }
    CHECK(dropped_err < 2.0 * std::max(steady_err, 0.01));
}
