#include "lanekit/pose.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lanekit {

std::optional<FootSolution> solve_foot(const PolyModel& model, const CurveOrigin& origin,
                                       CartesianPoint cm, double sample_step) {
    const CurveSampler curve(model, origin);
    const double lo = curve.lo(), hi = curve.hi();
    if (hi - lo < sample_step) return std::nullopt;

    auto g = [&](double s) {
        return dot(curve.point_at(s) - cm, heading_dir(eval_poly(model, s)));
    };

    const int n = static_cast<int>(std::ceil((hi - lo) / sample_step));
    std::vector<double> roots;
    double s_prev = lo;
    double g_prev = g(lo);
    for (int i = 1; i <= n; ++i) {
        const double s = std::min(lo + i * sample_step, hi);
        const double gi = g(s);
        if (g_prev == 0.0) {
            roots.push_back(s_prev);
        } else if ((g_prev < 0.0) != (gi < 0.0)) {
            double a = s_prev, b = s, ga = g_prev;
            while (b - a > 1e-9) {
                const double m = 0.5 * (a + b);
                const double gm = g(m);
                if (gm == 0.0) { a = b = m; break; }
                if ((ga < 0.0) != (gm < 0.0)) b = m;
                else { a = m; ga = gm; }
            }
            roots.push_back(0.5 * (a + b));
        }
        s_prev = s;
        g_prev = gi;
    }
    if (g_prev == 0.0) roots.push_back(s_prev);
    if (roots.empty()) return std::nullopt;

    const double s_tilde = *std::min_element(roots.begin(), roots.end(),
        [](double a, double b) { return std::abs(a) < std::abs(b); });

    FootSolution sol;
    sol.s_tilde = s_tilde;
    sol.foot = curve.point_at(s_tilde);
    sol.tangent = eval_poly(model, s_tilde);
    return sol;
}

RelPose rel_pose(const FootSolution& sol, CartesianPoint cm) {
    RelPose pose;
    pose.theta = wrap_pi(sol.tangent);
    const double dist = distance(sol.foot, cm);
    pose.delta = (sol.foot.y >= 0.0) ? dist : -dist;
    return pose;
}

std::optional<LanePointPair> measure_lane_points(const PolyModel* left_model,
                                                 const CurveOrigin* left_origin,
                                                 const PolyModel* right_model,
                                                 const CurveOrigin* right_origin,
                                                 CartesianPoint cm,
                                                 double lane_width_est) {
    std::optional<FootSolution> left, right;
    if (left_model && left_origin) left = solve_foot(*left_model, *left_origin, cm);
    if (right_model && right_origin) right = solve_foot(*right_model, *right_origin, cm);
    if (!left && !right) return std::nullopt;

    LanePointPair pair;
    if (left) {
        pair.p_left = left->foot;
        pair.left_valid = true;
    }
    if (right) {
        pair.p_right = right->foot;
        pair.right_valid = true;
    }
    if (!right) {
        // impose local parallelism: mirror the left line across the lane
        pair.p_right = left->foot - lane_width_est * left_normal(left->tangent);
    }
    if (!left) {
        pair.p_left = right->foot + lane_width_est * left_normal(right->tangent);
    }
    return pair;
}

EkfState ekf_init(const EkfConfig& cfg, double w0) {
    EkfState state;
    state.theta = 0.0;
    state.rho = 0.0;
    state.w_lane = std::clamp(w0, cfg.w_min, cfg.w_max);
    state.P = cfg.p0.asDiagonal();
    return state;
}

EkfState ekf_predict(EkfState state, const EkfConfig& cfg) {
    state.P += Eigen::Matrix3d(cfg.q.asDiagonal());
    return state;
}

Eigen::Vector4d pose_measurement(const Eigen::Vector3d& x, CartesianPoint cm) {
    const double theta = x[0], rho = x[1], w = x[2];
    const double st = std::sin(theta), ct = std::cos(theta);
    return {cm.x - 0.5 * w * (1.0 - rho) * st,
            cm.y + 0.5 * w * (1.0 - rho) * ct,
            cm.x + 0.5 * w * (1.0 + rho) * st,
            cm.y - 0.5 * w * (1.0 + rho) * ct};
}

Eigen::Matrix<double, 4, 3> pose_measurement_jacobian(const Eigen::Vector3d& x) {
    const double theta = x[0], rho = x[1], w = x[2];
    const double st = std::sin(theta), ct = std::cos(theta);
    Eigen::Matrix<double, 4, 3> J;
    J << -0.5 * w * (1.0 - rho) * ct,  0.5 * w * st, -0.5 * (1.0 - rho) * st,
         -0.5 * w * (1.0 - rho) * st, -0.5 * w * ct,  0.5 * (1.0 - rho) * ct,
          0.5 * w * (1.0 + rho) * ct,  0.5 * w * st,  0.5 * (1.0 + rho) * st,
          0.5 * w * (1.0 + rho) * st, -0.5 * w * ct, -0.5 * (1.0 + rho) * ct;
    return J;
}

EkfState ekf_update(EkfState state, const LanePointPair& z, CartesianPoint cm,
                    const EkfConfig& cfg) {
    const Eigen::Vector3d x{state.theta, state.rho, state.w_lane};
    const Eigen::Vector4d innovation =
        Eigen::Vector4d{z.p_left.x, z.p_left.y, z.p_right.x, z.p_right.y} - pose_measurement(x, cm);
    const Eigen::Matrix<double, 4, 3> H = pose_measurement_jacobian(x);

    Eigen::Vector4d r_diag;
    const double r_left = z.left_valid ? cfg.r : cfg.r * cfg.imputed_noise_factor;
    const double r_right = z.right_valid ? cfg.r : cfg.r * cfg.imputed_noise_factor;
    r_diag << r_left, r_left, r_right, r_right;
    const Eigen::Matrix4d R = r_diag.asDiagonal();

    const Eigen::Matrix4d S = H * state.P * H.transpose() + R;
    const Eigen::Matrix<double, 3, 4> K = state.P * H.transpose() * S.inverse();
    const Eigen::Vector3d x_new = x + K * innovation;

    const Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity() - K * H;
    Eigen::Matrix3d P = IKH * state.P * IKH.transpose() + K * R * K.transpose();
    state.P = 0.5 * (P + P.transpose());

    state.theta = wrap_pi(x_new[0]);
    state.rho = std::clamp(x_new[1], -0.999, 0.999);
    state.w_lane = std::clamp(x_new[2], cfg.w_min, cfg.w_max);
    return state;
}

RelPose ekf_to_relpose(const EkfState& state) {
    return {wrap_pi(state.theta), -0.5 * state.rho * state.w_lane};
}

}  // namespace lanekit
