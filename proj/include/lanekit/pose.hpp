#pragma once

#include <Eigen/Dense>
#include <optional>

#include "lanekit/curvilinear.hpp"

namespace lanekit {

/// The centerline point whose tangent is orthogonal to its connection with
/// the vehicle's center of mass.
struct FootSolution {
    double s_tilde = 0.0;
    CartesianPoint foot;    // O_c
    double tangent = 0.0;   // theta(s_tilde)
};

/// Vehicle pose relative to the centerline: heading and signed lateral
/// displacement (positive when the centerline is to the vehicle's left).
struct RelPose {
    double theta = 0.0;
    double delta = 0.0;
};

/// Intersections of the lateral lines with the perpendicular through the CM.
/// An invalid side carries an imputed point mirrored from the other line.
struct LanePointPair {
    CartesianPoint p_left;
    CartesianPoint p_right;
    bool left_valid = false;
    bool right_valid = false;
};

struct EkfConfig {
    Eigen::Vector3d q{1e-4, 1e-4, 1e-3};   // process noise diag per frame
    double r = 0.05 * 0.05;                // measurement noise per component [m^2]
    Eigen::Vector3d p0{0.1, 0.1, 1.0};     // initial covariance diag
    double imputed_noise_factor = 10.0;    // R inflation for mirrored points
    double w_min = 2.0;
    double w_max = 15.0;
};

/// EKF state over (theta, rho, w_lane): relative heading, signed normalized
/// offset and lane width.
struct EkfState {
    double theta = 0.0;
    double rho = 0.0;
    double w_lane = 4.0;
    Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
};

/// Find s minimizing |(P(s) - cm) . tangent(s)| by sampling every
/// `sample_step` over the model domain, bracketing sign changes and bisecting;
/// the root nearest s = 0 wins. Empty when no perpendicular foot exists in
/// the domain (pose unavailable this frame).
std::optional<FootSolution> solve_foot(const PolyModel& model, const CurveOrigin& origin,
                                       CartesianPoint cm, double sample_step = 0.25);

/// Theta/Delta from a foot solution; the sign of delta follows the foot's
/// lateral coordinate.
RelPose rel_pose(const FootSolution& sol, CartesianPoint cm);

/// Feet of the perpendiculars from the CM onto each available lateral line.
/// A missing side is imputed by shifting the detected line across the lane
/// (local parallelism). Empty when neither side yields a foot.
std::optional<LanePointPair> measure_lane_points(const PolyModel* left_model,
                                                 const CurveOrigin* left_origin,
                                                 const PolyModel* right_model,
                                                 const CurveOrigin* right_origin,
                                                 CartesianPoint cm,
                                                 double lane_width_est);

EkfState ekf_init(const EkfConfig& cfg, double w0);

/// Random-walk prediction: mean unchanged, P += Q.
EkfState ekf_predict(EkfState state, const EkfConfig& cfg);

/// EKF correction with the lane-point measurement, Joseph-form covariance
/// update; imputed sides enter with inflated measurement noise.
EkfState ekf_update(EkfState state, const LanePointPair& z, CartesianPoint cm,
                    const EkfConfig& cfg);

RelPose ekf_to_relpose(const EkfState& state);

/// Measurement function h(x) = (P_L, P_R) as a 4-vector (xL, yL, xR, yR).
Eigen::Vector4d pose_measurement(const Eigen::Vector3d& x, CartesianPoint cm);

/// Analytic 4x3 Jacobian of the measurement function.
Eigen::Matrix<double, 4, 3> pose_measurement_jacobian(const Eigen::Vector3d& x);

}  // namespace lanekit
