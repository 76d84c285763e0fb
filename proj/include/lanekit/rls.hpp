#pragma once

#include <Eigen/Dense>
#include <span>

#include "lanekit/curvilinear.hpp"

namespace lanekit {

/// One (arc length, tangent angle) sample entering the tracker.
struct Observation {
    double s = 0.0;
    double theta = 0.0;
};

/// Exponentially-forgetting recursive least squares over the cubic basis
/// phi(s) = (s^3, s^2, s, 1).
///
/// State is a value: rls_update returns a new state, so one tracker per lane
/// line can run concurrently without shared mutability.
///
/// The inverse-Gram matrix is propagated in UD-factored form (R = U diag(d)
/// U^T over a rescaled basis): with non-informative priors the eigenvalues of
/// R span more orders of magnitude than a dense double matrix can carry, and
/// the factors keep the recursion exact where the dense form loses positive
/// definiteness. `R` always holds the reconstructed dense matrix. States
/// should be created by rls_init and evolved by rls_update.
struct RlsState {
    Eigen::Vector4d w = Eigen::Vector4d::Zero();
    Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
    double mu = 0.95;
    int rejected_points = 0;  // observations dropped by the numerical guard

    Eigen::Matrix4d U = Eigen::Matrix4d::Identity();  // unit upper triangular
    Eigen::Vector4d d = Eigen::Vector4d::Ones();      // diagonal of D
};

inline Eigen::Vector4d poly_basis(double s) {
    return {s * s * s, s * s, s, 1.0};
}

/// w = 0, R = prior_scale * I. Throws InvalidMu / InvalidScale.
RlsState rls_init(double mu, double prior_scale);

/// Apply the per-point recursion to a frame of observations, in order. The
/// forgetting factor acts exactly once per frame (on the first point); all
/// further points of the frame enter with unit weight. Throws EmptyFrame.
RlsState rls_update(RlsState state, std::span<const Observation> frame);

/// Package the current coefficients with a domain.
PolyModel rls_model(const RlsState& state, double s_min, double s_max);

}  // namespace lanekit
