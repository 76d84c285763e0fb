#include "lanekit/rls.hpp"

#include <cmath>

#include "lanekit/errors.hpp"

namespace lanekit {

namespace {

// The factors live in the rescaled basis phi(s / 32): raw meter-scale cubic
// terms would still stretch the factor conditioning needlessly. The power-of-
// two scale makes the change of basis exact, so the public w and R keep their
// unscaled meaning.
constexpr double kBasisScale = 32.0;
const Eigen::Vector4d kBasisDiag{kBasisScale * kBasisScale * kBasisScale,
                                 kBasisScale * kBasisScale, kBasisScale, 1.0};

// Bierman UD measurement update for R = U diag(d) U^T with unit measurement
// noise. Returns the gain K = R_new * phi.
Eigen::Vector4d ud_update(Eigen::Matrix4d& U, Eigen::Vector4d& d, const Eigen::Vector4d& phi) {
    const Eigen::Vector4d f = U.transpose() * phi;
    const Eigen::Vector4d g = d.cwiseProduct(f);

    Eigen::Vector4d b = Eigen::Vector4d::Zero();
    double alpha = 1.0 + f[0] * g[0];
    d[0] *= 1.0 / alpha;
    b[0] = g[0];
    for (int j = 1; j < 4; ++j) {
        const double beta = alpha;
        alpha += f[j] * g[j];
        const double lambda = -f[j] / beta;
        d[j] *= beta / alpha;
        for (int i = 0; i < j; ++i) {
            const double u_ij = U(i, j);
            U(i, j) = u_ij + b[i] * lambda;
            b[i] += g[j] * u_ij;
        }
        b[j] = g[j];
    }
    return b / alpha;
}

Eigen::Matrix4d reconstruct_dense(const Eigen::Matrix4d& U, const Eigen::Vector4d& d) {
    const Eigen::Matrix4d R = U * d.asDiagonal() * U.transpose();
    return 0.5 * (R + R.transpose());
}

}  // namespace

RlsState rls_init(double mu, double prior_scale) {
    if (!(mu > 0.0 && mu <= 1.0))
        throw InvalidMu("rls_init: forgetting factor must be in (0, 1]");
    if (!(prior_scale > 0.0) || !std::isfinite(prior_scale))
        throw InvalidScale("rls_init: prior_scale must be positive");
    RlsState state;
    state.w.setZero();
    state.R = prior_scale * Eigen::Matrix4d::Identity();
    state.mu = mu;
    state.U.setIdentity();
    state.d = prior_scale * kBasisDiag.cwiseProduct(kBasisDiag);
    return state;
}

RlsState rls_update(RlsState state, std::span<const Observation> frame) {
    if (frame.empty())
        throw EmptyFrame("rls_update: empty observation frame");

    Eigen::Vector4d w = kBasisDiag.cwiseProduct(state.w);

    bool first = true;
    for (const Observation& obs : frame) {
        const double mu_eff = first ? state.mu : 1.0;
        first = false;

        const Eigen::Vector4d phi = poly_basis(obs.s / kBasisScale);
        const double err = obs.theta - w.dot(phi);

        Eigen::Matrix4d U_new = state.U;
        Eigen::Vector4d d_new = state.d / mu_eff;  // forgetting inflates R first
        const Eigen::Vector4d gain = ud_update(U_new, d_new, phi);
        const Eigen::Vector4d w_new = w + err * gain;

        if (!w_new.allFinite() || !U_new.allFinite() || !d_new.allFinite() ||
            (d_new.array() <= 0.0).any()) {
            ++state.rejected_points;
            continue;
        }
        state.U = U_new;
        state.d = d_new;
        w = w_new;
    }

    state.w = w.cwiseQuotient(kBasisDiag);
    const Eigen::Vector4d d_inv = kBasisDiag.cwiseInverse();
    state.R = d_inv.asDiagonal() * reconstruct_dense(state.U, state.d) * d_inv.asDiagonal();
    return state;
}

PolyModel rls_model(const RlsState& state, double s_min, double s_max) {
    PolyModel model;
    model.w = {state.w[0], state.w[1], state.w[2], state.w[3]};
    model.s_min = s_min;
    model.s_max = s_max;
    return model;
}

}  // namespace lanekit
