#include "lanekit/centerline.hpp"

#include <algorithm>
#include <cmath>

#include "lanekit/errors.hpp"

namespace lanekit {

std::optional<CartesianPoint> estimate_center(const PolyModel& prev_centerline,
                                              const CurveOrigin& origin,
                                              double kappa_min) {
    const double kappa = eval_poly_slope(prev_centerline, 0.0);
    if (std::abs(kappa) < kappa_min) return std::nullopt;
    const double theta = eval_poly(prev_centerline, 0.0);
    const double R_c = 1.0 / std::abs(kappa);
    const double side = kappa > 0.0 ? 1.0 : -1.0;
    return origin.anchor + (side * R_c) * left_normal(theta);
}

CurvatureFrame make_curvature_frame(const PolyModel& prev_centerline,
                                    const CurveOrigin& prev_origin,
                                    CartesianPoint center,
                                    const CurveOrigin& line_origin,
                                    bool paper_literal_ratio) {
    CurvatureFrame frame;
    frame.center = center;
    const double kappa = eval_poly_slope(prev_centerline, 0.0);
    frame.R_c = 1.0 / std::abs(kappa);
    frame.R_l = distance(line_origin.anchor, center);

    // arc-length rescaling between concentric arcs; the literal variant keeps
    // the ratio direction exactly as stated in the source procedure
    frame.ratio = paper_literal_ratio ? frame.R_l / frame.R_c : frame.R_c / frame.R_l;

    // angle from the radial line through the previous centerline origin to the
    // radial line through the first line point, oriented along travel
    const double side = kappa > 0.0 ? 1.0 : -1.0;
    const CartesianPoint r0 = prev_origin.anchor - center;
    const CartesianPoint rl = line_origin.anchor - center;
    const double dtheta_l0 = wrap_pi(std::atan2(rl.y, rl.x) - std::atan2(r0.y, r0.x)) * side;
    frame.s_c0 = frame.R_c * dtheta_l0;
    return frame;
}

std::vector<CurviPoint> project_to_centerline(std::span<const CurviPoint> line_pts,
                                              const CurveOrigin& line_origin,
                                              const CurvatureFrame& frame) {
    (void)line_origin;
    if (line_pts.size() < 2)
        throw TooFewPoints("project_to_centerline: need at least 2 points");
    std::vector<CurviPoint> out;
    out.reserve(line_pts.size());
    for (const CurviPoint& p : line_pts)
        out.push_back({frame.s_c0 + frame.ratio * p.s, p.theta});
    return out;
}

std::vector<CurviPoint> degenerate_project(std::span<const CurviPoint> line_pts,
                                           const CurveOrigin& line_origin,
                                           const PolyModel& prev_centerline,
                                           const CurveOrigin& prev_origin) {
    const double theta_c = eval_poly(prev_centerline, 0.0);
    const double s_c0 = dot(line_origin.anchor - prev_origin.anchor, heading_dir(theta_c));
    std::vector<CurviPoint> out;
    out.reserve(line_pts.size());
    for (const CurviPoint& p : line_pts) out.push_back({s_c0 + p.s, p.theta});
    return out;
}

namespace {

// Evenly subsample `pts` down to `target` entries.
std::vector<CurviPoint> subsample(std::span<const CurviPoint> pts, std::size_t target) {
    if (pts.size() <= target) return {pts.begin(), pts.end()};
    std::vector<CurviPoint> out;
    out.reserve(target);
    for (std::size_t k = 0; k < target; ++k) {
        const std::size_t i = (k * (pts.size() - 1)) / (target - 1);
        out.push_back(pts[i]);
    }
    return out;
}

}  // namespace

CenterlineFit fit_centerline(std::span<const CurviPoint> left_proj,
                             std::span<const CurviPoint> right_proj,
                             RlsState rls) {
    std::vector<CurviPoint> left(left_proj.begin(), left_proj.end());
    std::vector<CurviPoint> right(right_proj.begin(), right_proj.end());
    if (!left.empty() && !right.empty()) {
        const std::size_t n = std::min(left.size(), right.size());
        left = subsample(left, n);
        right = subsample(right, n);
    }
    std::vector<CurviPoint> merged;
    merged.reserve(left.size() + right.size());
    merged.insert(merged.end(), left.begin(), left.end());
    merged.insert(merged.end(), right.begin(), right.end());
    if (merged.size() < 4)
        throw TooFewPoints("fit_centerline: need at least 4 projected points");
    std::sort(merged.begin(), merged.end(),
              [](const CurviPoint& a, const CurviPoint& b) { return a.s < b.s; });

    std::vector<Observation> obs;
    obs.reserve(merged.size());
    for (const CurviPoint& p : merged) obs.push_back({p.s, p.theta});

    CenterlineFit fit;
    fit.rls = rls_update(std::move(rls), obs);
    fit.model = rls_model(fit.rls, std::min(0.0, merged.front().s), merged.back().s);
    return fit;
}

CenterlineTracker::CenterlineTracker(const CenterlineConfig& cfg) : cfg_(cfg) {
    rls_ = rls_init(cfg.mu, cfg.prior_scale);
}

void CenterlineTracker::reset() {
    rls_ = rls_init(cfg_.mu, cfg_.prior_scale);
    model_.reset();
    origin_ = CurveOrigin{};
}

void CenterlineTracker::propagate(const OdometryDelta& odo) {
    if (!model_) return;
    const CartesianPoint t{odo.dx, odo.dy};
    origin_.anchor = rotate(origin_.anchor - t, -odo.dpsi);
    origin_.theta0 = wrap_pi(origin_.theta0 - odo.dpsi);
    model_->w[3] -= odo.dpsi;  // tangent angles rotate with the frame
}

namespace {

// Intersection of a polyline with the line through `p` along direction
// perpendicular to `heading` (points q with dot(q - p, heading_dir) == 0).
std::optional<CartesianPoint> cross_section(std::span<const CartesianPoint> polyline,
                                            CartesianPoint p, double heading) {
    if (polyline.size() < 2) return std::nullopt;
    const CartesianPoint t = heading_dir(heading);
    double f_prev = dot(polyline[0] - p, t);
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        const double f = dot(polyline[i] - p, t);
        if (f_prev == 0.0) return polyline[i - 1];
        if ((f_prev < 0.0) != (f < 0.0)) {
            const double a = f_prev / (f_prev - f);
            return polyline[i - 1] + a * (polyline[i] - polyline[i - 1]);
        }
        f_prev = f;
    }
    return std::nullopt;
}

PolyModel average_models(const PolyModel& a, const PolyModel& b) {
    PolyModel out;
    for (int i = 0; i < 4; ++i) out.w[i] = 0.5 * (a.w[i] + b.w[i]);
    out.s_min = std::min(a.s_min, b.s_min);
    out.s_max = std::max(a.s_max, b.s_max);
    return out;
}

}  // namespace

bool CenterlineTracker::update(const LineFrameInput& left, const LineFrameInput& right,
                               double lane_width_est) {
    const bool has_left = left.model && left.curvi.size() >= 2;
    const bool has_right = right.model && right.curvi.size() >= 2;
    if (!has_left && !has_right) return false;

    // bootstrap: mid-width average of the lateral models stands in for the
    // previous centerline on the first usable frame
    PolyModel prev;
    CurveOrigin prev_origin;
    if (model_) {
        prev = *model_;
        prev_origin = origin_;
    } else if (has_left && has_right) {
        prev = average_models(*left.model, *right.model);
        prev_origin.anchor = 0.5 * (left.origin->anchor + right.origin->anchor);
        prev_origin.theta0 = eval_poly(prev, 0.0);
    } else {
        const LineFrameInput& only = has_left ? left : right;
        const double side = has_left ? -1.0 : 1.0;
        prev = *only.model;
        prev_origin.anchor = only.origin->anchor +
                             (side * 0.5 * lane_width_est) * left_normal(only.origin->theta0);
        prev_origin.theta0 = only.origin->theta0;
    }

    const auto center = estimate_center(prev, prev_origin, cfg_.kappa_min);
    auto project = [&](const LineFrameInput& line) -> std::vector<CurviPoint> {
        if (center) {
            const CurvatureFrame frame = make_curvature_frame(prev, prev_origin, *center,
                                                              *line.origin, cfg_.paper_literal_ratio);
            return project_to_centerline(line.curvi, *line.origin, frame);
        }
        return degenerate_project(line.curvi, *line.origin, prev, prev_origin);
    };

    std::vector<CurviPoint> left_proj, right_proj;
    if (has_left) left_proj = project(left);
    if (has_right) right_proj = project(right);

    try {
        CenterlineFit fit = fit_centerline(left_proj, right_proj, std::move(rls_));
        rls_ = std::move(fit.rls);
        model_ = fit.model;
    } catch (const TooFewPoints&) {
        return false;
    }

    // re-anchor at the mid-lane crossing of the section through the previous
    // origin, so the Cartesian placement follows the measured lines
    const double section_heading = eval_poly(prev, 0.0);
    std::optional<CartesianPoint> a_left, a_right;
    if (has_left) a_left = cross_section(left.smoothed, prev_origin.anchor, section_heading);
    if (has_right) a_right = cross_section(right.smoothed, prev_origin.anchor, section_heading);
    if (a_left && a_right) {
        origin_.anchor = 0.5 * (*a_left + *a_right);
    } else if (a_left) {
        origin_.anchor = *a_left - (0.5 * lane_width_est) * left_normal(section_heading);
    } else if (a_right) {
        origin_.anchor = *a_right + (0.5 * lane_width_est) * left_normal(section_heading);
    } else {
        origin_.anchor = prev_origin.anchor;
    }
    origin_.theta0 = eval_poly(*model_, 0.0);
    return true;
}

}  // namespace lanekit
