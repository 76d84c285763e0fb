#pragma once

#include <optional>
#include <span>

#include "lanekit/curvilinear.hpp"
#include "lanekit/rls.hpp"
#include "lanekit/synthtrack.hpp"

namespace lanekit {

struct CenterlineConfig {
    double kappa_min = 1.0 / 2000.0;  // below this the road counts as straight
    bool paper_literal_ratio = false; // reproduce the uncorrected ratio direction
    double mu = 0.95;
    double prior_scale = 1e6;
};

/// Shared-center-of-curvature geometry binding one lateral line to the
/// centerline frame.
struct CurvatureFrame {
    CartesianPoint center;  // C, common center of curvature
    double R_c = 0.0;       // centerline radius
    double R_l = 0.0;       // lateral-line radius
    double ratio = 1.0;     // arc-length rescaling applied to the line
    double s_c0 = 0.0;      // centerline arc offset of the line's first point
};

/// Center of curvature of the previous centerline, from its heading and
/// radius of curvature at s = 0. Empty when the road is effectively straight
/// (|d theta/d s| < kappa_min).
std::optional<CartesianPoint> estimate_center(const PolyModel& prev_centerline,
                                              const CurveOrigin& origin,
                                              double kappa_min);

/// Steps 2-10 of the shared-center procedure for one lateral line.
CurvatureFrame make_curvature_frame(const PolyModel& prev_centerline,
                                    const CurveOrigin& prev_origin,
                                    CartesianPoint center,
                                    const CurveOrigin& line_origin,
                                    bool paper_literal_ratio = false);

/// Collapse curvilinear line points onto the centerline frame:
/// s_c = s_c0 + ratio * s_l, theta unchanged. Throws TooFewPoints.
std::vector<CurviPoint> project_to_centerline(std::span<const CurviPoint> line_pts,
                                              const CurveOrigin& line_origin,
                                              const CurvatureFrame& frame);

/// Straight-road limit (ratio -> 1): arc lengths are preserved and s_c0 comes
/// from the perpendicular foot of the line's first point on the previous
/// centerline.
std::vector<CurviPoint> degenerate_project(std::span<const CurviPoint> line_pts,
                                           const CurveOrigin& line_origin,
                                           const PolyModel& prev_centerline,
                                           const CurveOrigin& prev_origin);

struct CenterlineFit {
    RlsState rls;
    PolyModel model;
};

/// Merge the projected points of both lines, balance per-line counts so both
/// lines weigh equally, and run a single RLS update. Throws TooFewPoints when
/// fewer than 4 points are available in total.
CenterlineFit fit_centerline(std::span<const CurviPoint> left_proj,
                             std::span<const CurviPoint> right_proj,
                             RlsState rls);

/// Inputs the tracker needs from one lateral line on one frame.
struct LineFrameInput {
    const PolyModel* model = nullptr;
    const CurveOrigin* origin = nullptr;
    std::span<const CurviPoint> curvi;
    std::span<const CartesianPoint> smoothed;
};

/// Frame-to-frame centerline estimation: holds the previous centerline, runs
/// the projection of both lateral lines and the RLS fit, and re-anchors the
/// centerline origin between the measured lines.
class CenterlineTracker {
public:
    explicit CenterlineTracker(const CenterlineConfig& cfg);

    /// Advance the previous centerline by the vehicle motion.
    void propagate(const OdometryDelta& odo);

    /// Run one frame. lane_width_est places the anchor when only one line is
    /// available. Returns false if no centerline could be produced.
    bool update(const LineFrameInput& left, const LineFrameInput& right, double lane_width_est);

    const std::optional<PolyModel>& model() const { return model_; }
    const CurveOrigin& origin() const { return origin_; }
    void reset();

private:
    CenterlineConfig cfg_;
    RlsState rls_;
    std::optional<PolyModel> model_;
    CurveOrigin origin_;
};

}  // namespace lanekit
