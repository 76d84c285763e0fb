#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lanekit/curvilinear.hpp"
#include "lanekit/perceive.hpp"
#include "lanekit/rls.hpp"
#include "lanekit/synthtrack.hpp"

namespace lanekit {

struct LanetrackConfig {
    double mu = 0.95;
    double prior_scale = 1e6;
    double prune_behind = 8.0;       // keep points up to this far behind [m]
    int max_lost = 5;                // empty frames before the tracker resets
    double min_point_spacing = 0.1;  // closer points are merged [m]
    double spline_spacing = 0.25;    // resampling step of the pre-fit [m]
};

struct BufferedPoint {
    CartesianPoint p;
    int age = 0;          // frames since detection
    bool refreshed = false;  // touched by this frame's detections
};

/// Temporal state of one lateral line: accumulated points, the RLS tracker
/// over the curvilinear model, and loss bookkeeping. Single writer per line.
struct LineTrack {
    RlsState rls;
    std::vector<BufferedPoint> buffer;
    CurveOrigin origin;
    LineStatus status = LineStatus::lost;
    int lost_frames = 0;
};

LineTrack make_line_track(const LanetrackConfig& cfg);

/// Transform the accumulated points by the inverse vehicle motion so they
/// stay fixed in the world, increment ages, re-anchor the origin.
LineTrack propagate(LineTrack track, const OdometryDelta& odo);

/// Drop points more than `prune_behind` meters behind the vehicle.
LineTrack prune(LineTrack track, double prune_behind);

struct FitOutput {
    LineTrack track;
    std::optional<PolyModel> model;
    std::vector<CartesianPoint> smoothed;  // spline-resampled buffer polyline
    std::vector<CurviPoint> curvi;         // curvilinear trace of `smoothed`
};

/// Merge new detections into the buffer, spline pre-fit, convert to the
/// curvilinear frame and update the RLS with this frame's observations.
/// Empty detections advance the loss counter; after max_lost empty frames
/// the tracker resets.
FitOutput ingest_and_fit(LineTrack track, std::span<const CartesianPoint> new_points,
                         const LanetrackConfig& cfg);

}  // namespace lanekit
