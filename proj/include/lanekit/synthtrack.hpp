#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lanekit/geometry.hpp"
#include "lanekit/perceive.hpp"
#include "lanekit/random.hpp"

namespace lanekit {

struct TrackSegment {
    enum class Kind { straight, arc };
    Kind kind = Kind::straight;
    double length = 0.0;     // arc length [m]
    double curvature = 0.0;  // 1/m, 0 for straights, >0 turns left
};

struct TrackSpec {
    std::vector<TrackSegment> segments;
    double lane_width = 4.0;

    /// Throws InvalidSpec when a segment or the lane width is out of range.
    void validate() const;
    double total_length() const;
};

/// Pose of the centerline at an arc position.
struct TrackFrame {
    CartesianPoint position;
    double heading = 0.0;
    double curvature = 0.0;
};

/// Closed-form centerline queries for a straight+arc chain. Positions beyond
/// the chain extrapolate straight along the end tangents.
class TrackGeometry {
public:
    explicit TrackGeometry(TrackSpec spec);

    TrackFrame at(double u) const;
    double length() const { return length_; }
    const TrackSpec& spec() const { return spec_; }

private:
    TrackSpec spec_;
    std::vector<double> seg_start_u_;
    std::vector<Pose2> seg_start_pose_;
    double length_ = 0.0;
};

struct TrackPolylines {
    std::vector<CartesianPoint> centerline;
    std::vector<CartesianPoint> left_line;
    std::vector<CartesianPoint> right_line;
};

/// Sample the centerline every `ds` along arc length and offset the lateral
/// lines by +-lane_width/2 along the normal. Closed-form exact.
TrackPolylines build_track(const TrackSpec& spec, double ds);

struct VehiclePose {
    CartesianPoint position;  // world frame
    double heading = 0.0;
};

/// Per-frame ground truth for evaluation.
struct FrameTruth {
    VehiclePose pose;
    double theta_true = 0.0;   // centerline tangent in the vehicle frame
    double delta_true = 0.0;   // signed lateral displacement, paper sign rule
    std::vector<CartesianPoint> centerline_window;  // vehicle frame, ahead
};

/// Frame-to-frame rigid motion expressed in the previous vehicle frame.
struct OdometryDelta {
    double dx = 0.0;
    double dy = 0.0;
    double dpsi = 0.0;
};

struct StyleParams {
    enum class Name { centered, oscillating, racing };
    Name name = Name::centered;
    double amplitude = 1.0;        // oscillating: lateral amplitude [m]
    double wavelength = 50.0;      // oscillating [m]
    double max_heading_deg = 40.0; // oscillating: allowed peak heading deviation
    double edge_fraction = 0.8;    // racing: fraction of half lane width
    double transition_length = 15.0;  // racing: blend length between sides [m]

    static StyleParams parse(const std::string& name);
};

struct TrajectoryFrame {
    FrameTruth truth;
    OdometryDelta odo;  // motion from the previous frame; zeros at frame 0
};

/// Drive the reference path with the prescribed lateral-offset profile.
/// Poses and (theta_true, delta_true) are exact; odometry is the exact
/// frame-to-frame motion plus zero-mean Gaussian noise of relative scale
/// `odometry_noise` per component.
std::vector<TrajectoryFrame> simulate_trajectory(const TrackGeometry& track,
                                                 const StyleParams& style,
                                                 double speed,
                                                 double frame_rate,
                                                 int n_frames,
                                                 double odometry_noise,
                                                 std::uint64_t seed);

struct DetectionConfig {
    double noise = 0.0;          // isotropic Gaussian sigma [m]
    double dropout = 0.0;        // independent drop probability
    double range = 30.0;         // forward visibility [m]
    double lateral_range = 12.0; // lateral visibility [m]
};

struct Detections {
    std::vector<CartesianPoint> left_points;
    std::vector<CartesianPoint> right_points;
};

/// Lateral-line points visible from the vehicle, in the vehicle frame,
/// perturbed and dropped according to the config.
Detections render_detections(const FrameTruth& truth, const TrackPolylines& track,
                             const DetectionConfig& cfg, Rng& rng);

/// Stamp detections into a BEV grid as filled discs.
MaskGrid rasterize_detections(const Detections& det, const GridSpec& grid_spec);

}  // namespace lanekit
