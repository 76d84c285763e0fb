#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lanekit/centerline.hpp"
#include "lanekit/lanetrack.hpp"
#include "lanekit/perceive.hpp"
#include "lanekit/pose.hpp"
#include "lanekit/synthtrack.hpp"

namespace lanekit {

/// How the per-frame feature points reach the pipeline.
enum class DetectionMode {
    points,  // noisy points straight from the simulator
    raster,  // simulator masks run through clean_mask + WLF
    files,   // PGM masks read from disk (masks_dir)
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    int frames = 100;
    double speed = 8.0;
    double frame_rate = 10.0;
    double ds = 0.5;  // track sampling step [m]

    TrackSpec track;
    StyleParams style;
    DetectionConfig detection;
    double odometry_noise = 0.0;

    DetectionMode mode = DetectionMode::points;
    std::filesystem::path masks_dir;
    std::optional<Eigen::Matrix3d> homography;  // image px -> BEV cells (files mode)
    GridSpec grid;
    int mask_threshold = 128;
    int mask_open_radius = 1;

    LanetrackConfig tracker;
    CenterlineConfig centerline;
    EkfConfig ekf;
    WlfConfig wlf;
};

ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& json_text);

struct FrameEstimate {
    int frame = 0;
    bool available = false;
    double theta_est = 0.0;  // radians; meaningful only when available
    double delta_est = 0.0;  // meters; meaningful only when available
    LineStatus left_status = LineStatus::lost;
    LineStatus right_status = LineStatus::lost;
};

/// Full per-frame pipeline: lateral-line tracking, centerline fit, pose EKF.
/// Feed detections (already in the vehicle frame) and odometry in frame order.
class Pipeline {
public:
    Pipeline(const LanetrackConfig& tracker, const CenterlineConfig& centerline,
             const EkfConfig& ekf);

    FrameEstimate step(const Detections& det, const OdometryDelta& odo,
                       LineStatus left_status = LineStatus::tracked,
                       LineStatus right_status = LineStatus::tracked);

    const LineTrack& left_track() const { return left_; }
    const LineTrack& right_track() const { return right_; }
    const std::optional<PolyModel>& centerline_model() const { return center_.model(); }
    const CurveOrigin& centerline_origin() const { return center_.origin(); }
    const EkfState& ekf_state() const { return ekf_state_; }

    /// Expected lateral-line polylines for WLF seeding, from the current models.
    WlfPrior make_prior(double lookahead) const;

private:
    LanetrackConfig tracker_cfg_;
    EkfConfig ekf_cfg_;
    LineTrack left_;
    LineTrack right_;
    CenterlineTracker center_;
    EkfState ekf_state_;
    bool ekf_ready_ = false;
    int frames_since_measurement_ = 1000;
    int frame_index_ = 0;
};

struct RunResult {
    std::vector<FrameEstimate> estimates;
    std::vector<TrajectoryFrame> frames;  // ground truth and odometry
};

/// Deterministic scenario run. Throws ConfigError for inconsistent configs
/// and IoError when file ingestion fails.
RunResult run_scenario(const ScenarioConfig& config);

struct EvalReport {
    double mae_theta_deg = 0.0;
    double mae_delta_m = 0.0;
    double avail_pct = 0.0;
    int n_frames = 0;
};

struct TruthSample {
    double theta_true = 0.0;
    double delta_true = 0.0;
};

/// MAE over available frames (degrees / meters) plus availability.
/// Throws LengthMismatch when the series differ in length.
EvalReport compute_report(std::span<const FrameEstimate> estimates,
                          std::span<const TruthSample> truths);

/// Table-row rendering: MAE_theta, MAE_delta, availability with 3/3/2 decimals.
std::string format_report_row(const EvalReport& report);

// ---- run-directory files ----

void write_estimates_csv(const std::filesystem::path& path,
                         std::span<const FrameEstimate> estimates);
std::vector<FrameEstimate> read_estimates_csv(const std::filesystem::path& path);

void write_truth_csv(const std::filesystem::path& path,
                     std::span<const TrajectoryFrame> frames);
struct TruthRecord {
    int frame = 0;
    VehiclePose pose;
    TruthSample truth;
    OdometryDelta odo;
};
std::vector<TruthRecord> read_truth_csv(const std::filesystem::path& path);

void write_report_json(const std::filesystem::path& path, const EvalReport& report);

}  // namespace lanekit
