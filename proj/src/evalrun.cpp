#include "lanekit/evalrun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lanekit/errors.hpp"

namespace lanekit {

Pipeline::Pipeline(const LanetrackConfig& tracker, const CenterlineConfig& centerline,
                   const EkfConfig& ekf)
    : tracker_cfg_(tracker), ekf_cfg_(ekf), center_(centerline) {
    left_ = make_line_track(tracker);
    right_ = make_line_track(tracker);
    ekf_state_ = ekf_init(ekf, 4.0);
}

WlfPrior Pipeline::make_prior(double lookahead) const {
    WlfPrior prior;
    auto sample = [&](const LineTrack& track, std::vector<CartesianPoint>& out) {
        if (track.buffer.size() < 4 || track.status == LineStatus::lost) return;
        const PolyModel model = rls_model(track.rls, 0.0, lookahead);
        std::vector<double> s;
        for (double v = 0.0; v <= lookahead; v += 1.0) s.push_back(v);
        out = reconstruct_cartesian(model, track.origin, s);
    };
    sample(left_, prior.left);
    sample(right_, prior.right);
    return prior;
}

FrameEstimate Pipeline::step(const Detections& det, const OdometryDelta& odo,
                             LineStatus left_status, LineStatus right_status) {
    FrameEstimate est;
    est.frame = frame_index_++;

    left_ = prune(propagate(std::move(left_), odo), tracker_cfg_.prune_behind);
    right_ = prune(propagate(std::move(right_), odo), tracker_cfg_.prune_behind);
    center_.propagate(odo);

    FitOutput left_fit = ingest_and_fit(std::move(left_), det.left_points, tracker_cfg_);
    FitOutput right_fit = ingest_and_fit(std::move(right_), det.right_points, tracker_cfg_);
    left_ = std::move(left_fit.track);
    right_ = std::move(right_fit.track);
    est.left_status = left_.status == LineStatus::lost ? LineStatus::lost : left_status;
    est.right_status = right_.status == LineStatus::lost ? LineStatus::lost : right_status;

    const double w_est = ekf_ready_ ? ekf_state_.w_lane : 4.0;

    LineFrameInput left_in, right_in;
    if (left_fit.model && left_.status != LineStatus::lost) {
        left_in.model = &*left_fit.model;
        left_in.origin = &left_.origin;
        left_in.curvi = left_fit.curvi;
        left_in.smoothed = left_fit.smoothed;
    }
    if (right_fit.model && right_.status != LineStatus::lost) {
        right_in.model = &*right_fit.model;
        right_in.origin = &right_.origin;
        right_in.curvi = right_fit.curvi;
        right_in.smoothed = right_fit.smoothed;
    }
    const bool have_centerline = center_.update(left_in, right_in, w_est);

    const CartesianPoint cm{0.0, 0.0};
    std::optional<FootSolution> foot;
    if (have_centerline && center_.model())
        foot = solve_foot(*center_.model(), center_.origin(), cm);

    const auto lane_points = measure_lane_points(left_in.model, left_in.origin,
                                                 right_in.model, right_in.origin,
                                                 cm, w_est);
    if (lane_points) {
        if (!ekf_ready_) {
            double w0 = 4.0;
            if (lane_points->left_valid && lane_points->right_valid)
                w0 = distance(lane_points->p_left, lane_points->p_right);
            ekf_state_ = ekf_init(ekf_cfg_, w0);
            ekf_ready_ = true;
        }
        ekf_state_ = ekf_predict(std::move(ekf_state_), ekf_cfg_);
        ekf_state_ = ekf_update(std::move(ekf_state_), *lane_points, cm, ekf_cfg_);
        if (lane_points->left_valid || lane_points->right_valid)
            frames_since_measurement_ = 0;
    } else {
        if (ekf_ready_) ekf_state_ = ekf_predict(std::move(ekf_state_), ekf_cfg_);
        frames_since_measurement_ = std::min(frames_since_measurement_ + 1, 1000);
    }

    if (foot && ekf_ready_ && frames_since_measurement_ <= tracker_cfg_.max_lost) {
        const RelPose pose = ekf_to_relpose(ekf_state_);
        est.available = true;
        est.theta_est = pose.theta;
        est.delta_est = pose.delta;
    }
    return est;
}

RunResult run_scenario(const ScenarioConfig& config) {
    config.track.validate();
    const TrackGeometry geometry(config.track);
    const double travel = config.frames * config.speed / config.frame_rate;
    if (travel + config.detection.range > geometry.length())
        throw ConfigError("scenario: track is shorter than the driven distance plus detection range");

    const TrackPolylines polylines = build_track(config.track, config.ds);
    const std::vector<TrajectoryFrame> frames = simulate_trajectory(
        geometry, config.style, config.speed, config.frame_rate, config.frames,
        config.odometry_noise, config.seed);

    Pipeline pipeline(config.tracker, config.centerline, config.ekf);
    RunResult result;
    result.estimates.reserve(frames.size());

    for (std::size_t k = 0; k < frames.size(); ++k) {
        Detections det;
        LineStatus left_status = LineStatus::tracked;
        LineStatus right_status = LineStatus::tracked;

        if (config.mode == DetectionMode::points) {
            Rng rng = Rng::derive(config.seed, /*stream=*/2, k);
            det = render_detections(frames[k].truth, polylines, config.detection, rng);
        } else {
            MaskGrid grid;
            if (config.mode == DetectionMode::raster) {
                Rng rng = Rng::derive(config.seed, /*stream=*/2, k);
                const Detections raw = render_detections(frames[k].truth, polylines, config.detection, rng);
                grid = rasterize_detections(raw, config.grid);
            } else {
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%06zu.pgm", k);
                const Raster raster = read_pgm(config.masks_dir / name);
                if (config.homography) {
                    grid = ipm_project(raster, CameraModel{*config.homography}, make_grid(config.grid));
                } else {
                    grid = make_grid(config.grid);
                    if (raster.width != grid.width || raster.height != grid.height)
                        throw ConfigError("scenario: mask size does not match the configured grid");
                    grid.values = raster.values;
                }
            }
            grid = clean_mask(grid, config.mask_threshold, config.mask_open_radius);
            const WlfPrior prior = pipeline.make_prior(config.detection.range);
            const bool has_prior = !prior.left.empty() || !prior.right.empty();
            const WlfResult wlf = wlf_select(grid, config.wlf, has_prior ? &prior : nullptr);
            det.left_points = wlf.left.points;
            det.right_points = wlf.right.points;
            left_status = wlf.left.status;
            right_status = wlf.right.status;
        }

        result.estimates.push_back(pipeline.step(det, frames[k].odo, left_status, right_status));
    }
    result.frames = frames;
    return result;
}

EvalReport compute_report(std::span<const FrameEstimate> estimates,
                          std::span<const TruthSample> truths) {
    if (estimates.size() != truths.size())
        throw LengthMismatch("compute_report: estimate and truth series differ in length");

    EvalReport report;
    report.n_frames = static_cast<int>(estimates.size());
    double sum_theta = 0.0, sum_delta = 0.0;
    int available = 0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (!estimates[i].available) continue;
        ++available;
        sum_theta += std::abs(wrap_pi(estimates[i].theta_est - truths[i].theta_true));
        sum_delta += std::abs(estimates[i].delta_est - truths[i].delta_true);
    }
    if (available > 0) {
        report.mae_theta_deg = sum_theta / available * 180.0 / std::numbers::pi;
        report.mae_delta_m = sum_delta / available;
    }
    if (!estimates.empty())
        report.avail_pct = 100.0 * available / static_cast<double>(estimates.size());
    return report;
}

std::string format_report_row(const EvalReport& report) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.3f, %.3f, %.2f",
                  report.mae_theta_deg, report.mae_delta_m, report.avail_pct);
    return buf;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

LineStatus status_from_string(const std::string& s) {
    if (s == "tracked") return LineStatus::tracked;
    if (s == "recovered") return LineStatus::recovered;
    return LineStatus::lost;
}

}  // namespace

void write_estimates_csv(const std::filesystem::path& path,
                         std::span<const FrameEstimate> estimates) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "frame,available,theta_est,delta_est,left_status,right_status\n";
    for (const FrameEstimate& e : estimates) {
        out << e.frame << ',' << (e.available ? 1 : 0) << ',';
        if (e.available) out << fmt(e.theta_est) << ',' << fmt(e.delta_est);
        else out << ',';
        out << ',' << to_string(e.left_status) << ',' << to_string(e.right_status) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<FrameEstimate> read_estimates_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<FrameEstimate> estimates;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 6) throw IoError("malformed estimates row in " + path.string());
        FrameEstimate e;
        e.frame = std::stoi(fields[0]);
        e.available = fields[1] == "1";
        if (e.available) {
            e.theta_est = std::stod(fields[2]);
            e.delta_est = std::stod(fields[3]);
        }
        e.left_status = status_from_string(fields[4]);
        e.right_status = status_from_string(fields[5]);
        estimates.push_back(e);
    }
    return estimates;
}

void write_truth_csv(const std::filesystem::path& path,
                     std::span<const TrajectoryFrame> frames) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "frame,x,y,psi,theta_true,delta_true,odo_dx,odo_dy,odo_dpsi\n";
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const TrajectoryFrame& f = frames[k];
        out << k << ',' << fmt(f.truth.pose.position.x) << ',' << fmt(f.truth.pose.position.y)
            << ',' << fmt(f.truth.pose.heading) << ',' << fmt(f.truth.theta_true) << ','
            << fmt(f.truth.delta_true) << ',' << fmt(f.odo.dx) << ',' << fmt(f.odo.dy) << ','
            << fmt(f.odo.dpsi) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TruthRecord> read_truth_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<TruthRecord> records;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 9) throw IoError("malformed truth row in " + path.string());
        TruthRecord r;
        r.frame = std::stoi(fields[0]);
        r.pose.position = {std::stod(fields[1]), std::stod(fields[2])};
        r.pose.heading = std::stod(fields[3]);
        r.truth.theta_true = std::stod(fields[4]);
        r.truth.delta_true = std::stod(fields[5]);
        r.odo = {std::stod(fields[6]), std::stod(fields[7]), std::stod(fields[8])};
        records.push_back(r);
    }
    return records;
}

}  // namespace lanekit
