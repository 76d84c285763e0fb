#include <fstream>
#include <json.hpp>

#include "lanekit/errors.hpp"
#include "lanekit/evalrun.hpp"

namespace lanekit {

namespace {

using nlohmann::json;

TrackSpec parse_track(const json& j) {
    TrackSpec spec;
    spec.lane_width = j.value("lane_width", 4.0);
    if (!j.contains("segments") || !j["segments"].is_array())
        throw ConfigError("scenario: track.segments must be an array");
    for (const auto& seg_json : j["segments"]) {
        TrackSegment seg;
        const std::string kind = seg_json.value("kind", "straight");
        if (kind == "straight") seg.kind = TrackSegment::Kind::straight;
        else if (kind == "arc") seg.kind = TrackSegment::Kind::arc;
        else throw ConfigError("scenario: unknown segment kind: " + kind);
        seg.length = seg_json.value("length", 0.0);
        seg.curvature = seg_json.value("curvature", 0.0);
        spec.segments.push_back(seg);
    }
    return spec;
}

StyleParams parse_style(const json& j) {
    if (j.is_string()) return StyleParams::parse(j.get<std::string>());
    StyleParams style = StyleParams::parse(j.value("name", "centered"));
    style.amplitude = j.value("amplitude", style.amplitude);
    style.wavelength = j.value("wavelength", style.wavelength);
    style.max_heading_deg = j.value("max_heading_deg", style.max_heading_deg);
    style.edge_fraction = j.value("edge_fraction", style.edge_fraction);
    style.transition_length = j.value("transition_length", style.transition_length);
    return style;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
    }

    try {
        ScenarioConfig cfg;
        cfg.seed = j.value("seed", std::uint64_t{1});
        cfg.frames = j.value("frames", 100);
        cfg.speed = j.value("speed", 8.0);
        cfg.frame_rate = j.value("frame_rate", 10.0);
        cfg.ds = j.value("ds", 0.5);
        if (!j.contains("track")) throw ConfigError("scenario: missing track");
        cfg.track = parse_track(j["track"]);
        if (j.contains("style")) cfg.style = parse_style(j["style"]);

        if (j.contains("detection")) {
            const auto& d = j["detection"];
            cfg.detection.noise = d.value("noise", 0.0);
            cfg.detection.dropout = d.value("dropout", 0.0);
            cfg.detection.range = d.value("range", 30.0);
            cfg.detection.lateral_range = d.value("lateral_range", 12.0);
        }
        cfg.odometry_noise = j.value("odometry_noise", 0.0);

        const std::string mode = j.value("mode", "points");
        if (mode == "points") cfg.mode = DetectionMode::points;
        else if (mode == "raster") cfg.mode = DetectionMode::raster;
        else if (mode == "files") cfg.mode = DetectionMode::files;
        else throw ConfigError("scenario: unknown mode: " + mode);
        if (j.contains("masks_dir")) cfg.masks_dir = j["masks_dir"].get<std::string>();
        if (cfg.mode == DetectionMode::files && cfg.masks_dir.empty())
            throw ConfigError("scenario: files mode requires masks_dir");
        if (j.contains("homography")) {
            const auto& h = j["homography"];
            if (!h.is_array() || h.size() != 3) throw ConfigError("scenario: homography must be 3x3");
            Eigen::Matrix3d m;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) m(r, c) = h[r][c].get<double>();
            cfg.homography = m;
        }

        if (j.contains("grid")) {
            const auto& g = j["grid"];
            cfg.grid.x_min = g.value("x_min", cfg.grid.x_min);
            cfg.grid.x_max = g.value("x_max", cfg.grid.x_max);
            cfg.grid.y_min = g.value("y_min", cfg.grid.y_min);
            cfg.grid.y_max = g.value("y_max", cfg.grid.y_max);
            cfg.grid.resolution = g.value("resolution", cfg.grid.resolution);
            cfg.grid.disc_radius = g.value("disc_radius", cfg.grid.disc_radius);
        }
        cfg.mask_threshold = j.value("mask_threshold", 128);
        cfg.mask_open_radius = j.value("mask_open_radius", 1);

        if (j.contains("tracker")) {
            const auto& t = j["tracker"];
            cfg.tracker.mu = t.value("mu", cfg.tracker.mu);
            cfg.tracker.prior_scale = t.value("prior_scale", cfg.tracker.prior_scale);
            cfg.tracker.prune_behind = t.value("prune_behind", cfg.tracker.prune_behind);
            cfg.tracker.max_lost = t.value("max_lost", cfg.tracker.max_lost);
            cfg.tracker.min_point_spacing = t.value("min_point_spacing", cfg.tracker.min_point_spacing);
            cfg.tracker.spline_spacing = t.value("spline_spacing", cfg.tracker.spline_spacing);
        }
        if (j.contains("centerline")) {
            const auto& c = j["centerline"];
            cfg.centerline.kappa_min = c.value("kappa_min", cfg.centerline.kappa_min);
            cfg.centerline.paper_literal_ratio = c.value("paper_literal_ratio", false);
            cfg.centerline.mu = c.value("mu", cfg.centerline.mu);
            cfg.centerline.prior_scale = c.value("prior_scale", cfg.centerline.prior_scale);
        }
        if (j.contains("ekf")) {
            const auto& e = j["ekf"];
            if (e.contains("q")) {
                const auto& q = e["q"];
                for (int i = 0; i < 3; ++i) cfg.ekf.q[i] = q[i].get<double>();
            }
            cfg.ekf.r = e.value("r", cfg.ekf.r);
            if (e.contains("p0")) {
                const auto& p = e["p0"];
                for (int i = 0; i < 3; ++i) cfg.ekf.p0[i] = p[i].get<double>();
            }
            cfg.ekf.imputed_noise_factor = e.value("imputed_noise_factor", cfg.ekf.imputed_noise_factor);
        }
        if (j.contains("wlf")) {
            const auto& w = j["wlf"];
            cfg.wlf.window_width = w.value("window_width", cfg.wlf.window_width);
            cfg.wlf.window_height = w.value("window_height", cfg.wlf.window_height);
            cfg.wlf.min_points = w.value("min_points", cfg.wlf.min_points);
            cfg.wlf.max_windows = w.value("max_windows", cfg.wlf.max_windows);
            cfg.wlf.seed_band_height = w.value("seed_band_height", cfg.wlf.seed_band_height);
            cfg.wlf.recovery_radius = w.value("recovery_radius", cfg.wlf.recovery_radius);
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: bad field: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario(text);
}

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
    json j;
    j["mae_theta_deg"] = report.mae_theta_deg;
    j["mae_delta_m"] = report.mae_delta_m;
    j["avail_pct"] = report.avail_pct;
    j["n_frames"] = report.n_frames;
    j["row"] = format_report_row(report);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace lanekit
