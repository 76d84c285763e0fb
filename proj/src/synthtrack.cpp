#include "lanekit/synthtrack.hpp"

#include <algorithm>
#include <cmath>

#include "lanekit/errors.hpp"

namespace lanekit {

void TrackSpec::validate() const {
    if (segments.empty())
        throw InvalidSpec("track: needs at least one segment");
    if (!(lane_width >= 3.0 && lane_width <= 12.0))
        throw InvalidSpec("track: lane width must be in [3, 12] m");
    for (const auto& seg : segments) {
        if (!(seg.length > 0.0))
            throw InvalidSpec("track: segment length must be positive");
        if (std::abs(seg.curvature) > 0.2)
            throw InvalidSpec("track: |curvature| must be <= 0.2 1/m");
        if (seg.kind == TrackSegment::Kind::arc && seg.curvature == 0.0)
            throw InvalidSpec("track: arc segment needs nonzero curvature");
        if (seg.kind == TrackSegment::Kind::straight && seg.curvature != 0.0)
            throw InvalidSpec("track: straight segment must have zero curvature");
    }
}

double TrackSpec::total_length() const {
    double total = 0.0;
    for (const auto& seg : segments) total += seg.length;
    return total;
}

namespace {

// Closed-form pose advance along one constant-curvature piece.
Pose2 advance(const Pose2& start, double curvature, double ds) {
    Pose2 out;
    if (curvature == 0.0) {
        out.position = start.position + ds * heading_dir(start.heading);
        out.heading = start.heading;
    } else {
        const double next = start.heading + curvature * ds;
        out.position.x = start.position.x + (std::sin(next) - std::sin(start.heading)) / curvature;
        out.position.y = start.position.y - (std::cos(next) - std::cos(start.heading)) / curvature;
        out.heading = next;
    }
    return out;
}

}  // namespace

TrackGeometry::TrackGeometry(TrackSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    Pose2 pose{{0.0, 0.0}, 0.0};
    double u = 0.0;
    for (const auto& seg : spec_.segments) {
        seg_start_u_.push_back(u);
        seg_start_pose_.push_back(pose);
        pose = advance(pose, seg.curvature, seg.length);
        u += seg.length;
    }
    seg_start_u_.push_back(u);
    seg_start_pose_.push_back(pose);
    length_ = u;
}

TrackFrame TrackGeometry::at(double u) const {
    if (u <= 0.0) {
        const Pose2 p = advance(seg_start_pose_.front(), 0.0, u);
        return {p.position, p.heading, 0.0};
    }
    if (u >= length_) {
        const Pose2 p = advance(seg_start_pose_.back(), 0.0, u - length_);
        return {p.position, p.heading, 0.0};
    }
    const auto it = std::upper_bound(seg_start_u_.begin(), seg_start_u_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - seg_start_u_.begin()) - 1;
    const std::size_t seg = std::min(i, spec_.segments.size() - 1);
    const Pose2 p = advance(seg_start_pose_[seg], spec_.segments[seg].curvature, u - seg_start_u_[seg]);
    return {p.position, p.heading, spec_.segments[seg].curvature};
}

TrackPolylines build_track(const TrackSpec& spec, double ds) {
    if (!(ds > 0.0 && ds <= 1.0))
        throw InvalidSpec("build_track: ds must be in (0, 1]");
    const TrackGeometry geo(spec);

    TrackPolylines lines;
    const double half = spec.lane_width / 2.0;
    const int n = static_cast<int>(std::floor(geo.length() / ds + 1e-9));
    lines.centerline.reserve(n + 1);
    lines.left_line.reserve(n + 1);
    lines.right_line.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const TrackFrame f = geo.at(i * ds);
        const CartesianPoint normal = left_normal(f.heading);
        lines.centerline.push_back(f.position);
        lines.left_line.push_back(f.position + half * normal);
        lines.right_line.push_back(f.position - half * normal);
    }
    return lines;
}

StyleParams StyleParams::parse(const std::string& name) {
    StyleParams style;
    if (name == "centered") style.name = Name::centered;
    else if (name == "oscillating") style.name = Name::oscillating;
    else if (name == "racing") style.name = Name::racing;
    else throw InvalidStyle("unknown driving style: " + name);
    return style;
}

namespace {

// Lateral offset profile d(u) and its derivative for a driving style.
class OffsetProfile {
public:
    OffsetProfile(const TrackGeometry& track, const StyleParams& style) : style_(style) {
        const double half = track.spec().lane_width / 2.0;
        switch (style.name) {
            case StyleParams::Name::centered:
                break;
            case StyleParams::Name::oscillating: {
                if (!(style.amplitude > 0.0) || !(style.wavelength > 0.0))
                    throw InvalidStyle("oscillating: amplitude and wavelength must be positive");
                if (style.amplitude > 0.9 * half)
                    throw InvalidStyle("oscillating: amplitude exceeds the lane");
                const double peak_deg = std::atan(2.0 * std::numbers::pi * style.amplitude / style.wavelength) * 180.0 / std::numbers::pi;
                if (peak_deg > style.max_heading_deg + 1e-9)
                    throw InvalidStyle("oscillating: peak heading deviation above the configured limit");
                break;
            }
            case StyleParams::Name::racing: {
                if (!(style.edge_fraction > 0.0 && style.edge_fraction < 1.0))
                    throw InvalidStyle("racing: edge_fraction must be in (0, 1)");
                build_racing_targets(track, style.edge_fraction * half);
                break;
            }
        }
    }

    double offset(double u) const {
        switch (style_.name) {
            case StyleParams::Name::centered: return 0.0;
            case StyleParams::Name::oscillating:
                return style_.amplitude * std::sin(2.0 * std::numbers::pi * u / style_.wavelength);
            case StyleParams::Name::racing: return racing_offset(u);
        }
        return 0.0;
    }

    double slope(double u) const {
        switch (style_.name) {
            case StyleParams::Name::centered: return 0.0;
            case StyleParams::Name::oscillating: {
                const double k = 2.0 * std::numbers::pi / style_.wavelength;
                return style_.amplitude * k * std::cos(k * u);
            }
            case StyleParams::Name::racing: return racing_slope(u);
        }
        return 0.0;
    }

private:
    void build_racing_targets(const TrackGeometry& track, double edge) {
        const auto& segments = track.spec().segments;
        targets_.resize(segments.size());
        // arcs hug the inside; straights hold the previous side
        double current = 0.0;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].kind == TrackSegment::Kind::arc)
                current = (segments[i].curvature > 0.0 ? edge : -edge);
            else if (i == 0) {
                for (const auto& seg : segments)
                    if (seg.kind == TrackSegment::Kind::arc) {
                        current = (seg.curvature > 0.0 ? edge : -edge);
                        break;
                    }
            }
            targets_[i] = current;
        }
        boundaries_.clear();
        half_blend_.clear();
        double u = 0.0;
        for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
            u += segments[i].length;
            boundaries_.push_back(u);
            const double limit = 0.4 * std::min(segments[i].length, segments[i + 1].length);
            half_blend_.push_back(std::min(0.5 * style_.transition_length, limit));
        }
        track_length_ = track.length();
    }

    // piecewise-constant targets joined by smoothstep blends at boundaries
    double racing_offset(double u) const {
        for (std::size_t j = 0; j < boundaries_.size(); ++j) {
            const double b = boundaries_[j], h = half_blend_[j];
            if (u > b - h && u < b + h) {
                const double t = (u - (b - h)) / (2.0 * h);
                const double sstep = t * t * (3.0 - 2.0 * t);
                return targets_[j] + (targets_[j + 1] - targets_[j]) * sstep;
            }
        }
        return targets_[segment_of(u)];
    }

    double racing_slope(double u) const {
        for (std::size_t j = 0; j < boundaries_.size(); ++j) {
            const double b = boundaries_[j], h = half_blend_[j];
            if (u > b - h && u < b + h) {
                const double t = (u - (b - h)) / (2.0 * h);
                return (targets_[j + 1] - targets_[j]) * (6.0 * t * (1.0 - t)) / (2.0 * h);
            }
        }
        return 0.0;
    }

    std::size_t segment_of(double u) const {
        std::size_t seg = 0;
        while (seg < boundaries_.size() && u >= boundaries_[seg]) ++seg;
        return seg;
    }

    StyleParams style_;
    std::vector<double> targets_;
    std::vector<double> boundaries_;
    std::vector<double> half_blend_;
    double track_length_ = 0.0;
};

}  // namespace

std::vector<TrajectoryFrame> simulate_trajectory(const TrackGeometry& track,
                                                 const StyleParams& style,
                                                 double speed,
                                                 double frame_rate,
                                                 int n_frames,
                                                 double odometry_noise,
                                                 std::uint64_t seed) {
    if (!(speed >= 1.0 && speed <= 20.0))
        throw InvalidSpec("simulate_trajectory: speed must be in [1, 20] m/s");
    if (!(frame_rate >= 1.0 && frame_rate <= 100.0))
        throw InvalidSpec("simulate_trajectory: frame_rate must be in [1, 100] Hz");
    if (n_frames <= 0)
        throw InvalidSpec("simulate_trajectory: need at least one frame");

    const OffsetProfile profile(track, style);
    const double du = speed / frame_rate;
    constexpr double window_length = 30.0;
    constexpr double window_ds = 0.5;

    std::vector<TrajectoryFrame> frames;
    frames.reserve(n_frames);
    Rng odo_rng = Rng::derive(seed, /*stream=*/1);

    VehiclePose prev_pose;
    for (int k = 0; k < n_frames; ++k) {
        const double u = k * du;
        const TrackFrame c = track.at(u);
        const double d = profile.offset(u);
        const double dp = profile.slope(u);
        const double denom = 1.0 - c.curvature * d;
        if (denom <= 0.05)
            throw InvalidStyle("offset profile crosses the curvature center");

        TrajectoryFrame frame;
        frame.truth.pose.position = c.position + d * left_normal(c.heading);
        const double slip = std::atan2(dp, denom);
        frame.truth.pose.heading = wrap_pi(c.heading + slip);
        frame.truth.theta_true = wrap_pi(-slip);
        frame.truth.delta_true = -d;

        const Pose2 vehicle{frame.truth.pose.position, frame.truth.pose.heading};
        const int n_window = static_cast<int>(window_length / window_ds);
        frame.truth.centerline_window.reserve(n_window + 1);
        for (int j = 0; j <= n_window; ++j)
            frame.truth.centerline_window.push_back(to_frame(vehicle, track.at(u + j * window_ds).position));

        if (k > 0) {
            const Pose2 prev{prev_pose.position, prev_pose.heading};
            const CartesianPoint dlocal = to_frame(prev, frame.truth.pose.position);
            OdometryDelta odo{dlocal.x, dlocal.y, wrap_pi(frame.truth.pose.heading - prev_pose.heading)};
            if (odometry_noise > 0.0) {
                odo.dx += odo_rng.normal(0.0, odometry_noise * std::abs(odo.dx));
                odo.dy += odo_rng.normal(0.0, odometry_noise * std::abs(odo.dy));
                odo.dpsi += odo_rng.normal(0.0, odometry_noise * std::abs(odo.dpsi));
            }
            frame.odo = odo;
        }
        prev_pose = frame.truth.pose;
        frames.push_back(std::move(frame));
    }
    return frames;
}

Detections render_detections(const FrameTruth& truth, const TrackPolylines& track,
                             const DetectionConfig& cfg, Rng& rng) {
    if (!(cfg.range > 5.0 && cfg.range <= 50.0))
        throw InvalidSpec("render_detections: range must be in (5, 50] m");
    if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
        throw InvalidSpec("render_detections: dropout must be in [0, 1)");

    const Pose2 vehicle{truth.pose.position, truth.pose.heading};
    Detections det;
    auto render_line = [&](const std::vector<CartesianPoint>& world, std::vector<CartesianPoint>& out) {
        for (const CartesianPoint& p : world) {
            const CartesianPoint local = to_frame(vehicle, p);
            if (local.x < 0.0 || local.x > cfg.range || std::abs(local.y) > cfg.lateral_range)
                continue;
            if (cfg.dropout > 0.0 && rng.uniform() < cfg.dropout) continue;
            CartesianPoint q = local;
            if (cfg.noise > 0.0) {
                q.x += rng.normal(0.0, cfg.noise);
                q.y += rng.normal(0.0, cfg.noise);
            }
            out.push_back(q);
        }
    };
    render_line(track.left_line, det.left_points);
    render_line(track.right_line, det.right_points);
    return det;
}

MaskGrid rasterize_detections(const Detections& det, const GridSpec& grid_spec) {
    MaskGrid grid = make_grid(grid_spec);
    const int r_cells = std::max(1, static_cast<int>(std::lround(grid_spec.disc_radius / grid.resolution)));
    auto stamp = [&](const std::vector<CartesianPoint>& points) {
        for (const CartesianPoint& p : points) {
            int u, v;
            if (!grid.cell_of(p, u, v)) continue;
            for (int dv = -r_cells; dv <= r_cells; ++dv)
                for (int du = -r_cells; du <= r_cells; ++du) {
                    if (du * du + dv * dv > r_cells * r_cells) continue;
                    if (grid.in_bounds(u + du, v + dv)) grid.set(u + du, v + dv, 255);
                }
        }
    };
    stamp(det.left_points);
    stamp(det.right_points);
    return grid;
}

}  // namespace lanekit
