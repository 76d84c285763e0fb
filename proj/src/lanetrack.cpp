#include "lanekit/lanetrack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lanekit/errors.hpp"

namespace lanekit {

LineTrack make_line_track(const LanetrackConfig& cfg) {
    LineTrack track;
    track.rls = rls_init(cfg.mu, cfg.prior_scale);
    return track;
}

LineTrack propagate(LineTrack track, const OdometryDelta& odo) {
    const CartesianPoint t{odo.dx, odo.dy};
    for (BufferedPoint& bp : track.buffer) {
        bp.p = rotate(bp.p - t, -odo.dpsi);
        bp.age += 1;
    }
    if (!track.buffer.empty()) {
        track.origin.anchor = track.buffer.front().p;
        track.origin.theta0 = wrap_pi(track.origin.theta0 - odo.dpsi);
    }
    return track;
}

LineTrack prune(LineTrack track, double prune_behind) {
    std::erase_if(track.buffer, [&](const BufferedPoint& bp) { return bp.p.x < -prune_behind; });
    if (!track.buffer.empty()) track.origin.anchor = track.buffer.front().p;
    return track;
}

namespace {

// Sort by forward coordinate and merge nearby points so the spline knots
// stay well conditioned; a merge that absorbs a fresh detection keeps the
// entry refreshed.
void merge_buffer(std::vector<BufferedPoint>& buffer, double min_spacing) {
    std::sort(buffer.begin(), buffer.end(), [](const BufferedPoint& a, const BufferedPoint& b) {
        if (a.p.x != b.p.x) return a.p.x < b.p.x;
        return a.p.y < b.p.y;
    });
    std::vector<BufferedPoint> merged;
    merged.reserve(buffer.size());
    std::size_t group_count = 0;
    for (const BufferedPoint& bp : buffer) {
        if (!merged.empty() && distance(merged.back().p, bp.p) < min_spacing) {
            BufferedPoint& m = merged.back();
            const double n = static_cast<double>(group_count);
            m.p = (1.0 / (n + 1.0)) * (n * m.p + 1.0 * bp.p);
            m.age = std::min(m.age, bp.age);
            m.refreshed = m.refreshed || bp.refreshed;
            ++group_count;
        } else {
            merged.push_back(bp);
            group_count = 1;
        }
    }
    // enforce strictly increasing x for the spline pre-fit
    std::vector<BufferedPoint> out;
    out.reserve(merged.size());
    for (const BufferedPoint& bp : merged) {
        if (!out.empty() && bp.p.x - out.back().p.x < 1e-6) {
            BufferedPoint& m = out.back();
            m.p = 0.5 * (m.p + bp.p);
            m.age = std::min(m.age, bp.age);
            m.refreshed = m.refreshed || bp.refreshed;
        } else {
            out.push_back(bp);
        }
    }
    buffer = std::move(out);
}

}  // namespace

FitOutput ingest_and_fit(LineTrack track, std::span<const CartesianPoint> new_points,
                         const LanetrackConfig& cfg) {
    FitOutput out;

    if (new_points.empty()) {
        track.lost_frames += 1;
        if (track.lost_frames > cfg.max_lost) {
            track.rls = rls_init(cfg.mu, cfg.prior_scale);
            track.buffer.clear();
            track.status = LineStatus::lost;
        }
        if (track.buffer.size() >= 2 && track.status != LineStatus::lost) {
            // keep emitting the carried model while the line is missing
            std::vector<CartesianPoint> pts;
            pts.reserve(track.buffer.size());
            for (const auto& bp : track.buffer) pts.push_back(bp.p);
            out.smoothed = pts.size() >= 4 ? fit_spline(pts, cfg.spline_spacing) : pts;
            auto curvi = to_curvilinear(out.smoothed);
            track.origin = curvi.origin;
            out.curvi = std::move(curvi.points);
            out.model = rls_model(track.rls, 0.0, out.curvi.back().s);
        }
        out.track = std::move(track);
        return out;
    }

    for (BufferedPoint& bp : track.buffer) bp.refreshed = false;
    for (const CartesianPoint& p : new_points) track.buffer.push_back({p, 0, true});
    merge_buffer(track.buffer, cfg.min_point_spacing);

    std::vector<CartesianPoint> pts;
    pts.reserve(track.buffer.size());
    double refreshed_lo = std::numeric_limits<double>::max();
    double refreshed_hi = std::numeric_limits<double>::lowest();
    for (const auto& bp : track.buffer) {
        pts.push_back(bp.p);
        if (bp.refreshed) {
            refreshed_lo = std::min(refreshed_lo, bp.p.x);
            refreshed_hi = std::max(refreshed_hi, bp.p.x);
        }
    }

    if (pts.size() < 2) {
        track.status = LineStatus::lost;
        out.track = std::move(track);
        return out;
    }

    out.smoothed = pts.size() >= 4 ? fit_spline(pts, cfg.spline_spacing) : pts;
    auto curvi = to_curvilinear(out.smoothed);
    track.origin = curvi.origin;
    out.curvi = std::move(curvi.points);

    // RLS sees only the arc span covered by this frame's detections; the
    // older buffer shapes the spline but is not re-counted.
    std::vector<Observation> obs;
    obs.reserve(out.curvi.size());
    const double margin = 0.5 * cfg.spline_spacing;
    for (std::size_t i = 0; i < out.curvi.size(); ++i) {
        const double x = out.smoothed[i + 1].x;  // curvi[i] ends at smoothed[i+1]
        if (x >= refreshed_lo - margin && x <= refreshed_hi + margin)
            obs.push_back({out.curvi[i].s, out.curvi[i].theta});
    }
    if (obs.empty())
        for (const CurviPoint& cp : out.curvi) obs.push_back({cp.s, cp.theta});

    track.rls = rls_update(std::move(track.rls), obs);
    out.model = rls_model(track.rls, 0.0, out.curvi.back().s);
    track.status = track.lost_frames > 0 ? LineStatus::recovered : LineStatus::tracked;
    track.lost_frames = 0;

    out.track = std::move(track);
    return out;
}

}  // namespace lanekit
