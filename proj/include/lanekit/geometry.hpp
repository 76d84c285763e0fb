#pragma once

#include <cmath>
#include <numbers>

namespace lanekit {

/// 2-D point in the vehicle frame: x forward, y leftward-positive. Meters.
struct CartesianPoint {
    double x = 0.0;
    double y = 0.0;
};

inline CartesianPoint operator+(CartesianPoint a, CartesianPoint b) { return {a.x + b.x, a.y + b.y}; }
inline CartesianPoint operator-(CartesianPoint a, CartesianPoint b) { return {a.x - b.x, a.y - b.y}; }
inline CartesianPoint operator*(double k, CartesianPoint p) { return {k * p.x, k * p.y}; }

inline double dot(CartesianPoint a, CartesianPoint b) { return a.x * b.x + a.y * b.y; }
inline double cross(CartesianPoint a, CartesianPoint b) { return a.x * b.y - a.y * b.x; }
inline double norm(CartesianPoint p) { return std::hypot(p.x, p.y); }
inline double distance(CartesianPoint a, CartesianPoint b) { return norm(a - b); }

inline CartesianPoint rotate(CartesianPoint p, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Unit direction for a heading angle.
inline CartesianPoint heading_dir(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Left-pointing unit normal of a heading angle.
inline CartesianPoint left_normal(double theta) { return {-std::sin(theta), std::cos(theta)}; }

/// Wrap an angle into (-pi, pi].
inline double wrap_pi(double a) {
    constexpr double pi = std::numbers::pi;
    a = std::fmod(a + pi, 2.0 * pi);
    if (a <= 0.0) a += 2.0 * pi;
    return a - pi;
}

inline bool is_finite(CartesianPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Rigid body pose in the plane.
struct Pose2 {
    CartesianPoint position;
    double heading = 0.0;
};

/// Map a point from world coordinates into the frame of `pose`.
inline CartesianPoint to_frame(const Pose2& pose, CartesianPoint world) {
    return rotate(world - pose.position, -pose.heading);
}

/// Map a point from the frame of `pose` back to world coordinates.
inline CartesianPoint from_frame(const Pose2& pose, CartesianPoint local) {
    return pose.position + rotate(local, pose.heading);
}

}  // namespace lanekit
