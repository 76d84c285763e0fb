#pragma once

#include <array>
#include <span>
#include <vector>

#include "lanekit/geometry.hpp"

namespace lanekit {

/// A point of the curvilinear (s - theta) representation: arc length from the
/// curve origin and tangent angle against the vehicle-frame x axis.
struct CurviPoint {
    double s = 0.0;
    double theta = 0.0;
};

/// Cartesian anchor of a curvilinear description: the first curve point and
/// the tangent angle of the first segment.
struct CurveOrigin {
    CartesianPoint anchor;
    double theta0 = 0.0;
};

/// Cubic tangent-angle model theta(s) = w3 s^3 + w2 s^2 + w1 s + w0 over a
/// fitted arc-length domain. Evaluation outside [s_min, s_max] is legal
/// extrapolation; in_domain() tells callers when they are doing it.
struct PolyModel {
    std::array<double, 4> w{0.0, 0.0, 0.0, 0.0};  // (w3, w2, w1, w0)
    double s_min = 0.0;
    double s_max = 0.0;

    bool in_domain(double s) const { return s >= s_min && s <= s_max; }
};

struct CurvilinearPolyline {
    CurveOrigin origin;
    std::vector<CurviPoint> points;
};

/// Convert an ordered Cartesian polyline into curvilinear points.
///
/// s_i is the cumulative chord length up to the end of segment i, theta_i the
/// angle of segment i. Angles are unwrapped along the curve so a polyline
/// crossing +-pi stays continuous. Throws TooFewPoints / DuplicatePoint.
CurvilinearPolyline to_curvilinear(std::span<const CartesianPoint> points);

/// theta(s) of the cubic model (Horner).
double eval_poly(const PolyModel& model, double s);

/// d theta / d s of the cubic model.
double eval_poly_slope(const PolyModel& model, double s);

/// Integrate the model back to Cartesian points at the requested arc
/// positions: x(s) = x0 + int cos theta, y(s) = y0 + int sin theta, by
/// trapezoidal quadrature with step <= 0.05 m. s_samples must be strictly
/// increasing; throws EmptySamples on an empty request.
std::vector<CartesianPoint> reconstruct_cartesian(const PolyModel& model,
                                                  const CurveOrigin& origin,
                                                  std::span<const double> s_samples);

/// Smooth a detected polyline with an interpolating C^2 cubic spline of the
/// lateral coordinate as a function of the forward coordinate (not-a-knot end
/// conditions) and resample it at uniform arc spacing. Requires >= 4 points
/// with strictly increasing forward coordinates.
std::vector<CartesianPoint> fit_spline(std::span<const CartesianPoint> points,
                                       double spacing = 0.25);

/// Dense tabulation of the Cartesian trace of a model, for root solving and
/// repeated point queries. Covers [min(0, s_min) .. s_max] from the anchor.
class CurveSampler {
public:
    CurveSampler(const PolyModel& model, const CurveOrigin& origin, double step = 0.05);

    CartesianPoint point_at(double s) const;
    double theta_at(double s) const { return eval_poly(model_, s); }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    PolyModel model_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    double step_ = 0.05;
    std::vector<CartesianPoint> table_;  // table_[k] = point at lo_ + k*step_
};

}  // namespace lanekit
