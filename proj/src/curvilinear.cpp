#include "lanekit/curvilinear.hpp"

#include <algorithm>
#include <cmath>

#include "lanekit/errors.hpp"

namespace lanekit {

CurvilinearPolyline to_curvilinear(std::span<const CartesianPoint> points) {
    if (points.size() < 2)
        throw TooFewPoints("to_curvilinear: need at least 2 points");

    CurvilinearPolyline out;
    out.points.reserve(points.size() - 1);

    double s = 0.0;
    double prev_theta = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const CartesianPoint d = points[i + 1] - points[i];
        const double len = norm(d);
        if (len <= 0.0)
            throw DuplicatePoint("to_curvilinear: zero-length segment at index " + std::to_string(i));
        s += len;
        const double raw = std::atan2(d.y, d.x);
        // unwrap: keep theta continuous along the curve
        const double theta = out.points.empty() ? raw : prev_theta + wrap_pi(raw - prev_theta);
        out.points.push_back({s, theta});
        prev_theta = theta;
    }

    out.origin.anchor = points[0];
    out.origin.theta0 = out.points.front().theta;
    return out;
}

double eval_poly(const PolyModel& model, double s) {
    return ((model.w[0] * s + model.w[1]) * s + model.w[2]) * s + model.w[3];
}

double eval_poly_slope(const PolyModel& model, double s) {
    return (3.0 * model.w[0] * s + 2.0 * model.w[1]) * s + model.w[2];
}

namespace {

constexpr double kReconstructStep = 0.05;

// Trapezoidal step of the (cos, sin) integrand from s0 to s1.
CartesianPoint integrate_segment(const PolyModel& model, CartesianPoint start, double s0, double s1) {
    const double span = s1 - s0;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / kReconstructStep)));
    const double h = span / n;
    CartesianPoint p = start;
    double theta_a = eval_poly(model, s0);
    for (int k = 0; k < n; ++k) {
        const double sb = s0 + (k + 1) * h;
        const double theta_b = eval_poly(model, sb);
        p.x += 0.5 * h * (std::cos(theta_a) + std::cos(theta_b));
        p.y += 0.5 * h * (std::sin(theta_a) + std::sin(theta_b));
        theta_a = theta_b;
    }
    return p;
}

}  // namespace

std::vector<CartesianPoint> reconstruct_cartesian(const PolyModel& model,
                                                  const CurveOrigin& origin,
                                                  std::span<const double> s_samples) {
    if (s_samples.empty())
        throw EmptySamples("reconstruct_cartesian: no arc positions requested");

    std::vector<CartesianPoint> out;
    out.reserve(s_samples.size());
    CartesianPoint p = origin.anchor;
    double s_cur = 0.0;
    for (double s : s_samples) {
        p = integrate_segment(model, p, s_cur, s);
        s_cur = s;
        out.push_back(p);
    }
    return out;
}

namespace {

// Second derivatives of the interpolating cubic spline with not-a-knot end
// conditions. Thomas solve on the reduced tridiagonal system.
std::vector<double> spline_moments(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

    const std::size_t m = n - 2;  // unknowns M_1 .. M_{n-2}
    std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
    for (std::size_t i = 1; i + 1 <= n - 1; ++i) {
        const std::size_t k = i - 1;
        lower[k] = h[i - 1];
        diag[k] = 2.0 * (h[i - 1] + h[i]);
        upper[k] = h[i];
        rhs[k] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    // not-a-knot: M_0 = (1 + h0/h1) M_1 - (h0/h1) M_2, mirrored on the right
    const double r0 = h[0] / h[1];
    diag[0] += h[0] * (1.0 + r0);
    upper[0] -= h[0] * r0;
    const double r1 = h[n - 2] / h[n - 3];
    diag[m - 1] += h[n - 2] * (1.0 + r1);
    lower[m - 1] -= h[n - 2] * r1;

    // Thomas
    for (std::size_t k = 1; k < m; ++k) {
        const double w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> mm(m);
    mm[m - 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) mm[k] = (rhs[k] - upper[k] * mm[k + 1]) / diag[k];

    std::vector<double> M(n);
    for (std::size_t k = 0; k < m; ++k) M[k + 1] = mm[k];
    M[0] = (1.0 + r0) * M[1] - r0 * M[2];
    M[n - 1] = (1.0 + r1) * M[n - 2] - r1 * M[n - 3];
    return M;
}

double spline_eval(std::span<const double> x, std::span<const double> y,
                   std::span<const double> M, double xq) {
    // clamp to the knot range; callers stay inside it
    std::size_t i = 0;
    if (xq >= x[x.size() - 2]) {
        i = x.size() - 2;
    } else if (xq > x[0]) {
        i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xq) - x.begin()) - 1;
    }
    const double h = x[i + 1] - x[i];
    const double a = (x[i + 1] - xq) / h;
    const double b = (xq - x[i]) / h;
    return a * y[i] + b * y[i + 1] +
           ((a * a * a - a) * M[i] + (b * b * b - b) * M[i + 1]) * h * h / 6.0;
}

}  // namespace

std::vector<CartesianPoint> fit_spline(std::span<const CartesianPoint> points, double spacing) {
    if (points.size() < 4)
        throw TooFewPoints("fit_spline: need at least 4 points");

    std::vector<double> xs(points.size()), ys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        xs[i] = points[i].x;
        ys[i] = points[i].y;
        if (i > 0 && xs[i] <= xs[i - 1])
            throw Error("fit_spline: forward coordinates must be strictly increasing");
    }
    const std::vector<double> M = spline_moments(xs, ys);

    // dense arc-length table along the spline
    std::vector<double> tx, tarc;
    tx.push_back(xs.front());
    tarc.push_back(0.0);
    CartesianPoint prev{xs.front(), ys.front()};
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double h = xs[i + 1] - xs[i];
        const int nsub = std::max(2, static_cast<int>(std::ceil(h / 0.02)));
        for (int k = 1; k <= nsub; ++k) {
            const double xq = xs[i] + h * k / nsub;
            const CartesianPoint p{xq, spline_eval(xs, ys, M, xq)};
            tarc.push_back(tarc.back() + distance(prev, p));
            tx.push_back(xq);
            prev = p;
        }
    }
    const double total = tarc.back();

    std::vector<CartesianPoint> out;
    std::size_t k = 1;
    for (double target = 0.0; target <= total + 1e-12; target += spacing) {
        const double a = std::min(target, total);
        while (k < tarc.size() && tarc[k] < a) ++k;
        double xq;
        if (k >= tarc.size()) {
            xq = tx.back();
        } else {
            const double denom = tarc[k] - tarc[k - 1];
            const double t = denom > 0.0 ? (a - tarc[k - 1]) / denom : 0.0;
            xq = tx[k - 1] + t * (tx[k] - tx[k - 1]);
        }
        out.push_back({xq, spline_eval(xs, ys, M, xq)});
    }
    // keep the exact end knot unless we already landed on it
    if (distance(out.back(), {xs.back(), ys.back()}) > 0.05)
        out.push_back({xs.back(), ys.back()});
    return out;
}

CurveSampler::CurveSampler(const PolyModel& model, const CurveOrigin& origin, double step)
    : model_(model), step_(step) {
    lo_ = std::min(0.0, model.s_min);
    hi_ = std::max(model.s_max, lo_ + step);
    const int n = static_cast<int>(std::ceil((hi_ - lo_) / step_));
    table_.resize(n + 1);

    // walk from the anchor (s = 0) in both directions
    const int k0 = static_cast<int>(std::round((0.0 - lo_) / step_));
    const int kz = std::clamp(k0, 0, n);
    CartesianPoint p = origin.anchor;
    double s = 0.0;
    const double s_at = lo_ + kz * step_;
    p = integrate_segment(model_, p, s, s_at);
    table_[kz] = p;
    CartesianPoint fwd = p;
    for (int k = kz + 1; k <= n; ++k) {
        fwd = integrate_segment(model_, fwd, lo_ + (k - 1) * step_, lo_ + k * step_);
        table_[k] = fwd;
    }
    CartesianPoint bwd = p;
    for (int k = kz - 1; k >= 0; --k) {
        bwd = integrate_segment(model_, bwd, lo_ + (k + 1) * step_, lo_ + k * step_);
        table_[k] = bwd;
    }
}

CartesianPoint CurveSampler::point_at(double s) const {
    const double sc = std::clamp(s, lo_, hi_);
    int k = static_cast<int>(std::floor((sc - lo_) / step_));
    k = std::clamp(k, 0, static_cast<int>(table_.size()) - 1);
    const double sk = lo_ + k * step_;
    return integrate_segment(model_, table_[k], sk, s);
}

}  // namespace lanekit
