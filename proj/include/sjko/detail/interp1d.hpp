#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sjko::detail {

// C1 cubic Hermite through cell-centered samples. Slopes are centered
// differences (one-sided second order at the ends) and the half cells next
// to the walls use the quadratic through the three outermost samples, so the
// profile reproduces quadratics exactly.
class CubicProfile {
public:
    CubicProfile(double lo, double dx, std::vector<double> v) : lo_(lo), dx_(dx), v_(std::move(v)) {
        const int n = static_cast<int>(v_.size());
        m_.assign(n, 0.0);
        if (n >= 3) {
            for (int c = 1; c < n - 1; ++c) m_[c] = (v_[c + 1] - v_[c - 1]) / (2 * dx_);
            m_[0] = (-3 * v_[0] + 4 * v_[1] - v_[2]) / (2 * dx_);
            m_[n - 1] = (3 * v_[n - 1] - 4 * v_[n - 2] + v_[n - 3]) / (2 * dx_);
        } else if (n == 2) {
            m_[0] = m_[1] = (v_[1] - v_[0]) / dx_;
        }
    }

    // value, first and second derivative
    void eval(double x, double& f, double& d1, double& d2) const {
        const int n = static_cast<int>(v_.size());
        const double s = (x - lo_) / dx_ - 0.5;
        if (n == 1) {
            f = v_[0];
            d1 = d2 = 0.0;
            return;
        }
        if (n >= 3 && (s < 0.0 || s > n - 1)) {
            // quadratic in local coordinate u through samples a, a+1, a+2
            const bool left = s < 0.0;
            const int a = left ? 0 : n - 3;
            const double u = s - a;
            const double f0 = v_[a], f1 = v_[a + 1], f2 = v_[a + 2];
            const double c1 = f1 - f0, c2 = 0.5 * (f2 - 2 * f1 + f0);
            f = f0 + u * c1 + u * (u - 1) * c2;
            d1 = (c1 + (2 * u - 1) * c2) / dx_;
            d2 = 2 * c2 / (dx_ * dx_);
            return;
        }
        const int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
        const double t = s - i;
        const double t2 = t * t, t3 = t2 * t;
        const double y0 = v_[i], y1 = v_[i + 1], s0 = m_[i] * dx_, s1 = m_[i + 1] * dx_;
        f = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * s0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * s1;
        d1 = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * s0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * s1) / dx_;
        d2 = ((12 * t - 6) * y0 + (6 * t - 4) * s0 + (-12 * t + 6) * y1 + (6 * t - 2) * s1) / (dx_ * dx_);
    }

    double operator()(double x) const {
        double f, a, b;
        eval(x, f, a, b);
        return f;
    }

private:
    double lo_, dx_;
    std::vector<double> v_, m_;
};

// Piecewise cubic Hermite interpolant from values and slopes; x strictly
// increasing, constant extrapolation.
class Hermite {
public:
    Hermite(std::vector<double> x, std::vector<double> y, std::vector<double> d)
        : x_(std::move(x)), y_(std::move(y)), d_(std::move(d)) {}

    double operator()(double t) const {
        if (t <= x_.front()) return y_.front();
        if (t >= x_.back()) return y_.back();
        const std::size_t k = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin() - 1;
        const double h = x_[k + 1] - x_[k];
        const double s = (t - x_[k]) / h;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * d_[k] + (-2 * s3 + 3 * s2) * y_[k + 1] +
               (s3 - s2) * h * d_[k + 1];
    }

    const std::vector<double>& slopes() const { return d_; }

private:
    std::vector<double> x_, y_, d_;
};

// Shape-preserving slopes (Fritsch-Carlson with the Brodlie weighted harmonic
// mean, three-point ends). Monotone data gives a monotone Hermite curve.
inline std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        del[k] = (y[k + 1] - y[k]) / h[k];
    }
    if (n == 2) {
        d[0] = d[1] = del[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (del[k - 1] * del[k] <= 0.0) continue;
        const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
    auto end_slope = [](double h0, double h1, double del0, double del1) {
        const double e = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (e * del0 <= 0.0) return 0.0;
        if (del0 * del1 <= 0.0 && std::abs(e) > 3 * std::abs(del0)) return 3 * del0;
        return e;
    };
    d[0] = end_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    return d;
}

// Slopes of nondecreasing data from the five-point Lagrange derivative,
// limited to [0, 3 min(adjacent secants)] so the Hermite curve stays
// nondecreasing. Fourth order where the limiter is inactive.
inline std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 5) return pchip_slopes(x, y);
    std::vector<double> d(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = std::min(k >= 2 ? k - 2 : 0, n - 5);
        double s = 0.0;
        for (std::size_t j = a; j < a + 5; ++j) {
            if (j == k) {
                double w = 0.0;
                for (std::size_t m = a; m < a + 5; ++m)
                    if (m != k) w += 1.0 / (x[k] - x[m]);
                s += y[j] * w;
                continue;
            }
            double w = 1.0 / (x[j] - x[k]);
            for (std::size_t m = a; m < a + 5; ++m)
                if (m != j && m != k) w *= (x[k] - x[m]) / (x[j] - x[m]);
            s += y[j] * w;
        }
        double cap = std::numeric_limits<double>::infinity();
        if (k > 0) cap = std::min(cap, 3 * (y[k] - y[k - 1]) / (x[k] - x[k - 1]));
        if (k + 1 < n) cap = std::min(cap, 3 * (y[k + 1] - y[k]) / (x[k + 1] - x[k]));
        d[k] = std::clamp(s, 0.0, std::max(0.0, cap));
    }
    return d;
}

class Pchip : public Hermite {
public:
    Pchip(const std::vector<double>& x, const std::vector<double>& y) : Hermite(x, y, pchip_slopes(x, y)) {}
};

}  // namespace sjko::detail
