#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "invot/errors.hpp"

namespace invot {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> x(n);
    if (n == 1) { x[0] = lo; return x; }
    const double step = (hi - lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo + step * double(i);
    x.back() = hi;
    return x;
}

inline bool strictly_increasing(const std::vector<double>& x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) return false;
    return true;
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

// Piecewise-linear function on a strictly increasing grid. Evaluation clamps
// to the end values outside the grid; callers that must not extrapolate check
// bounds themselves.
struct GridFunction {
    std::vector<double> x;
    std::vector<double> y;

    bool empty() const { return x.empty(); }
    double lo() const { return x.front(); }
    double hi() const { return x.back(); }

    double operator()(double t) const {
        if (t <= x.front()) return y.front();
        if (t >= x.back()) return y.back();
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t i = std::size_t(it - x.begin());
        const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
        return y[i - 1] + w * (y[i] - y[i - 1]);
    }
};

// Antiderivative of a piecewise-linear integrand, evaluated exactly
// (piecewise quadratic). F(x[0]) = 0.
struct PiecewiseQuadratic {
    std::vector<double> x;   // nodes
    std::vector<double> s;   // integrand values at nodes
    std::vector<double> F;   // cumulative integral at nodes

    explicit PiecewiseQuadratic(std::vector<double> xs, std::vector<double> slopes)
        : x(std::move(xs)), s(std::move(slopes)) {
        F.resize(x.size(), 0.0);
        for (std::size_t i = 1; i < x.size(); ++i)
            F[i] = F[i - 1] + 0.5 * (s[i] + s[i - 1]) * (x[i] - x[i - 1]);
    }

    double operator()(double t) const {
        if (x.size() == 1) return F[0];
        std::size_t i;
        if (t <= x.front()) i = 1;
        else if (t >= x.back()) i = x.size() - 1;
        else i = std::size_t(std::upper_bound(x.begin(), x.end(), t) - x.begin());
        // linear slope on [x_{i-1}, x_i], extended beyond the ends
        const double h = x[i] - x[i - 1];
        const double m = (s[i] - s[i - 1]) / h;
        const double dt = t - x[i - 1];
        return F[i - 1] + s[i - 1] * dt + 0.5 * m * dt * dt;
    }
};

// Left-continuous generalized inverse of a non-decreasing piecewise-linear
// function given by nodes (x, F): returns inf { t : F(t) >= u }, refined by
// bisection until |F(t) - u| <= tol (or the bracket collapses on a jump).
inline double pl_inverse(const std::vector<double>& x, const std::vector<double>& F,
                         double u, double tol = 1e-10) {
    if (u <= F.front()) return x.front();
    if (u >= F.back()) {
        // left-continuity: step back over a flat tail
        std::size_t j = F.size() - 1;
        while (j > 0 && F[j - 1] >= u) --j;
        return x[j];
    }
    auto it = std::lower_bound(F.begin(), F.end(), u);  // first F[i] >= u
    std::size_t i = std::size_t(it - F.begin());
    double lo = x[i - 1], hi = x[i];
    double Flo = F[i - 1], Fhi = F[i];
    if (Fhi <= Flo) return x[i];  // flat segment, u == plateau value handled above
    // linear seed, then bisection polish on the interpolant
    double t = lo + (u - Flo) / (Fhi - Flo) * (hi - lo);
    for (int iter = 0; iter < 200; ++iter) {
        const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
        const double Ft = F[i - 1] + w * (F[i] - F[i - 1]);
        if (std::fabs(Ft - u) <= tol) break;
        if (Ft < u) lo = t; else hi = t;
        t = 0.5 * (lo + hi);
        if (hi - lo <= 1e-300) break;
    }
    return t;
}

// Pool-adjacent-violators projection onto non-decreasing sequences
// (least squares, equal weights).
inline std::vector<double> isotonic_increasing(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> level(n), weight(n);
    std::vector<std::size_t> count(n);
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < n; ++i) {
        level[blocks] = v[i];
        weight[blocks] = 1.0;
        count[blocks] = 1;
        ++blocks;
        while (blocks > 1 && level[blocks - 2] > level[blocks - 1]) {
            const double w = weight[blocks - 2] + weight[blocks - 1];
            level[blocks - 2] =
                (level[blocks - 2] * weight[blocks - 2] + level[blocks - 1] * weight[blocks - 1]) / w;
            weight[blocks - 2] = w;
            count[blocks - 2] += count[blocks - 1];
            --blocks;
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t b = 0; b < blocks; ++b)
        out.insert(out.end(), count[b], level[b]);
    return out;
}

inline std::vector<double> isotonic_decreasing(const std::vector<double>& v) {
    std::vector<double> neg(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
    auto r = isotonic_increasing(neg);
    for (auto& t : r) t = -t;
    return r;
}

} // namespace invot
