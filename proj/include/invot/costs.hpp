#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invot/errors.hpp"
#include "invot/grid.hpp"

namespace invot {

enum class CostKind { convex, concave };

// Translation-invariant ground cost c(x, y) = h(x - y). Convex costs are
// strictly convex in the displacement; concave costs are l(|x - y|) with l
// increasing, strictly concave, l(0) = 0.
struct CostSpec {
    CostKind kind = CostKind::convex;
    std::string name;
    double growth_p = 2.0;                        // |h(x)| ~ |x|^p for large |x|
    std::function<double(double)> h;
    std::function<double(double)> hprime;         // optional
    std::function<double(double)> conj_grad;      // (h')^{-1} (convex) or (l')^{-1} (concave)
    bool shape_checked = false;

    double operator()(double d) const { return h(d); }
};

inline CostSpec power_cost(double p) {
    if (!(p > 1.0)) throw std::invalid_argument("power_cost: exponent must exceed 1");
    CostSpec c;
    c.kind = CostKind::convex;
    c.name = "power:" + std::to_string(p);
    c.growth_p = p;
    c.h = [p](double d) { return std::pow(std::fabs(d), p); };
    c.hprime = [p](double d) {
        if (d == 0.0) return 0.0;
        return p * std::pow(std::fabs(d), p - 1.0) * (d > 0.0 ? 1.0 : -1.0);
    };
    c.conj_grad = [p](double y) {
        if (y == 0.0) return 0.0;
        return std::pow(std::fabs(y) / p, 1.0 / (p - 1.0)) * (y > 0.0 ? 1.0 : -1.0);
    };
    c.shape_checked = true;
    return c;
}

inline CostSpec quadratic_cost() { return power_cost(2.0); }

inline CostSpec concave_power_cost(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("concave_power_cost: exponent must lie in (0,1)");
    CostSpec c;
    c.kind = CostKind::concave;
    c.name = "concave-power:" + std::to_string(q);
    c.growth_p = q;
    c.h = [q](double d) { return std::pow(std::fabs(d), q); };
    c.hprime = [q](double d) {
        if (d == 0.0) return 0.0;
        return q * std::pow(std::fabs(d), q - 1.0) * (d > 0.0 ? 1.0 : -1.0);
    };
    // l'(t) = q t^(q-1) is decreasing; solve q t^(q-1) = s.
    c.conj_grad = [q](double s) { return std::pow(s / q, 1.0 / (q - 1.0)); };
    c.shape_checked = true;
    return c;
}

// Cost tabulated on a displacement grid, evaluated piecewise-linearly with
// linear extension beyond the tabulated range. The derivative is the local
// slope (left slope at interior nodes).
inline CostSpec grid_cost(std::vector<double> d, std::vector<double> values, CostKind kind,
                          double growth_p = 2.0, std::string name = "grid") {
    if (d.size() != values.size() || d.size() < 2)
        throw std::invalid_argument("grid_cost: need matching vectors of length >= 2");
    if (!strictly_increasing(d))
        throw std::invalid_argument("grid_cost: displacement grid must be strictly increasing");
    auto fn = std::make_shared<GridFunction>(GridFunction{std::move(d), std::move(values)});
    CostSpec c;
    c.kind = kind;
    c.name = std::move(name);
    c.growth_p = growth_p;
    c.h = [fn](double t) {
        const auto& x = fn->x;
        const auto& y = fn->y;
        if (t <= x.front())
            return y.front() + (t - x.front()) * (y[1] - y[0]) / (x[1] - x[0]);
        if (t >= x.back()) {
            const std::size_t n = x.size();
            return y.back() + (t - x.back()) * (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
        }
        return (*fn)(t);
    };
    c.hprime = [fn](double t) {
        const auto& x = fn->x;
        const auto& y = fn->y;
        std::size_t k = std::size_t(std::upper_bound(x.begin(), x.end(), t) - x.begin());
        if (k == 0) k = 1;
        if (k >= x.size()) k = x.size() - 1;
        return (y[k] - y[k - 1]) / (x[k] - x[k - 1]);
    };
    return c;
}

// Verifies the tabulated shape of a cost by sampling its slopes: convex costs
// need nondecreasing slopes, concave costs decreasing l-slopes on t > 0.
inline bool check_cost_shape(const CostSpec& c, double lo, double hi, int n = 257,
                             double tol = 1e-9) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    const double step = (hi - lo) / double(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        const double a = lo + step * double(i), b = a + step;
        const double slope = (c.h(b) - c.h(a)) / step;
        if (std::isfinite(prev)) {
            if (c.kind == CostKind::convex && slope < prev - tol) return false;
            if (c.kind == CostKind::concave && a >= 0.0 && slope > prev + tol) return false;
        }
        if (c.kind == CostKind::convex || a >= 0.0) prev = slope;
    }
    return true;
}

} // namespace invot
