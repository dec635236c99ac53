#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <functional>

#include "invot/errors.hpp"

namespace invot {

namespace detail {

// Nodes and weights of the N-point Gauss-Legendre rule on [-1, 1], found by
// Newton iteration on the Legendre recurrence.
template <int N>
struct GaussLegendre {
    std::array<double, N> node{};
    std::array<double, N> weight{};

    GaussLegendre() {
        const int m = (N + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(M_PI * (double(i) + 0.75) / (double(N) + 0.5));
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < N; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - double(j) * p2) / double(j + 1);
                }
                pp = double(N) * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            node[i] = -x;
            node[N - 1 - i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
            weight[N - 1 - i] = weight[i];
        }
    }
};

inline const GaussLegendre<64>& gl64() {
    static const GaussLegendre<64> rule;
    return rule;
}

} // namespace detail

inline double gl64_panel(const std::function<double(double)>& f, double lo, double hi) {
    const auto& rule = detail::gl64();
    const double c = 0.5 * (hi + lo), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 64; ++i) s += rule.weight[i] * f(c + h * rule.node[i]);
    return s * h;
}

struct QuadratureOptions {
    int panels = 16;              // initial uniform panels
    double rel_tol = 1e-10;       // endpoint panel contribution target
    int max_refinements = 40;     // per endpoint, then DivergentIntegral
};

// Composite Gauss-Legendre over [lo, hi] with geometric refinement toward both
// endpoints: each level subdivides the outermost panel (ratio 4) until its
// contribution drops below rel_tol relative to the accumulated integral.
// Integrands that keep feeding mass at an endpoint (non-integrable tails)
// exhaust the refinement budget instead of settling.
inline double integrate_refined(const std::function<double(double)>& f, double lo, double hi,
                                const QuadratureOptions& opt = {}) {
    if (!(hi > lo)) return 0.0;
    std::deque<std::pair<double, double>> panels;
    const double w = (hi - lo) / double(opt.panels);
    for (int i = 0; i < opt.panels; ++i)
        panels.emplace_back(lo + w * i, i + 1 == opt.panels ? hi : lo + w * (i + 1));

    double total = 0.0;
    std::deque<double> vals;
    for (const auto& [a, b] : panels) {
        vals.push_back(gl64_panel(f, a, b));
        total += vals.back();
    }

    auto scale = [&]() { return std::fmax(std::fabs(total), 1e-300); };

    for (int side = 0; side < 2; ++side) {
        const bool left = side == 0;
        int refinements = 0;
        while (true) {
            const double contrib = left ? vals.front() : vals.back();
            if (std::fabs(contrib) <= opt.rel_tol * scale()) break;
            if (refinements >= opt.max_refinements)
                fail(errc::divergent_integral,
                     "endpoint contribution did not settle after " +
                         std::to_string(opt.max_refinements) + " refinements");
            auto [a, b] = left ? panels.front() : panels.back();
            if (left) { panels.pop_front(); vals.pop_front(); } else { panels.pop_back(); vals.pop_back(); }
            total -= contrib;
            const double q = 0.25 * (b - a);
            std::pair<double, double> quarter[4];
            double qval[4];
            for (int j = 0; j < 4; ++j) {
                quarter[j] = {a + q * j, j == 3 ? b : a + q * (j + 1)};
                qval[j] = gl64_panel(f, quarter[j].first, quarter[j].second);
                total += qval[j];
            }
            if (left) {
                for (int j = 3; j >= 0; --j) {  // outermost quarter ends up at the front
                    panels.push_front(quarter[j]);
                    vals.push_front(qval[j]);
                }
            } else {
                for (int j = 0; j < 4; ++j) {
                    panels.push_back(quarter[j]);
                    vals.push_back(qval[j]);
                }
            }
            ++refinements;
        }
    }
    return total;
}

} // namespace invot
