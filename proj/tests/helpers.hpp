#pragma once

#include "invot/invot.hpp"

// Asserts that the statement throws an invot::error with the given code.
// Other exception types propagate to the framework.
#define CHECK_FAILS_WITH(code_, ...)                      \
    do {                                                  \
        bool thrown_ = false;                             \
        try {                                             \
            __VA_ARGS__;                                  \
        } catch (const invot::error& e_) {                \
            thrown_ = true;                               \
            CHECK(e_.code() == (code_));                  \
        }                                                 \
        CHECK(thrown_);                                   \
    } while (0)

namespace testutil {

// Uniform measure on [lo, hi], optionally embedded in a wider grid so two
// measures can share nodes.
inline invot::Measure1D uniform_measure(double lo, double hi, int n = 1001) {
    auto grid = invot::linspace(lo, hi, std::size_t(n));
    std::vector<double> density(grid.size(), 1.0);
    return invot::cdf_and_quantile_from_density(std::move(grid), std::move(density));
}

inline invot::Measure1D uniform_on_shared_grid(double lo, double hi, double grid_lo,
                                               double grid_hi, int n) {
    auto grid = invot::linspace(grid_lo, grid_hi, std::size_t(n));
    std::vector<double> density(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] >= lo && grid[i] <= hi) density[i] = 1.0;
    return invot::cdf_and_quantile_from_density(std::move(grid), std::move(density));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

} // namespace testutil
