#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "invot/costs.hpp"
#include "invot/errors.hpp"
#include "invot/fft.hpp"
#include "invot/measures.hpp"
#include "invot/quadrature.hpp"

namespace invot {

struct GTransformSample {
    double a = 0.0, b = 1.0, value = 0.0;
};

struct GTransformSamples {
    std::string family;
    std::vector<GTransformSample> entries;
};

struct SpectralRegularization {
    double eps = 1e-3;        // kernel-spectrum clamp threshold, relative to peak
    int padding = 4;          // FFT zero-padding factor
    bool cosine_taper = true; // taper data edges before transforming
};

// I_g[h](a,b) = integral of g((x-a)/b) h(x) dx for a callable h on [lo, hi].
inline double g_transform(const std::function<double(double)>& h, double lo, double hi,
                          const LocationScaleFamily& fam, double a, double b,
                          QuadratureOptions opt = {}) {
    require(std::isfinite(a) && std::isfinite(b), errc::non_finite_input, "g_transform parameters");
    require(b > 0.0, errc::non_positive_scale, "g_transform scale b = " + std::to_string(b));
    const double v = integrate_refined(
        [&](double x) { return fam.generator_pdf((x - a) / b) * h(x); }, lo, hi, opt);
    require(std::isfinite(v), errc::non_finite_input, "g_transform integral");
    return v;
}

// Same transform for a tabulated h: per-cell Gauss-Legendre, exact for the
// piecewise-linear representation.
inline double g_transform(const GridFunction& h, const LocationScaleFamily& fam, double a,
                          double b) {
    require(h.x.size() >= 2, errc::non_finite_input, "g_transform needs a grid of length >= 2");
    require(std::isfinite(a) && std::isfinite(b), errc::non_finite_input, "g_transform parameters");
    require(b > 0.0, errc::non_positive_scale, "g_transform scale b = " + std::to_string(b));
    for (double v : h.y)
        require(std::isfinite(v), errc::non_finite_input, "g_transform grid values");
    static const detail::GaussLegendre<8> gl8;
    double total = 0.0;
    for (std::size_t i = 1; i < h.x.size(); ++i) {
        const double x0 = h.x[i - 1], x1 = h.x[i];
        const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
        double cell = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double x = mid + half * gl8.node[std::size_t(k)];
            const double t = (x - x0) / (x1 - x0);
            const double hx = h.y[i - 1] * (1.0 - t) + h.y[i] * t;
            cell += gl8.weight[std::size_t(k)] * fam.generator_pdf((x - a) / b) * hx;
        }
        total += half * cell;
    }
    return total;
}

// OT values over a location-scale family: alpha_h(G_{a,b}, G) by the quantile
// formula, which collapses to the integral of h(a + (b-1) G^{-1}(u)) over u.
inline GTransformSamples value_surface_locscale(const CostSpec& cost,
                                                const LocationScaleFamily& fam,
                                                const std::vector<std::pair<double, double>>& params,
                                                QuadratureOptions opt = {}) {
    if (cost.kind != CostKind::convex)
        throw std::invalid_argument("value_surface_locscale: convex costs only");
    GTransformSamples out;
    out.family = fam.name();
    out.entries.reserve(params.size());
    for (const auto& [a, b] : params) {
        require(std::isfinite(a) && std::isfinite(b), errc::non_finite_input, "surface parameter");
        require(b > 0.0, errc::non_positive_scale, "surface parameter b = " + std::to_string(b));
        double v;
        if (std::fabs(b - 1.0) <= 1e-14) {
            v = cost.h(a);
        } else {
            v = integrate_refined(
                [&](double u) { return cost.h(a + (b - 1.0) * fam.generator_quantile(u)); }, 0.0,
                1.0, opt);
        }
        out.entries.push_back({a, b, v});
    }
    return out;
}

namespace detail {

inline double uniform_spacing(const std::vector<double>& x) {
    require(x.size() >= 8, errc::grid_mismatch, "need at least 8 uniform samples");
    const double dx = (x.back() - x.front()) / double(x.size() - 1);
    require(dx > 0.0, errc::grid_mismatch, "sample grid must be increasing");
    for (std::size_t i = 1; i < x.size(); ++i)
        require(std::fabs(x[i] - x[i - 1] - dx) <= 1e-9 * std::max(1.0, std::fabs(dx)),
                errc::grid_mismatch, "sample spacing not uniform at index " + std::to_string(i));
    return dx;
}

} // namespace detail

// Inverts a location-family g-transform at fixed scale b0 by discrete Fourier
// division. values[j] are samples of a -> I_g[h](a, b0) on the uniform a_grid.
// Fourier coefficients where the kernel spectrum falls below eps of its peak
// are zeroed; the recovery is exact on the retained band.
inline std::vector<double> deconvolve_location(const std::vector<double>& a_grid,
                                               const std::vector<double>& values,
                                               const LocationScaleFamily& fam, double b0,
                                               const SpectralRegularization& reg = {},
                                               std::size_t* clamped_out = nullptr) {
    require(a_grid.size() == values.size(), errc::grid_mismatch, "grid/value length mismatch");
    require(b0 > 0.0, errc::non_positive_scale, "kernel scale b0 = " + std::to_string(b0));
    if (reg.eps <= 0.0 || reg.eps >= 1.0 || reg.padding < 2)
        throw std::invalid_argument("deconvolve_location: invalid regularization");
    for (double v : values) require(std::isfinite(v), errc::non_finite_input, "sample value");
    const double dx = detail::uniform_spacing(a_grid);
    const std::size_t n = values.size();
    const std::size_t M = next_pow2(n * std::size_t(reg.padding));

    std::vector<std::complex<double>> data(M, 0.0), kern(M, 0.0);
    for (std::size_t i = 0; i < n; ++i) data[i] = values[i];
    if (reg.cosine_taper) {
        const std::size_t L = std::max<std::size_t>(4, n / 8);
        for (std::size_t i = 0; i < L; ++i) {
            const double w = 0.5 * (1.0 - std::cos(M_PI * double(i) / double(L)));
            data[i] *= w;
            data[n - 1 - i] *= w;
        }
    }
    for (std::size_t t = 0; t < M; ++t) {
        const double x = (t <= M / 2 ? double(t) : double(t) - double(M)) * dx;
        kern[t] = fam.generator_pdf(x / b0);
    }
    fft_radix2(data, false);
    fft_radix2(kern, false);
    double peak = 0.0;
    for (const auto& c : kern) peak = std::fmax(peak, std::abs(c));
    require(peak > 0.0, errc::kernel_spectrum_degenerate, "kernel spectrum is identically zero");
    std::size_t clamped = 0;
    for (std::size_t t = 0; t < M; ++t) {
        if (std::abs(kern[t]) < reg.eps * peak) {
            data[t] = 0.0;
            ++clamped;
        } else {
            data[t] /= kern[t] * dx;
        }
    }
    require(double(clamped) <= 0.9 * double(M), errc::kernel_spectrum_degenerate,
            std::to_string(clamped) + " of " + std::to_string(M) + " spectral bins clamped");
    if (clamped_out) *clamped_out = clamped;
    fft_radix2(data, true);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = data[i].real();
    return h;
}

namespace detail {

// (-1)^n * [s_0,...,s_n]L * prod(s_j) over symmetric nodes s0(1 +/- eta t):
// algebraically exact for L(s) = c/s at any order, which keeps the
// high-order stencil roundoff-stable where a raw power-of-s prefactor is not.
inline double post_point_estimate(const std::function<double(double)>& L, double x, int n,
                                  double eta) {
    const double s0 = double(n) / x;
    const int m = n + 1;
    std::vector<long double> s(static_cast<std::size_t>(m)), f(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double t = (2.0 * double(j) - double(n)) / double(n);
        const double sj = s0 * (1.0 + eta * t);
        const double fj = L(sj);
        require(std::isfinite(fj), errc::non_finite_input,
                "transform value at rate " + std::to_string(sj));
        s[std::size_t(j)] = sj;
        f[std::size_t(j)] = fj;
    }
    // Strip the best-matching c/s component: the estimator below is exact on
    // it (divided difference of 1/s over any nodes is (-1)^n / prod s_j), so
    // only the residual runs through the noise-amplifying difference table.
    const std::size_t mid = std::size_t(m) / 2;
    const long double c = f[mid] * s[mid];
    long double fmax = 0.0L, rmax = 0.0L;
    for (int j = 0; j < m; ++j) {
        f[std::size_t(j)] -= c / s[std::size_t(j)];
        fmax = std::max(fmax, std::fabs(c / s[std::size_t(j)]) + std::fabs(f[std::size_t(j)]));
        rmax = std::max(rmax, std::fabs(f[std::size_t(j)]));
    }
    if (rmax <= 64.0L * std::numeric_limits<double>::epsilon() * fmax)
        return double(c);  // data indistinguishable from c/s at double precision
    for (int k = 1; k < m; ++k)
        for (int j = m - 1; j >= k; --j)
            f[std::size_t(j)] = (f[std::size_t(j)] - f[std::size_t(j - 1)]) /
                                (s[std::size_t(j)] - s[std::size_t(j - k)]);
    long double prod = 1.0L;
    for (int j = 0; j < m; ++j) prod *= s[std::size_t(j)];
    const long double sign = (n % 2 == 0) ? 1.0L : -1.0L;
    return double(c + sign * f[std::size_t(m - 1)] * prod);
}

inline double post_order_estimate(const std::function<double(double)>& L, double x, int n) {
    // No Richardson step in the cluster width: halving eta shrinks the node
    // spacing enough that the divided differences of the check order cancel
    // catastrophically, while the stencil bias it would remove is already far
    // below the O(1/n) bias of the formula itself.
    return post_point_estimate(L, x, n, std::min(0.16, 1.6 / double(n)));
}

} // namespace detail

// Returns the rate nodes at which L is evaluated by post_laplace_invert for a
// given (x, order): callers that tabulate L (value surfaces) must cover these.
inline std::vector<double> post_required_rates(double x, int n) {
    std::vector<double> rates;
    for (int ord : {n, n + 2}) {
        const double eta = std::min(0.16, 1.6 / double(ord));
        const double s0 = double(ord) / x;
        for (int j = 0; j <= ord; ++j) {
            const double t = (2.0 * double(j) - double(ord)) / double(ord);
            rates.push_back(s0 * (1.0 + eta * t));
        }
    }
    std::sort(rates.begin(), rates.end());
    return rates;
}

// Post's inversion of a Laplace transform: h(x) ~ ((-1)^n / n!) (n/x)^{n+1}
// L^{(n)}(n/x), with the derivative taken by divided differences on a
// symmetric node cluster around n/x. The n! s^{n+1} factor is folded in as
// the product of the actual nodes, which makes L(s) = c/s exact.
inline double post_laplace_invert(const std::function<double(double)>& L, double x, int n) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument("post_laplace_invert: x must be positive");
    if (n < 2) throw std::invalid_argument("post_laplace_invert: order must be >= 2");
    const double est = detail::post_order_estimate(L, x, n);
    const double chk = detail::post_order_estimate(L, x, n + 2);
    const double denom = std::max({std::fabs(est), std::fabs(chk), 1e-12});
    require(std::fabs(est - chk) <= 0.5 * denom, errc::unstable_derivative,
            "orders " + std::to_string(n) + " and " + std::to_string(n + 2) +
                " disagree: " + std::to_string(est) + " vs " + std::to_string(chk));
    return est;
}

} // namespace invot
