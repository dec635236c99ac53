#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace invot;
using Catch::Approx;

namespace {

GridFunction tabulate(double lo, double hi, int n, const std::function<double(double)>& f) {
    GridFunction g;
    g.x = linspace(lo, hi, std::size_t(n));
    g.y.resize(g.x.size());
    for (std::size_t i = 0; i < g.x.size(); ++i) g.y[i] = f(g.x[i]);
    return g;
}

} // namespace

TEST_CASE("kernel integral of zero is zero", "[transforms]") {
    const auto fam = LocationScaleFamily::normal();
    const auto zero = tabulate(-5.0, 5.0, 201, [](double) { return 0.0; });
    for (double a : {-1.0, 0.0, 2.0})
        for (double b : {0.5, 1.0, 2.0}) CHECK(g_transform(zero, fam, a, b) == Approx(0.0));
}

TEST_CASE("kernel integral of the square has gaussian-moment closed form", "[transforms]") {
    const auto fam = LocationScaleFamily::normal();
    // substituting x = a + b u: integral of g(u) (a + b u)^2 b du = b (a^2 + b^2)
    const auto sq = tabulate(-14.0, 14.0, 4001, [](double x) { return x * x; });
    for (double a : {-1.0, 0.0, 1.5})
        for (double b : {0.5, 1.0, 2.0})
            CHECK(g_transform(sq, fam, a, b) == Approx(b * (a * a + b * b)).margin(1e-4));
}

TEST_CASE("kernel integral is linear in the integrand", "[transforms][property]") {
    const auto fam = LocationScaleFamily::normal();
    const auto h1 = tabulate(-10.0, 10.0, 801, [](double x) { return x * x; });
    const auto h2 = tabulate(-10.0, 10.0, 801, [](double x) { return std::cos(x); });
    GridFunction mix = h1;
    for (std::size_t i = 0; i < mix.y.size(); ++i) mix.y[i] = 2.0 * h1.y[i] + 3.0 * h2.y[i];
    const double lhs = g_transform(mix, fam, 0.3, 0.8);
    const double rhs = 2.0 * g_transform(h1, fam, 0.3, 0.8) + 3.0 * g_transform(h2, fam, 0.3, 0.8);
    CHECK(lhs == Approx(rhs).margin(1e-10));
}

TEST_CASE("kernel integral rejects bad parameters", "[transforms][errors]") {
    const auto fam = LocationScaleFamily::normal();
    const auto sq = tabulate(-5.0, 5.0, 101, [](double x) { return x * x; });
    CHECK_FAILS_WITH(errc::non_positive_scale, g_transform(sq, fam, 0.0, 0.0));
    CHECK_FAILS_WITH(errc::non_finite_input,
                     g_transform(sq, fam, std::numeric_limits<double>::infinity(), 1.0));
}

TEST_CASE("value surface at unit scale reads the cost off directly", "[transforms]") {
    const auto fam = LocationScaleFamily::normal();
    const auto cost = power_cost(2.0);
    const auto surf = value_surface_locscale(cost, fam, {{-1.5, 1.0}, {0.2, 1.0}, {2.0, 1.0}});
    for (const auto& e : surf.entries) CHECK(e.value == Approx(cost.h(e.a)).margin(1e-12));
}

TEST_CASE("squared-displacement surface is quadratic in both parameters", "[transforms]") {
    const auto fam = LocationScaleFamily::normal();
    const auto surf = value_surface_locscale(power_cost(2.0), fam,
                                             {{-1.0, 1.5}, {0.0, 2.0}, {1.0, 3.0}, {0.5, 0.5}});
    for (const auto& e : surf.entries) {
        const double s = e.b - 1.0;
        CHECK(e.value == Approx(e.a * e.a + s * s).margin(1e-6));
    }
}

TEST_CASE("transport value equals the kernel integral at shifted scale", "[transforms]") {
    const auto fam = LocationScaleFamily::normal();
    const auto cost = power_cost(2.0);
    const auto surf = value_surface_locscale(cost, fam, {{0.0, 2.0}});
    const auto sq = tabulate(-14.0, 14.0, 4001, [](double x) { return x * x; });
    const double direct = g_transform(sq, fam, 0.0, 1.0);
    CHECK(surf.entries[0].value == Approx(1.0).margin(1e-6));
    CHECK(surf.entries[0].value == Approx(direct).margin(1e-6));
}

TEST_CASE("deconvolving zero data returns zero", "[transforms]") {
    const auto fam = LocationScaleFamily::normal();
    const auto a = linspace(-8.0, 8.0, 129);
    const std::vector<double> values(a.size(), 0.0);
    const auto h = deconvolve_location(a, values, fam, 0.5);
    for (double v : h) CHECK(v == Approx(0.0).margin(1e-12));
}

TEST_CASE("narrow-kernel round trip recovers a smooth bump", "[transforms]") {
    const auto fam = LocationScaleFamily::normal();
    const auto a = linspace(-8.0, 8.0, 129);
    auto bump = [](double x) {
        const double t = 1.0 - x * x;
        return t > 0.0 ? t * t : 0.0;
    };
    std::vector<double> values(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        values[i] = g_transform([&](double x) { return bump(x); }, -2.0, 2.0, fam, a[i], 0.5);
    SpectralRegularization reg;
    reg.eps = 1e-3;
    const auto rec = deconvolve_location(a, values, fam, 0.5, reg);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::fabs(a[i]) > 3.0) continue;
        const double t = bump(a[i]);
        num += (rec[i] - t) * (rec[i] - t);
        den += t * t;
    }
    CHECK(std::sqrt(num / den) <= 0.1);
}

TEST_CASE("deconvolution inverts a discrete convolution exactly when nothing is clamped",
          "[transforms][property]") {
    const auto fam = LocationScaleFamily::normal();
    const int n = 128;
    const auto a = linspace(-16.0, 15.75, n);  // spacing 0.25
    const double dx = 0.25, b0 = 0.3;
    std::vector<double> h(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (std::fabs(a[i]) < 3.0) h[i] = std::exp(-a[i] * a[i]);
    std::vector<double> values(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) values[i] += h[j] * fam.generator_pdf((a[i] - a[j]) / b0) * dx;
    SpectralRegularization reg;
    reg.eps = 1e-6;
    reg.cosine_taper = false;
    std::size_t clamped = 117;
    const auto rec = deconvolve_location(a, values, fam, b0, reg, &clamped);
    CHECK(clamped == 0);
    CHECK(testutil::max_abs_diff(rec, h) <= 1e-8);
}

TEST_CASE("wide kernels leave too little spectrum to invert", "[transforms][errors]") {
    const auto fam = LocationScaleFamily::normal();
    const auto a = linspace(-8.0, 8.0, 129);
    std::vector<double> values(a.size(), 1.0);
    SpectralRegularization reg;
    reg.eps = 1e-2;
    CHECK_FAILS_WITH(errc::kernel_spectrum_degenerate,
                     deconvolve_location(a, values, fam, 4.0, reg));
}

TEST_CASE("gaussian kernel at scale sqrt(2) matches the classical smoothing transform",
          "[transforms]") {
    // for h(x) = x^2 the smoothed value is x^2 + variance; the kernel integral
    // carries an extra factor b because the kernel is not normalized
    const auto fam = LocationScaleFamily::normal();
    const auto sq = tabulate(-16.0, 16.0, 4001, [](double x) { return x * x; });
    const double b = std::sqrt(2.0);
    for (double x : {-1.0, 0.0, 2.0}) {
        const double classical = x * x + b * b;
        CHECK(g_transform(sq, fam, x, b) == Approx(b * classical).margin(1e-4));
    }
}

TEST_CASE("rate-domain inversion is exact on the reciprocal", "[transforms]") {
    auto L = [](double s) { return 1.0 / s; };
    for (int order : {4, 10})
        for (double x : {0.5, 1.0, 2.0})
            CHECK(post_laplace_invert(L, x, order) == Approx(1.0).margin(1e-9));
}

TEST_CASE("rate-domain inversion approximates a decaying transform", "[transforms]") {
    auto L = [](double s) { return 1.0 / (s + 1.0); };
    const double rec = post_laplace_invert(L, 1.0, 10);
    CHECK(std::fabs(rec - std::exp(-1.0)) / std::exp(-1.0) <= 0.10);
}

TEST_CASE("rate-domain inversion is linear in the transform", "[transforms][property]") {
    auto L1 = [](double s) { return 1.0 / s; };
    auto L2 = [](double s) { return 1.0 / (s + 1.0); };
    auto mix = [&](double s) { return 2.0 * L1(s) - 0.5 * L2(s); };
    const double lhs = post_laplace_invert(mix, 1.0, 8);
    const double rhs =
        2.0 * post_laplace_invert(L1, 1.0, 8) - 0.5 * post_laplace_invert(L2, 1.0, 8);
    CHECK(lhs == Approx(rhs).margin(1e-9));
}

TEST_CASE("rate-domain inversion validates its arguments", "[transforms][errors]") {
    auto L = [](double s) { return 1.0 / s; };
    CHECK_THROWS_AS(post_laplace_invert(L, -1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(post_laplace_invert(L, 1.0, 1), std::invalid_argument);
}

TEST_CASE("order disagreement on a wild transform is reported", "[transforms][errors]") {
    // oscillates on the scale of the evaluation nodes, so successive orders
    // cannot agree
    auto L = [](double s) { return std::sin(7.0 * s); };
    CHECK_FAILS_WITH(errc::unstable_derivative, post_laplace_invert(L, 1.0, 10));
}
