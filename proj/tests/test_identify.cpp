#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace invot;
using Catch::Approx;
using testutil::uniform_measure;

TEST_CASE("identical costs show no gap anywhere", "[identify]") {
    const auto fam = LocationScaleFamily::normal();
    const auto rep = values_equal_on_family(power_cost(2.0), power_cost(2.0), fam,
                                            default_param_lattice(5, 5), 1e-6);
    CHECK_FALSE(rep.distinguishable);
    CHECK_FALSE(rep.has_witness);
    CHECK(rep.max_value_gap <= 1e-10);
}

TEST_CASE("quadratic and quartic separate on the standard lattice", "[identify]") {
    const auto fam = LocationScaleFamily::normal();
    const auto rep = values_equal_on_family(power_cost(2.0), power_cost(4.0), fam,
                                            default_param_lattice(), 1e-6);
    CHECK(rep.distinguishable);
    CHECK(rep.has_witness);
    // first lattice point already exceeds tol, so it is the reported witness
    CHECK(rep.witness_a == Approx(-2.0).margin(1e-12));
    CHECK(rep.witness_b == Approx(1.1).margin(1e-12));
    // the sweep maximum sits at the far corner (2, 3):
    // E(2+2Z)^4 - (4+4) = 160 - 8
    CHECK(rep.max_value_gap == Approx(152.0).margin(1e-3));

    // independent check at the witness: monotone LP values on discretized
    // members reproduce the same separation
    const auto mu = fam.member(rep.witness_a, rep.witness_b);
    const auto nu = fam.member(0.0, 1.0);
    const auto dmu = discretize(mu, 160);
    const auto dnu = discretize(nu, 160);
    const double v2 = ot_lp(dmu, dnu, power_cost(2.0)).cost;
    const double v4 = ot_lp(dmu, dnu, power_cost(4.0)).cost;
    const double expected = 16.2403 - 4.01;
    CHECK(std::fabs(v4 - v2) == Approx(expected).epsilon(0.05));
}

TEST_CASE("single point lattice evaluates moments exactly", "[identify]") {
    const auto fam = LocationScaleFamily::normal();
    const std::vector<std::pair<double, double>> lattice = {{0.0, 2.0}};
    const auto rep =
        values_equal_on_family(power_cost(2.0), power_cost(4.0), fam, lattice, 1e-6);
    CHECK(rep.distinguishable);
    CHECK(rep.witness_a == Approx(0.0).margin(1e-12));
    CHECK(rep.witness_b == Approx(2.0).margin(1e-12));
    CHECK(rep.max_value_gap == Approx(2.0).margin(1e-4));  // E Z^4 - E Z^2 = 3 - 1
}

TEST_CASE("adding a constant shifts every value by that constant", "[identify][property]") {
    const auto fam = LocationScaleFamily::normal();
    const auto base = power_cost(2.0);
    CostSpec shifted = base;
    shifted.h = [h = base.h](double t) { return h(t) + 0.5; };
    const auto rep =
        values_equal_on_family(base, shifted, fam, default_param_lattice(3, 3), 1e-6);
    CHECK(rep.distinguishable);
    CHECK(rep.max_value_gap == Approx(0.5).margin(1e-9));
    CHECK(rep.witness_a == Approx(-2.0).margin(1e-12));
    CHECK(rep.witness_b == Approx(1.1).margin(1e-12));
}

TEST_CASE("parallel sweeps match the serial one bitwise", "[identify]") {
    const auto fam = LocationScaleFamily::normal();
    const auto lattice = default_param_lattice(5, 5);
    const auto r1 = values_equal_on_family(power_cost(2.0), power_cost(3.0), fam, lattice,
                                           1e-6, {}, 1);
    const auto r4 = values_equal_on_family(power_cost(2.0), power_cost(3.0), fam, lattice,
                                           1e-6, {}, 4);
    CHECK(r1.max_value_gap == r4.max_value_gap);
    CHECK(r1.witness_a == r4.witness_a);
    CHECK(r1.witness_b == r4.witness_b);
    CHECK(r1.distinguishable == r4.distinguishable);
}

TEST_CASE("one plan, many values on separated uniforms", "[identify]") {
    const auto mu = uniform_measure(0.0, 1.0);
    const auto nu = uniform_measure(2.0, 3.0);
    const auto rep =
        plans_only_nonidentifiability({power_cost(2.0), power_cost(4.0)}, mu, nu, 50);
    CHECK(rep.plans_agree);
    CHECK(rep.monotone_certified);
    REQUIRE(rep.lp_values.size() == 2);
    CHECK(rep.lp_values[0] == Approx(4.0).margin(1e-9));
    CHECK(rep.lp_values[1] == Approx(16.0).margin(1e-9));
    CHECK(rep.quantile_values[0] == Approx(4.0).margin(1e-6));
    CHECK(rep.quantile_values[1] == Approx(16.0).margin(1e-6));
    for (double g : rep.gaps) CHECK(std::fabs(g) <= 1e-9);
    CHECK(rep.max_value_spread == Approx(12.0).margin(1e-9));
}

TEST_CASE("zero perturbation gives a zero first variation", "[identify]") {
    const auto grid = linspace(-4.0, 4.0, 401);
    std::vector<double> dens(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        dens[i] = std::exp(-0.5 * grid[i] * grid[i]);
    const auto mu = cdf_and_quantile_from_density(grid, dens);
    const auto nu = uniform_measure(0.0, 2.0, 401);
    GridFunction phi{grid, std::vector<double>(grid.size(), 0.0)};
    const auto r = first_variation_check(power_cost(2.0), mu, nu, phi, 1e-3);
    CHECK(r.quotient == Approx(0.0).margin(1e-12));
    CHECK(r.inner == Approx(0.0).margin(1e-12));
    CHECK(r.psit == r.psi0);
}

TEST_CASE("difference quotient matches the potential pairing", "[identify]") {
    const auto grid = linspace(-4.0, 4.0, 401);
    std::vector<double> dens(grid.size()), bump(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        dens[i] = std::exp(-0.5 * grid[i] * grid[i]);
        bump[i] = grid[i] * std::exp(-0.5 * grid[i] * grid[i]);
    }
    const auto mu = cdf_and_quantile_from_density(grid, dens);
    const auto nu = uniform_measure(0.0, 2.0, 401);
    const GridFunction phi{grid, bump};
    const auto r1 = first_variation_check(power_cost(2.0), mu, nu, phi, 1e-3);
    CHECK(r1.discrepancy <= 1e-2);
    const auto r2 = first_variation_check(power_cost(2.0), mu, nu, phi, 5e-4);
    CHECK(r2.discrepancy < r1.discrepancy);
}

TEST_CASE("perturbations that break positivity are rejected", "[identify][errors]") {
    const auto grid = linspace(-4.0, 4.0, 401);
    std::vector<double> dens(grid.size()), spike(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        dens[i] = std::exp(-0.5 * grid[i] * grid[i]);
        spike[i] = 1000.0 * grid[i] * std::exp(-0.5 * grid[i] * grid[i]);
    }
    const auto mu = cdf_and_quantile_from_density(grid, dens);
    const auto nu = uniform_measure(0.0, 2.0, 401);
    CHECK_FAILS_WITH(errc::negative_density,
                     first_variation_check(power_cost(2.0), mu, nu, GridFunction{grid, spike},
                                           1e-3));
    // off-grid perturbations and nonzero-mass ones are caught too
    GridFunction off{linspace(-4.0, 4.0, 101), std::vector<double>(101, 0.0)};
    CHECK_FAILS_WITH(errc::misaligned_samples,
                     first_variation_check(power_cost(2.0), mu, nu, off, 1e-3));
    GridFunction lopsided{grid, std::vector<double>(grid.size(), 1.0)};
    CHECK_THROWS_AS(first_variation_check(power_cost(2.0), mu, nu, lopsided, 1e-3),
                    std::invalid_argument);
}

TEST_CASE("embedding along a line reproduces the one dimensional value",
          "[identify][radial]") {
    const auto mu = uniform_measure(0.0, 1.0);
    const auto nu = uniform_measure(2.0, 3.0);
    const auto cost = power_cost(2.0);
    const std::vector<double> diag = {std::sqrt(0.5), std::sqrt(0.5)};
    const auto res = affine_reduction_check(cost, mu, nu, diag, {0.3, -0.7}, 100);
    CHECK(res.dim == 2);
    CHECK(res.gap <= 1e-9);
    CHECK(res.quantile_value == Approx(4.0).margin(1e-6));
    CHECK(res.d_value == Approx(res.one_d_value).margin(1e-9));

    const auto axis = affine_reduction_check(cost, mu, nu, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 80);
    CHECK(axis.dim == 3);
    CHECK(axis.gap <= 1e-9);
}

TEST_CASE("the offset drops out of embedded transport", "[identify][radial][property]") {
    const auto mu = uniform_measure(0.0, 1.0);
    const auto nu = uniform_measure(0.5, 2.5);
    const auto cost = power_cost(3.0);
    const std::vector<double> u = {0.0, 1.0};
    const auto shifted = affine_reduction_check(cost, mu, nu, u, {5.0, -3.0}, 60);
    const auto centered = affine_reduction_check(cost, mu, nu, u, {0.0, 0.0}, 60);
    CHECK(shifted.d_value == Approx(centered.d_value).margin(1e-9));
}
