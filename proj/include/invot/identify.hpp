#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "invot/costs.hpp"
#include "invot/errors.hpp"
#include "invot/forward.hpp"
#include "invot/measures.hpp"
#include "invot/quadrature.hpp"

namespace invot {

struct IdentifiabilityReport {
    bool distinguishable = false;
    bool has_witness = false;
    double witness_a = 0.0, witness_b = 1.0;
    double max_value_gap = 0.0;
    bool plans_agree = true;
    std::vector<double> certificates;  // duality gaps of any LP instances involved
};

inline std::vector<std::pair<double, double>> default_param_lattice(int na = 9, int nb = 9,
                                                                    double a0 = -2.0,
                                                                    double a1 = 2.0,
                                                                    double b0 = 1.1,
                                                                    double b1 = 3.0) {
    std::vector<std::pair<double, double>> grid;
    grid.reserve(std::size_t(na) * std::size_t(nb));
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            grid.emplace_back(na == 1 ? a0 : a0 + (a1 - a0) * double(i) / double(na - 1),
                              nb == 1 ? b0 : b0 + (b1 - b0) * double(j) / double(nb - 1));
    return grid;
}

namespace detail {

inline double locscale_value(const CostSpec& c, const LocationScaleFamily& fam, double a, double b,
                             QuadratureOptions opt) {
    if (std::fabs(b - 1.0) <= 1e-14) return c.h(a);
    return integrate_refined(
        [&](double u) { return c.h(a + (b - 1.0) * fam.generator_quantile(u)); }, 0.0, 1.0, opt);
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

// Sweeps |alpha_{c1} - alpha_{c2}| over a deterministic (a, b) lattice, then
// polishes the best gap with golden-section passes along each axis. A finite
// sweep can certify distinguishability, never its absence: the negative case
// means "no witness found on this lattice".
inline IdentifiabilityReport values_equal_on_family(const CostSpec& c1, const CostSpec& c2,
                                                    const LocationScaleFamily& fam,
                                                    const std::vector<std::pair<double, double>>& lattice,
                                                    double tol, QuadratureOptions opt = {},
                                                    int jobs = 1) {
    if (c1.kind != CostKind::convex || c2.kind != CostKind::convex)
        throw std::invalid_argument("values_equal_on_family: convex costs only");
    if (lattice.empty()) throw std::invalid_argument("values_equal_on_family: empty lattice");
    auto gap_at = [&](double a, double b) {
        return std::fabs(detail::locscale_value(c1, fam, a, b, opt) -
                         detail::locscale_value(c2, fam, a, b, opt));
    };

    // sweep gaps, fanned out by index so the merge order never depends on
    // completion order
    std::vector<double> gaps(lattice.size());
    const int nt = std::max(1, std::min<int>(jobs, int(lattice.size())));
    if (nt == 1) {
        for (std::size_t i = 0; i < lattice.size(); ++i)
            gaps[i] = gap_at(lattice[i].first, lattice[i].second);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(nt));
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t]() {
                for (std::size_t i = std::size_t(t); i < lattice.size(); i += std::size_t(nt))
                    gaps[i] = gap_at(lattice[i].first, lattice[i].second);
            });
        for (auto& th : pool) th.join();
    }

    IdentifiabilityReport rep;
    double best_a = lattice.front().first, best_b = lattice.front().second;
    bool first_found = false;
    double first_a = 0.0, first_b = 1.0;
    double alo = lattice.front().first, ahi = alo;
    double blo = lattice.front().second, bhi = blo;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const auto& [a, b] = lattice[i];
        alo = std::min(alo, a);
        ahi = std::max(ahi, a);
        blo = std::min(blo, b);
        bhi = std::max(bhi, b);
        const double g = gaps[i];
        if (g > rep.max_value_gap) {
            rep.max_value_gap = g;
            best_a = a;
            best_b = b;
        }
        if (!first_found && g > tol) {
            first_found = true;
            first_a = a;
            first_b = b;
        }
    }
    const double da = lattice.size() > 1 ? std::max(1e-6, (ahi - alo) / 8.0) : 0.0;
    const double db = lattice.size() > 1 ? std::max(1e-6, (bhi - blo) / 8.0) : 0.0;
    if (da > 0.0) {
        const double ra = detail::golden_max([&](double a) { return gap_at(a, best_b); },
                                             std::max(alo, best_a - da),
                                             std::min(ahi, best_a + da), 24);
        if (gap_at(ra, best_b) > rep.max_value_gap) {
            rep.max_value_gap = gap_at(ra, best_b);
            best_a = ra;
        }
    }
    if (db > 0.0) {
        const double rb = detail::golden_max([&](double b) { return gap_at(best_a, b); },
                                             std::max(std::max(blo, 1e-6), best_b - db),
                                             std::min(bhi, best_b + db), 24);
        if (gap_at(best_a, rb) > rep.max_value_gap) {
            rep.max_value_gap = gap_at(best_a, rb);
            best_b = rb;
        }
    }
    rep.distinguishable = rep.max_value_gap > tol;
    if (rep.distinguishable) {
        rep.has_witness = true;
        if (first_found) {
            rep.witness_a = first_a;
            rep.witness_b = first_b;
        } else {
            rep.witness_a = best_a;
            rep.witness_b = best_b;
        }
    }
    return rep;
}

struct PlansReport {
    bool plans_agree = true;        // all LP plans coincide with the monotone pairing
    bool monotone_certified = true; // each certified optimal with gap <= 1e-9
    std::vector<double> lp_values;
    std::vector<double> quantile_values;
    std::vector<double> gaps;
    double max_value_spread = 0.0;
};

// The negative result demonstrator: one plan, many values. Discretizes both
// marginals to n equal-mass atoms; for every candidate cost the LP must
// certify the monotone pairing optimal while the values are free to differ.
inline PlansReport plans_only_nonidentifiability(const std::vector<CostSpec>& costs,
                                                 const Measure1D& mu, const Measure1D& nu, int n,
                                                 QuadratureOptions opt = {}) {
    if (costs.empty()) throw std::invalid_argument("plans_only_nonidentifiability: no costs");
    for (const auto& c : costs)
        if (c.kind != CostKind::convex)
            throw std::invalid_argument("plans_only_nonidentifiability: convex costs only");
    const DiscreteMeasure dmu = discretize(mu, n);
    const DiscreteMeasure dnu = discretize(nu, n);
    PlansReport rep;
    const double w = 1.0 / double(n);
    for (const auto& c : costs) {
        const LPResult lp = ot_lp(dmu, dnu, c);
        rep.lp_values.push_back(lp.cost);
        rep.gaps.push_back(lp.gap);
        rep.quantile_values.push_back(ot_cost_quantile(c, mu, nu, opt));
        bool monotone = std::fabs(lp.gap) <= 1e-9;
        for (std::size_t i = 0; i < lp.coupling.n && monotone; ++i)
            for (std::size_t j = 0; j < lp.coupling.m; ++j) {
                const double want = i == j ? w : 0.0;
                if (std::fabs(lp.coupling.at(i, j) - want) > 1e-12) {
                    monotone = false;
                    break;
                }
            }
        if (!monotone) {
            rep.plans_agree = false;
            rep.monotone_certified = false;
        }
    }
    for (double v1 : rep.lp_values)
        for (double v2 : rep.lp_values)
            rep.max_value_spread = std::max(rep.max_value_spread, std::fabs(v1 - v2));
    return rep;
}

struct FirstVariationResult {
    double quotient = 0.0;   // [Psi(t) - Psi(0)] / t
    double inner = 0.0;      // integral of f * phi
    double discrepancy = 0.0;
    double psi0 = 0.0, psit = 0.0;
};

// Checks the first-variation identity: the right derivative of
// t -> OT(mu + t phi, nu) at 0 against the potential inner product. Both
// marginal evaluations go through the same grid pipeline so discretization
// bias cancels in the difference quotient.
inline FirstVariationResult first_variation_check(const CostSpec& cost, const Measure1D& mu,
                                                  const Measure1D& nu, const GridFunction& phi,
                                                  double t, QuadratureOptions opt = {}) {
    if (!(t > 0.0)) throw std::invalid_argument("first_variation_check: t must be positive");
    require(phi.x.size() == mu.grid.size(), errc::misaligned_samples,
            "perturbation must be sampled on the marginal's grid");
    for (std::size_t i = 0; i < phi.x.size(); ++i)
        require(std::fabs(phi.x[i] - mu.grid[i]) <= 1e-9 * (1.0 + std::fabs(mu.grid[i])),
                errc::misaligned_samples, "perturbation grid differs at " + std::to_string(i));
    const double mass = trapezoid(phi.x, phi.y);
    if (std::fabs(mass) > 1e-10)
        throw std::invalid_argument("first_variation_check: perturbation must integrate to zero");
    std::vector<double> pert(mu.density.size());
    double dmax = 0.0;
    for (double d : mu.density) dmax = std::fmax(dmax, d);
    for (std::size_t i = 0; i < pert.size(); ++i) {
        pert[i] = mu.density[i] + t * phi.y[i];
        require(pert[i] >= -1e-15 * dmax, errc::negative_density,
                "perturbed density negative at x = " + std::to_string(mu.grid[i]));
        if (pert[i] < 0.0) pert[i] = 0.0;
    }
    const Measure1D base = cdf_and_quantile_from_density(mu.grid, mu.density);
    const Measure1D moved = cdf_and_quantile_from_density(mu.grid, pert);
    FirstVariationResult r;
    r.psi0 = ot_cost_quantile(cost, base, nu, opt);
    r.psit = ot_cost_quantile(cost, moved, nu, opt);
    r.quotient = (r.psit - r.psi0) / t;
    const Potentials1D P = potentials_1d(cost, base, nu, opt);
    std::vector<double> fw(P.x.size());
    for (std::size_t i = 0; i < P.x.size(); ++i) fw[i] = P.f[i] * phi.y[i];
    r.inner = trapezoid(P.x, fw);
    r.discrepancy = std::fabs(r.quotient - r.inner) / std::max(std::fabs(r.inner), 1e-12);
    return r;
}

struct AffineReductionResult {
    double d_value = 0.0;
    double one_d_value = 0.0;
    double quantile_value = 0.0;
    double gap = 0.0;
    int dim = 1;
};

// Embeds both marginals along a unit direction and compares the d-dimensional
// LP value with the one-dimensional one. For radial costs the two finite
// problems are isometric, so the gap is pure solver noise.
inline AffineReductionResult affine_reduction_check(const CostSpec& cost, const Measure1D& mu,
                                                    const Measure1D& nu,
                                                    const std::vector<double>& u,
                                                    const std::vector<double>& r, int n,
                                                    QuadratureOptions opt = {}) {
    const DiscreteMeasure dmu = discretize(mu, n);
    const DiscreteMeasure dnu = discretize(nu, n);
    const DiscreteMeasure emu = affine_pushforward(dmu, u, r);
    const DiscreteMeasure enu = affine_pushforward(dnu, u, r);
    AffineReductionResult res;
    res.dim = int(u.size());
    res.d_value = ot_lp(emu, enu, cost).cost;
    res.one_d_value = ot_lp(dmu, dnu, cost).cost;
    res.quantile_value = cost.kind == CostKind::convex
                             ? ot_cost_quantile(cost, mu, nu, opt)
                             : std::numeric_limits<double>::quiet_NaN();
    res.gap = std::fabs(res.d_value - res.one_d_value);
    return res;
}

} // namespace invot
