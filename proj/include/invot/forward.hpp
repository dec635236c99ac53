#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "invot/costs.hpp"
#include "invot/lp.hpp"
#include "invot/measures.hpp"
#include "invot/quadrature.hpp"

namespace invot {

// OT value for a convex cost of the difference via the quantile formula:
// integral over u in (0,1) of h(F_mu^{-1}(u) - F_nu^{-1}(u)).
inline double ot_cost_quantile(const CostSpec& cost, const Measure1D& mu, const Measure1D& nu,
                               QuadratureOptions opt = {}) {
    if (cost.kind != CostKind::convex)
        throw std::invalid_argument("ot_cost_quantile: convex costs only");
    return integrate_refined(
        [&](double u) { return cost.h(mu.quantile(u) - nu.quantile(u)); }, 0.0, 1.0, opt);
}

struct TransportMap1D {
    std::vector<double> x;   // mu's grid
    std::vector<double> Tx;  // F_nu^{-1}(F_mu(x))
    std::function<double(double)> eval;  // optional exact evaluator

    double operator()(double t) const {
        return eval ? eval(t) : GridFunction{x, Tx}(t);
    }
};

inline TransportMap1D monotone_map(const Measure1D& mu, const Measure1D& nu) {
    TransportMap1D m;
    m.x = mu.grid;
    m.Tx.resize(m.x.size());
    for (std::size_t i = 0; i < m.x.size(); ++i)
        m.Tx[i] = nu.quantile(mu.cdf[i]);
    m.eval = [mu, nu](double t) { return nu.quantile(mu.cdf_at(t)); };
    return m;
}

// f'(x) = h'(x - T(x)) on mu's grid.
inline GridFunction potential_derivative_1d(const CostSpec& cost, const Measure1D& mu,
                                            const Measure1D& nu) {
    if (cost.kind != CostKind::convex || !cost.hprime)
        throw std::invalid_argument("potential_derivative_1d: needs a convex cost with derivative");
    const auto T = monotone_map(mu, nu);
    GridFunction out;
    out.x = mu.grid;
    out.y.resize(out.x.size());
    for (std::size_t i = 0; i < out.x.size(); ++i)
        out.y[i] = cost.hprime(out.x[i] - T.Tx[i]);
    return out;
}

struct Potentials1D {
    std::vector<double> x;       // mu's grid
    std::vector<double> f;
    std::vector<double> fprime;
    std::vector<double> y;       // nu's grid
    std::vector<double> g;
    double dual_value = 0.0;
    double primal_value = 0.0;
    double rel_gap = 0.0;
};

// f by cumulative trapezoid of f', pinned f = 0 at the left support edge;
// g as the c-transform of f over mu's grid, which keeps f(x) + g(y) <= h(x-y)
// on the whole grid product by construction.
inline Potentials1D potentials_1d(const CostSpec& cost, const Measure1D& mu, const Measure1D& nu,
                                  QuadratureOptions opt = {}) {
    const GridFunction fp = potential_derivative_1d(cost, mu, nu);
    Potentials1D P;
    P.x = mu.grid;
    P.fprime = fp.y;
    P.f.resize(P.x.size(), 0.0);
    for (std::size_t i = 1; i < P.x.size(); ++i)
        P.f[i] = P.f[i - 1] + 0.5 * (P.fprime[i] + P.fprime[i - 1]) * (P.x[i] - P.x[i - 1]);
    P.y = nu.grid;
    P.g.resize(P.y.size());
    for (std::size_t j = 0; j < P.y.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < P.x.size(); ++i)
            best = std::min(best, cost.h(P.x[i] - P.y[j]) - P.f[i]);
        P.g[j] = best;
    }
    std::vector<double> fw(P.x.size()), gw(P.y.size());
    for (std::size_t i = 0; i < P.x.size(); ++i) fw[i] = P.f[i] * mu.density[i];
    for (std::size_t j = 0; j < P.y.size(); ++j) gw[j] = P.g[j] * nu.density[j];
    P.dual_value = trapezoid(P.x, fw) + trapezoid(P.y, gw);
    P.primal_value = ot_cost_quantile(cost, mu, nu, opt);
    P.rel_gap = std::fabs(P.primal_value - P.dual_value) /
                std::max(std::fabs(P.primal_value), 1e-12);
    return P;
}

// Ground-cost matrix between atom clouds: signed displacement in 1D, radial
// (norm of the difference) in higher dimension.
inline std::vector<double> pair_cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                            const CostSpec& cost) {
    if (mu.dim != nu.dim) throw std::invalid_argument("pair_cost_matrix: dimension mismatch");
    std::vector<double> c(mu.size() * nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) {
            double d;
            if (mu.dim == 1) {
                d = mu.atoms[i] - nu.atoms[j];
            } else {
                double s = 0.0;
                for (int k = 0; k < mu.dim; ++k) {
                    const double t = mu.atom(i)[std::size_t(k)] - nu.atom(j)[std::size_t(k)];
                    s += t * t;
                }
                d = std::sqrt(s);
            }
            c[i * nu.size() + j] = cost.h(d);
        }
    return c;
}

// Exact finite-instance oracle.
inline LPResult ot_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& cost) {
    return transport_lp(mu.weights, nu.weights, pair_cost_matrix(mu, nu, cost));
}

inline Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 1e-14));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

struct GaussianOTResult {
    Eigen::MatrixXd D;            // T(x) = D x + offset
    Eigen::VectorXd offset;
    double cost = 0.0;
    Eigen::MatrixXd grad_lin;     // grad f(x) = grad_lin x + grad_offset
    Eigen::VectorXd grad_offset;
};

// Squared-Euclidean OT between Gaussians: D = A^{-1/2}(A^{1/2} B A^{1/2})^{1/2} A^{-1/2},
// T(x) = Dx - Da + b, cost = |a-b|^2 + tr(A + B - 2 (A^{1/2} B A^{1/2})^{1/2}).
inline GaussianOTResult gaussian_ot(const GaussianMeasure& mu, const GaussianMeasure& nu) {
    const Eigen::MatrixXd& A = mu.cov;
    const Eigen::MatrixXd& B = nu.cov;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    require(es.eigenvalues().minCoeff() > 1e-12, errc::not_spd, "source covariance");
    Eigen::VectorXd rt = es.eigenvalues();
    Eigen::VectorXd irt = es.eigenvalues();
    for (Eigen::Index i = 0; i < rt.size(); ++i) {
        rt(i) = std::sqrt(std::max(rt(i), 1e-14));
        irt(i) = 1.0 / rt(i);
    }
    const Eigen::MatrixXd Ah = es.eigenvectors() * rt.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::MatrixXd Ahi = es.eigenvectors() * irt.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::MatrixXd mid = spd_sqrt(Ah * B * Ah);
    GaussianOTResult r;
    r.D = Ahi * mid * Ahi;
    r.D = 0.5 * (r.D + r.D.transpose().eval());
    r.offset = nu.mean - r.D * mu.mean;
    r.cost = (mu.mean - nu.mean).squaredNorm() + A.trace() + B.trace() - 2.0 * mid.trace();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    r.grad_lin = 2.0 * (I - r.D);
    r.grad_offset = 2.0 * (r.D * mu.mean - nu.mean);
    return r;
}

struct ConcaveOTResult {
    double value = 0.0;
    JordanParts parts;
    DiscreteMeasure from, to;   // discretized leftovers, each of mass moved_mass
    LPResult lp;                // empty when nothing moves
    bool has_lp = false;
    double separation = std::numeric_limits<double>::infinity();  // gap between leftover supports
    bool antimonotone = true;   // plan support pairs extremes (diagnostic)
};

// Concave-cost OT on the line: the common mass min(mu, nu) stays in place at
// zero cost (l(0) = 0); only the Jordan leftovers are transported, by an exact
// LP between n equal-mass atoms per side.
inline ConcaveOTResult concave_ot_1d(const CostSpec& cost, const Measure1D& mu,
                                     const Measure1D& nu, int n) {
    if (cost.kind != CostKind::concave)
        throw std::invalid_argument("concave_ot_1d: concave costs only");
    ConcaveOTResult res;
    bool aligned = mu.grid.size() == nu.grid.size();
    for (std::size_t i = 0; aligned && i < mu.grid.size(); ++i)
        aligned = std::abs(mu.grid[i] - nu.grid[i]) <= 1e-12 * (1.0 + std::abs(mu.grid[i]));
    if (aligned) {
        res.parts = jordan_decompose(mu, nu);
    } else {
        // resample both densities onto a shared uniform grid covering both supports
        const double lo = std::min(mu.support_lo(), nu.support_lo());
        const double hi = std::max(mu.support_hi(), nu.support_hi());
        const std::size_t ng = std::max({mu.grid.size(), nu.grid.size(), std::size_t(2049)});
        Measure1D rmu, rnu;
        rmu.grid = rnu.grid = linspace(lo, hi, ng);
        rmu.density.resize(ng);
        rnu.density.resize(ng);
        for (std::size_t i = 0; i < ng; ++i) {
            rmu.density[i] = mu.density_at(rmu.grid[i]);
            rnu.density[i] = nu.density_at(rnu.grid[i]);
        }
        res.parts = jordan_decompose(rmu, rnu);
    }
    if (res.parts.moved_mass <= 1e-12) return res;

    const Measure1D mplus = cdf_and_quantile_from_density(res.parts.grid, res.parts.plus);
    const Measure1D mminus = cdf_and_quantile_from_density(res.parts.grid, res.parts.minus);
    res.from = discretize(mplus, n, res.parts.moved_mass);
    res.to = discretize(mminus, n, res.parts.moved_mass);
    res.lp = ot_lp(res.from, res.to, cost);
    res.has_lp = true;
    res.value = res.lp.cost;

    auto support = [](const std::vector<double>& g, const std::vector<double>& d) {
        double mx = 0.0;
        for (double v : d) mx = std::fmax(mx, v);
        std::size_t lo = 0, hi = d.size() - 1;
        while (lo < d.size() && d[lo] <= 1e-12 * mx) ++lo;
        while (hi > 0 && d[hi] <= 1e-12 * mx) --hi;
        return std::pair<double, double>{g[lo], g[hi]};
    };
    const auto sp = support(res.parts.grid, res.parts.plus);
    const auto sm = support(res.parts.grid, res.parts.minus);
    res.separation = std::max(0.0, std::max(sm.first - sp.second, sp.first - sm.second));

    struct CellRef { std::size_t i, j; };
    std::vector<CellRef> cells;
    const double flow_tol = 1e-12 * res.parts.moved_mass;
    for (std::size_t i = 0; i < res.lp.coupling.n; ++i)
        for (std::size_t j = 0; j < res.lp.coupling.m; ++j)
            if (res.lp.coupling.at(i, j) > flow_tol) cells.push_back({i, j});
    for (std::size_t p = 0; p < cells.size() && res.antimonotone; ++p)
        for (std::size_t q = p + 1; q < cells.size(); ++q) {
            const bool co = (cells[p].i < cells[q].i && cells[p].j < cells[q].j) ||
                            (cells[q].i < cells[p].i && cells[q].j < cells[p].j);
            if (co) {
                res.antimonotone = false;
                break;
            }
        }
    return res;
}

} // namespace invot
