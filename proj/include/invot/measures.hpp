#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "invot/errors.hpp"
#include "invot/grid.hpp"
#include "invot/special.hpp"

namespace invot {

namespace defaults {
inline constexpr int grid_n = 1001;        // member grid length
inline constexpr int quantile_table_m = 512;
inline constexpr double tail_mass = 2.5e-10;  // truncation per side for unbounded supports
} // namespace defaults

// One-dimensional measure with density, CDF and quantile data on a strictly
// increasing grid. The cdf column is the canonical integral of the density:
// grid-built measures accumulate it by trapezoid, analytic family members
// store exact CDF values (their sampled density column is a tabulation, not
// the integration source). Analytic members also carry closures, used instead
// of piecewise-linear inversion wherever they exist.
struct Measure1D {
    std::vector<double> grid;
    std::vector<double> density;
    std::vector<double> cdf;
    std::vector<double> quantile_table;  // values at u_j = (j - 1/2)/m

    std::function<double(double)> exact_quantile;  // optional, u in (0,1)
    std::function<double(double)> exact_cdf;       // optional
    std::function<double(double)> exact_density;   // optional

    double support_lo() const { return grid.front(); }
    double support_hi() const { return grid.back(); }

    double quantile(double u) const {
        if (exact_quantile)
            return exact_quantile(std::clamp(u, defaults::tail_mass, 1.0 - defaults::tail_mass));
        const double lo = cdf.front(), hi = cdf.back();
        const double uc = std::clamp(u, lo, hi);
        return pl_inverse(grid, cdf, uc);
    }

    double cdf_at(double x) const {
        if (exact_cdf) return exact_cdf(x);
        return GridFunction{grid, cdf}(x);
    }

    double density_at(double x) const {
        if (exact_density) return exact_density(x);
        if (x < grid.front() || x > grid.back()) return 0.0;
        return GridFunction{grid, density}(x);
    }
};

namespace detail {

inline void check_finite(const std::vector<double>& v, const char* what) {
    for (double t : v)
        if (!std::isfinite(t)) fail(errc::non_finite_input, std::string(what) + " contains a non-finite value");
}

inline std::vector<double> quantile_table_from(const std::vector<double>& grid,
                                               const std::vector<double>& cdf, int m) {
    std::vector<double> qt(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double u = (double(j) + 0.5) / double(m);
        qt[std::size_t(j)] = pl_inverse(grid, cdf, std::clamp(u, cdf.front(), cdf.back()));
    }
    return qt;
}

} // namespace detail

// Normalizes a non-negative density sampled on a grid into a Measure1D:
// trapezoid mass, cumulative trapezoid CDF, left-continuous piecewise-linear
// quantile table.
inline Measure1D cdf_and_quantile_from_density(std::vector<double> grid, std::vector<double> density,
                                               int table_m = defaults::quantile_table_m) {
    if (grid.size() < 2 || grid.size() != density.size())
        throw std::invalid_argument("cdf_and_quantile_from_density: need matching grids of length >= 2");
    detail::check_finite(grid, "grid");
    detail::check_finite(density, "density");
    if (!strictly_increasing(grid))
        throw std::invalid_argument("cdf_and_quantile_from_density: grid must be strictly increasing");
    double dmax = 0.0;
    for (double d : density) dmax = std::fmax(dmax, std::fabs(d));
    for (double& d : density) {
        if (d < 0.0) {
            if (d < -1e-9 * dmax)
                throw std::invalid_argument("cdf_and_quantile_from_density: negative density");
            d = 0.0;
        }
    }
    const double mass = trapezoid(grid, density);
    require(mass >= 1e-14, errc::all_zero_density, "density integrates to " + std::to_string(mass));
    Measure1D m;
    m.grid = std::move(grid);
    m.density = std::move(density);
    for (double& d : m.density) d /= mass;
    m.cdf.resize(m.grid.size(), 0.0);
    for (std::size_t i = 1; i < m.grid.size(); ++i)
        m.cdf[i] = m.cdf[i - 1] +
                   0.5 * (m.density[i] + m.density[i - 1]) * (m.grid[i] - m.grid[i - 1]);
    m.cdf.back() = 1.0;  // trapezoid of the normalized density, up to rounding
    m.quantile_table = detail::quantile_table_from(m.grid, m.cdf, table_m);
    return m;
}

// Location-scale family G_{a,b}(x) = G((x - a)/b) around a generator G.
// Builtin generators carry analytic closures; custom-grid generators wrap a
// grid measure.
class LocationScaleFamily {
public:
    static LocationScaleFamily normal() {
        LocationScaleFamily f;
        f.name_ = "normal";
        f.pdf_ = normal_pdf;
        f.cdf_ = normal_cdf;
        f.quantile_ = normal_quantile;
        f.symmetric_ = true;
        f.uniform_grid_ = true;
        return f;
    }
    static LocationScaleFamily cauchy() {
        LocationScaleFamily f;
        f.name_ = "cauchy";
        f.pdf_ = cauchy_pdf;
        f.cdf_ = cauchy_cdf;
        f.quantile_ = cauchy_quantile;
        f.symmetric_ = true;
        f.uniform_grid_ = false;  // heavy tails: equal-mass grid keeps the tabulation sane
        return f;
    }
    static LocationScaleFamily laplace() {
        LocationScaleFamily f;
        f.name_ = "laplace";
        f.pdf_ = laplace_pdf;
        f.cdf_ = laplace_cdf;
        f.quantile_ = laplace_quantile;
        f.symmetric_ = true;
        f.uniform_grid_ = true;
        return f;
    }
    static LocationScaleFamily exponential_scale() {
        LocationScaleFamily f;
        f.name_ = "exponential-scale";
        f.pdf_ = expgen_pdf;
        f.cdf_ = expgen_cdf;
        f.quantile_ = expgen_quantile;
        f.symmetric_ = false;
        f.uniform_grid_ = true;
        return f;
    }
    static LocationScaleFamily custom_grid(Measure1D generator) {
        LocationScaleFamily f;
        f.name_ = "custom-grid";
        f.custom_ = std::move(generator);
        f.symmetric_ = false;
        f.uniform_grid_ = true;
        return f;
    }

    const std::string& name() const { return name_; }
    bool analytic() const { return static_cast<bool>(quantile_); }
    bool symmetric() const { return symmetric_; }

    double generator_pdf(double x) const {
        return analytic() ? pdf_(x) : custom_.density_at(x);
    }
    double generator_cdf(double x) const {
        return analytic() ? cdf_(x) : custom_.cdf_at(x);
    }
    double generator_quantile(double u) const {
        // same tail truncation as Measure1D::quantile, so u rounded to 0 or 1
        // by upstream arithmetic cannot produce an infinite node
        u = std::clamp(u, defaults::tail_mass, 1.0 - defaults::tail_mass);
        return analytic() ? quantile_(u) : custom_.quantile(u);
    }

    // Effective generator support after tail truncation.
    double generator_lo() const {
        return analytic() ? quantile_(defaults::tail_mass) : custom_.support_lo();
    }
    double generator_hi() const {
        return analytic() ? quantile_(1.0 - defaults::tail_mass) : custom_.support_hi();
    }

    Measure1D member(double a, double b, int grid_n = defaults::grid_n) const {
        require(std::isfinite(a) && std::isfinite(b), errc::non_finite_input,
                "location/scale parameters must be finite");
        require(b > 0.0, errc::non_positive_scale, "scale b = " + std::to_string(b));
        if (!analytic()) return member_from_grid(a, b);

        const double tau = defaults::tail_mass;
        Measure1D m;
        m.grid.resize(std::size_t(grid_n));
        if (uniform_grid_) {
            const double lo = a + b * quantile_(tau), hi = a + b * quantile_(1.0 - tau);
            m.grid = linspace(lo, hi, std::size_t(grid_n));
        } else {
            for (int k = 0; k < grid_n; ++k) {
                const double u = tau + (1.0 - 2.0 * tau) * double(k) / double(grid_n - 1);
                m.grid[std::size_t(k)] = a + b * quantile_(u);
            }
        }
        m.density.resize(m.grid.size());
        m.cdf.resize(m.grid.size());
        for (std::size_t i = 0; i < m.grid.size(); ++i) {
            const double z = (m.grid[i] - a) / b;
            m.density[i] = pdf_(z) / b;
            m.cdf[i] = cdf_(z);
        }
        m.quantile_table.resize(defaults::quantile_table_m);
        for (int j = 0; j < defaults::quantile_table_m; ++j) {
            const double u = (double(j) + 0.5) / double(defaults::quantile_table_m);
            m.quantile_table[std::size_t(j)] = a + b * quantile_(u);
        }
        auto q = quantile_, F = cdf_, g = pdf_;
        m.exact_quantile = [a, b, q](double u) { return a + b * q(u); };
        m.exact_cdf = [a, b, F](double x) { return F((x - a) / b); };
        m.exact_density = [a, b, g](double x) { return g((x - a) / b) / b; };
        return m;
    }

private:
    Measure1D member_from_grid(double a, double b) const {
        Measure1D m;
        m.grid.resize(custom_.grid.size());
        m.density.resize(custom_.grid.size());
        for (std::size_t i = 0; i < custom_.grid.size(); ++i) {
            m.grid[i] = a + b * custom_.grid[i];
            m.density[i] = custom_.density[i] / b;
        }
        m.cdf = custom_.cdf;
        m.quantile_table.resize(custom_.quantile_table.size());
        for (std::size_t j = 0; j < custom_.quantile_table.size(); ++j)
            m.quantile_table[j] = a + b * custom_.quantile_table[j];
        return m;
    }

    std::string name_;
    std::function<double(double)> pdf_, cdf_, quantile_;
    bool symmetric_ = false;
    bool uniform_grid_ = true;
    Measure1D custom_;
};

// Finitely supported measure; atoms are row-major n x dim.
struct DiscreteMeasure {
    int dim = 1;
    std::vector<double> atoms;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    double total_mass() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
    double atom1d(std::size_t i) const { return atoms[i * std::size_t(dim)]; }
    const double* atom(std::size_t i) const { return atoms.data() + i * std::size_t(dim); }
};

// Equal-weight atoms at the (i - 1/2)/n quantile levels.
inline DiscreteMeasure discretize(const Measure1D& m, int n, double total_mass = 1.0) {
    if (n < 1) throw std::invalid_argument("discretize: n must be positive");
    DiscreteMeasure d;
    d.dim = 1;
    d.atoms.resize(std::size_t(n));
    d.weights.assign(std::size_t(n), total_mass / double(n));
    for (int i = 0; i < n; ++i)
        d.atoms[std::size_t(i)] = m.quantile((double(i) + 0.5) / double(n));
    return d;
}

// Pushforward of 1-d atoms under x -> x u + r for a unit direction u.
inline DiscreteMeasure affine_pushforward(const DiscreteMeasure& d, const std::vector<double>& u,
                                          const std::vector<double>& r) {
    if (d.dim != 1) throw std::invalid_argument("affine_pushforward: expects 1-d atoms");
    if (u.size() != r.size() || u.empty())
        throw std::invalid_argument("affine_pushforward: direction/offset size mismatch");
    double norm2 = 0.0;
    for (double c : u) norm2 += c * c;
    require(std::fabs(std::sqrt(norm2) - 1.0) <= 1e-9, errc::non_unit_direction,
            "direction norm = " + std::to_string(std::sqrt(norm2)));
    DiscreteMeasure out;
    out.dim = int(u.size());
    out.weights = d.weights;
    out.atoms.resize(d.size() * u.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < u.size(); ++j)
            out.atoms[i * u.size() + j] = d.atoms[i] * u[j] + r[j];
    return out;
}

// Jordan-style decomposition of mu - nu on a shared grid: the positive and
// negative leftover densities after removing the common mass min(mu, nu).
// Numerical asymmetry between the two leftover masses is split evenly.
struct JordanParts {
    std::vector<double> grid;
    std::vector<double> plus;
    std::vector<double> minus;
    double moved_mass = 0.0;   // integral of either leftover after the even split
    double common_mass = 0.0;  // 1 - moved_mass
};

inline JordanParts jordan_decompose(const Measure1D& mu, const Measure1D& nu) {
    require(mu.grid.size() == nu.grid.size(), errc::grid_mismatch,
            "grids differ in length");
    for (std::size_t i = 0; i < mu.grid.size(); ++i)
        require(std::fabs(mu.grid[i] - nu.grid[i]) <= 1e-12 * (1.0 + std::fabs(mu.grid[i])),
                errc::grid_mismatch, "grids differ at node " + std::to_string(i));
    JordanParts jp;
    jp.grid = mu.grid;
    const std::size_t n = jp.grid.size();
    jp.plus.resize(n);
    jp.minus.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = mu.density[i] - nu.density[i];
        jp.plus[i] = diff > 0.0 ? diff : 0.0;
        jp.minus[i] = diff < 0.0 ? -diff : 0.0;
    }
    const double mp = trapezoid(jp.grid, jp.plus);
    const double mm = trapezoid(jp.grid, jp.minus);
    const double mbar = 0.5 * (mp + mm);
    if (mp > 0.0)
        for (double& v : jp.plus) v *= mbar / mp;
    if (mm > 0.0)
        for (double& v : jp.minus) v *= mbar / mm;
    jp.moved_mass = mbar;
    jp.common_mass = 1.0 - mbar;
    return jp;
}

// Gaussian measure with SPD covariance.
struct GaussianMeasure {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    GaussianMeasure(Eigen::VectorXd m, Eigen::MatrixXd c) : mean(std::move(m)), cov(std::move(c)) {
        if (cov.rows() != cov.cols() || cov.rows() != mean.size())
            throw std::invalid_argument("GaussianMeasure: dimension mismatch");
        const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("GaussianMeasure: covariance not symmetric");
        cov = 0.5 * (cov + cov.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        require(es.eigenvalues().minCoeff() > 1e-12, errc::not_spd,
                "covariance eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
    }
};

} // namespace invot
