#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "invot/costs.hpp"
#include "invot/errors.hpp"
#include "invot/forward.hpp"
#include "invot/grid.hpp"
#include "invot/measures.hpp"
#include "invot/transforms.hpp"

namespace invot {

// Samples of the conjugate gradient: z = grad h*(y) in the convex case,
// z = sign(y) (l')^{-1}(|y|) in the concave case. The identified domain is the
// hull of the observed y values.
struct ConjugateGraph {
    CostKind kind = CostKind::convex;
    std::vector<double> y, z;  // sorted by y, duplicates merged
    double domain_lo = 0.0, domain_hi = 0.0;
    double dup_spread = 0.0;   // worst z disagreement among merged duplicate y
};

// Pairs (f'(x_i), x_i - T(x_i)) from aligned map and potential-derivative
// samples.
inline ConjugateGraph conjugate_graph_from_map(const TransportMap1D& T, const GridFunction& fprime,
                                               CostKind kind = CostKind::convex) {
    require(T.x.size() == fprime.x.size() && !T.x.empty(), errc::misaligned_samples,
            "map and derivative sample counts differ");
    for (std::size_t i = 0; i < T.x.size(); ++i)
        require(std::fabs(T.x[i] - fprime.x[i]) <= 1e-9 * (1.0 + std::fabs(T.x[i])),
                errc::misaligned_samples, "abscissae differ at index " + std::to_string(i));
    std::vector<std::size_t> ord(T.x.size());
    std::iota(ord.begin(), ord.end(), std::size_t(0));
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return fprime.y[a] < fprime.y[b]; });
    ConjugateGraph g;
    g.kind = kind;
    for (std::size_t k = 0; k < ord.size();) {
        const double yk = fprime.y[ord[k]];
        double zsum = 0.0, zlo = std::numeric_limits<double>::infinity(), zhi = -zlo;
        std::size_t cnt = 0;
        while (k < ord.size() && fprime.y[ord[k]] - yk <= 1e-10) {
            const double z = T.x[ord[k]] - T.Tx[ord[k]];
            zsum += z;
            zlo = std::min(zlo, z);
            zhi = std::max(zhi, z);
            ++cnt;
            ++k;
        }
        g.y.push_back(yk);
        g.z.push_back(zsum / double(cnt));
        g.dup_spread = std::max(g.dup_spread, zhi - zlo);
    }
    g.domain_lo = g.y.front();
    g.domain_hi = g.y.back();
    return g;
}

struct ValueAnchor {
    Measure1D mu, nu;
    double alpha = 0.0;
};

struct RecoveredCost {
    GridFunction hprime;  // h' on its tabulation grid (l' in the concave case)
    GridFunction h;       // running integral of hprime (l in the concave case)
    double k = 0.0;
    std::string k_method;  // value-match | origin-pin | unresolved
    double domain_lo = 0.0, domain_hi = 0.0;
    double isotonic_projection_distance = 0.0;
    double anchor_residual = 0.0;
};

namespace detail {

// Collapse ties in x (within atol) by averaging the attached values.
inline void dedupe_sorted(std::vector<double>& x, std::vector<double>& v, double atol) {
    std::vector<double> xo, vo;
    for (std::size_t k = 0; k < x.size();) {
        double xs = 0.0, vs = 0.0;
        std::size_t cnt = 0;
        const double x0 = x[k];
        while (k < x.size() && x[k] - x0 <= atol) {
            xs += x[k];
            vs += v[k];
            ++cnt;
            ++k;
        }
        xo.push_back(xs / double(cnt));
        vo.push_back(vs / double(cnt));
    }
    x = std::move(xo);
    v = std::move(vo);
}

inline std::pair<double, double> displacement_range(const Measure1D& mu, const Measure1D& nu,
                                                    int samples = 4097) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < samples; ++i) {
        const double u = (double(i) + 0.5) / double(samples);
        const double d = mu.quantile(u) - nu.quantile(u);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

} // namespace detail

// Invert a convex conjugate graph into h' (monotone piecewise-linear), then
// integrate. The additive constant is fixed by a value anchor when given,
// by h(0) = 0 when 0 lies in the recovered derivative's domain, and is
// otherwise reported unresolved (left edge pinned to 0 for concreteness).
inline RecoveredCost assemble_convex_cost(const ConjugateGraph& graph,
                                          const std::optional<ValueAnchor>& anchor = std::nullopt,
                                          QuadratureOptions opt = {}) {
    if (graph.kind != CostKind::convex)
        throw std::invalid_argument("assemble_convex_cost: convex graphs only");
    require(graph.y.size() >= 2, errc::degenerate_graph,
            "need at least 2 distinct gradient samples, have " + std::to_string(graph.y.size()));
    require(graph.dup_spread <= 1e-6, errc::non_monotone_graph,
            "duplicate y carry disagreeing z (spread " + std::to_string(graph.dup_spread) + ")");

    // z must be non-decreasing along y; measure worst descent before projecting
    double run = -std::numeric_limits<double>::infinity(), viol = 0.0;
    for (double z : graph.z) {
        run = std::max(run, z);
        viol = std::max(viol, run - z);
    }
    require(viol <= 1e-6, errc::non_monotone_graph,
            "gradient samples descend by " + std::to_string(viol));
    std::vector<double> zs = isotonic_increasing(graph.z);
    double proj = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i)
        proj = std::max(proj, std::fabs(zs[i] - graph.z[i]));

    // swap coordinates: h'(z) = y
    std::vector<double> hx = zs, hy = graph.y;
    detail::dedupe_sorted(hx, hy, 1e-12);
    require(hx.size() >= 2, errc::degenerate_graph, "gradient range collapses to a point");

    RecoveredCost rc;
    rc.domain_lo = hx.front();  // displacement hull, where h' is actually pinned down
    rc.domain_hi = hx.back();
    rc.isotonic_projection_distance = proj;
    rc.hprime = GridFunction{hx, hy};
    std::vector<double> hv(hx.size(), 0.0);
    for (std::size_t i = 1; i < hx.size(); ++i)
        hv[i] = hv[i - 1] + 0.5 * (hy[i] + hy[i - 1]) * (hx[i] - hx[i - 1]);

    const bool zero_inside = hx.front() <= 0.0 && hx.back() >= 0.0;
    if (zero_inside) {
        const double at0 = GridFunction{hx, hv}(0.0);
        for (double& v : hv) v -= at0;
    }
    if (anchor) {
        const auto [dlo, dhi] = detail::displacement_range(anchor->mu, anchor->nu);
        const double slack = 1e-9 * (1.0 + hx.back() - hx.front());
        require(dlo >= hx.front() - slack && dhi <= hx.back() + slack, errc::anchor_infeasible,
                "anchor displacements [" + std::to_string(dlo) + ", " + std::to_string(dhi) +
                    "] leave the identified domain");
        CostSpec base = grid_cost(hx, hv, CostKind::convex);
        double alpha0;
        try {
            alpha0 = ot_cost_quantile(base, anchor->mu, anchor->nu, opt);
        } catch (const error&) {
            fail(errc::anchor_infeasible, "anchor value evaluation failed");
        }
        require(std::isfinite(alpha0), errc::anchor_infeasible, "anchor value not finite");
        rc.k = anchor->alpha - alpha0;  // a constant shifts the OT value by itself
        for (double& v : hv) v += rc.k;
        rc.k_method = "value-match";
        CostSpec shifted = grid_cost(hx, hv, CostKind::convex);
        rc.anchor_residual =
            std::fabs(ot_cost_quantile(shifted, anchor->mu, anchor->nu, opt) - anchor->alpha);
    } else if (zero_inside) {
        rc.k = 0.0;
        rc.k_method = "origin-pin";
    } else {
        rc.k = 0.0;
        rc.k_method = "unresolved";
    }
    rc.h = GridFunction{hx, hv};
    return rc;
}

// Concave counterpart: graph points give (l')^{-1} on the visited distance
// scale; invert to l', integrate to l with l(0) = 0 when the visited distances
// reach (numerically) down to zero.
inline RecoveredCost recover_concave(const ConjugateGraph& graph) {
    if (graph.kind != CostKind::concave)
        throw std::invalid_argument("recover_concave: concave graphs only");
    std::vector<double> s, t;
    for (std::size_t i = 0; i < graph.y.size(); ++i) {
        const double sign = graph.y[i] >= 0.0 ? 1.0 : -1.0;
        require(graph.z[i] * sign >= -1e-8, errc::sign_inconsistent,
                "displacement opposes gradient at sample " + std::to_string(i));
        if (std::fabs(graph.y[i]) < 1e-12) continue;  // uninformative at the origin
        s.push_back(std::fabs(graph.y[i]));
        t.push_back(std::fabs(graph.z[i]));
    }
    std::vector<std::size_t> ord(s.size());
    std::iota(ord.begin(), ord.end(), std::size_t(0));
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
    std::vector<double> ss(s.size()), ts(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        ss[i] = s[ord[i]];
        ts[i] = t[ord[i]];
    }
    detail::dedupe_sorted(ss, ts, 1e-10);
    require(ss.size() >= 2, errc::degenerate_graph,
            "need at least 2 distinct slope samples, have " + std::to_string(ss.size()));

    std::vector<double> tproj = isotonic_decreasing(ts);  // (l')^{-1} decreases
    double proj = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i)
        proj = std::max(proj, std::fabs(tproj[i] - ts[i]));

    // invert: l'(t) = s, with t ascending and s descending
    std::vector<double> lx(tproj.rbegin(), tproj.rend());
    std::vector<double> ly(ss.rbegin(), ss.rend());
    detail::dedupe_sorted(lx, ly, 1e-12);
    require(lx.size() >= 2, errc::degenerate_graph, "distance range collapses to a point");

    RecoveredCost rc;
    rc.domain_lo = lx.front();  // visited distance scale
    rc.domain_hi = lx.back();
    rc.isotonic_projection_distance = proj;
    rc.hprime = GridFunction{lx, ly};
    std::vector<double> lv(lx.size(), 0.0);
    for (std::size_t i = 1; i < lx.size(); ++i)
        lv[i] = lv[i - 1] + 0.5 * (ly[i] + ly[i - 1]) * (lx[i] - lx[i - 1]);

    const double tmin = lx.front(), tmax = lx.back();
    if (tmin <= 1e-2 * tmax) {
        // extend below tmin with a local power law l'(t) ~ c t^(gamma-1); exact
        // for power costs, and the gap [0, tmin] is small in this branch
        double head = ly.front() * tmin;  // constant-slope fallback
        if (lx.size() >= 2 && ly[1] > 0.0 && ly[0] > 0.0 && lx[0] > 0.0 && lx[1] > lx[0]) {
            const double gm1 = std::log(ly[1] / ly[0]) / std::log(lx[1] / lx[0]);
            const double gamma = gm1 + 1.0;
            if (gamma > 0.05 && gamma < 1.5) head = ly.front() * tmin / gamma;
        }
        for (double& v : lv) v += head;
        rc.k = 0.0;
        rc.k_method = "origin-pin";
    } else {
        rc.k = 0.0;
        rc.k_method = "unresolved";
    }
    rc.h = GridFunction{lx, lv};
    return rc;
}

// Conjugate graph for a concave instance, read off the leftover LP: the atom
// duals play f, differentiated along the atom grid; displacements come from
// the flow-weighted partner of each source atom.
inline ConjugateGraph concave_graph_from_lp(const ConcaveOTResult& c) {
    require(c.has_lp, errc::degenerate_graph, "no transported mass to read a graph from");
    const std::size_t n = c.from.size();
    TransportMap1D T;
    T.x.resize(n);
    T.Tx.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        T.x[i] = c.from.atoms[i];
        double wsum = 0.0, ysum = 0.0;
        for (std::size_t j = 0; j < c.to.size(); ++j) {
            const double f = c.lp.coupling.at(i, j);
            wsum += f;
            ysum += f * c.to.atoms[j];
        }
        T.Tx[i] = wsum > 0.0 ? ysum / wsum : c.from.atoms[i];
    }
    GridFunction fp;
    fp.x = T.x;
    fp.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        fp.y[i] = (c.lp.row_dual[hi] - c.lp.row_dual[lo]) / (T.x[hi] - T.x[lo]);
    }
    return conjugate_graph_from_map(T, fp, CostKind::concave);
}

enum class RecoverMethod { fourier, post };

struct ValueRecovery {
    std::vector<double> x;  // a-grid (fourier) or requested points (post)
    std::vector<double> h;
    bool refit = false;
    std::size_t clamped_bins = 0;
};

namespace detail {

inline double generator_moment(const LocationScaleFamily& fam, int k, QuadratureOptions opt = {}) {
    return integrate_refined(
        [&](double u) { return std::pow(u, k) * fam.generator_pdf(u); }, fam.generator_lo(),
        fam.generator_hi(), opt);
}

} // namespace detail

// Spectral inversion of a value surface sampled on a uniform a-grid at one
// fixed b. Optionally re-fits a low-degree polynomial through the forward
// model on the central half of the grid, recovering growth the clamped band
// cannot represent (only sensible when the cost is polynomial-bounded).
inline ValueRecovery recover_values_fourier(const GTransformSamples& surf,
                                            const LocationScaleFamily& fam,
                                            const SpectralRegularization& reg = {},
                                            bool poly_refit = false) {
    require(fam.symmetric(), errc::method_family_mismatch,
            "fourier inversion needs a symmetric generator, got " + fam.name());
    require(surf.entries.size() >= 8, errc::misaligned_samples, "too few surface samples");
    const double b = surf.entries.front().b;
    for (const auto& e : surf.entries)
        require(std::fabs(e.b - b) <= 1e-12 * (1.0 + std::fabs(b)), errc::misaligned_samples,
                "fourier inversion needs one fixed b across the surface");
    std::vector<GTransformSample> es = surf.entries;
    std::sort(es.begin(), es.end(),
              [](const GTransformSample& p, const GTransformSample& q) { return p.a < q.a; });
    ValueRecovery out;
    out.x.reserve(es.size());
    std::vector<double> v;
    v.reserve(es.size());
    for (const auto& e : es) {
        out.x.push_back(e.a);
        v.push_back(e.value);
    }
    const double scale = std::fabs(b - 1.0);
    if (scale <= 1e-12) {
        out.h = v;  // b = 1 section: the surface IS the cost
        return out;
    }
    out.h = deconvolve_location(out.x, v, fam, scale, reg, &out.clamped_bins);

    if (poly_refit) {
        constexpr int deg = 4;
        double mom[deg + 1];
        for (int k = 0; k <= deg; ++k) mom[k] = detail::generator_moment(fam, k);
        const std::size_t n = out.x.size();
        const std::size_t lo = n / 4, hi = n - n / 4;  // central half
        Eigen::MatrixXd A(Eigen::Index(hi - lo), deg + 1);
        Eigen::VectorXd rhs(Eigen::Index(hi - lo));
        for (std::size_t r = lo; r < hi; ++r) {
            const double a = out.x[r];
            for (int j = 0; j <= deg; ++j) {
                double m = 0.0;  // integral of g((x-a)/s) x^j dx
                double binom = 1.0;
                for (int i = 0; i <= j; ++i) {
                    m += binom * std::pow(a, j - i) * std::pow(scale, i) * mom[i];
                    binom = binom * double(j - i) / double(i + 1);
                }
                A(Eigen::Index(r - lo), j) = scale * m;
            }
            rhs(Eigen::Index(r - lo)) = v[r];
        }
        Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = deg; j >= 0; --j) acc = acc * out.x[i] + coef(j);
            out.h[i] = acc;
        }
        out.refit = true;
    }
    return out;
}

// Laplace-side inversion: the surface holds alpha(0, b) = L_h(1/b) for a
// one-sided (or symmetric-halved) exponential kernel; Post's formula needs L
// at specific rate clusters, looked up exactly (no interpolation survives the
// high-order stencil).
inline ValueRecovery recover_values_post(const GTransformSamples& surf,
                                         const LocationScaleFamily& fam,
                                         const std::vector<double>& targets, int order) {
    require(fam.name() == "exponential-scale" || fam.name() == "laplace",
            errc::method_family_mismatch,
            "post inversion needs an exponential-type generator, got " + fam.name());
    std::vector<double> rates, vals;
    for (const auto& e : surf.entries) {
        require(std::fabs(e.a) <= 1e-12, errc::method_family_mismatch,
                "post inversion needs a = 0 samples");
        require(e.b > 0.0, errc::non_positive_scale, "surface entry b <= 0");
        rates.push_back(1.0 / e.b);
        vals.push_back(e.value);
    }
    auto L = [&](double sq) {
        for (std::size_t i = 0; i < rates.size(); ++i)
            if (std::fabs(rates[i] - sq) <= 1e-9 * sq) return vals[i];
        fail(errc::misaligned_samples, "surface lacks rate " + std::to_string(sq));
    };
    ValueRecovery out;
    out.x = targets;
    out.h.reserve(targets.size());
    for (double x : targets) out.h.push_back(post_laplace_invert(L, x, order));
    return out;
}

inline ValueRecovery recover_from_values_locscale(const GTransformSamples& surf,
                                                  const LocationScaleFamily& fam,
                                                  RecoverMethod method,
                                                  const SpectralRegularization& reg = {},
                                                  bool poly_refit = false,
                                                  const std::vector<double>& post_targets = {},
                                                  int post_order = 10) {
    if (method == RecoverMethod::fourier) return recover_values_fourier(surf, fam, reg, poly_refit);
    return recover_values_post(surf, fam, post_targets, post_order);
}

} // namespace invot
