// Acceptance battery: one line per criterion, exit code = number of failures.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "invot/invot.hpp"

using namespace invot;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleRelTol = 2e-2;     // 1: quantile vs LP(200)
constexpr double kOracleSeconds = 5.0;
constexpr double kGaussMapTol = 1e-9;      // 2: T(x) = 2x + 1
constexpr double kGaussLpTol = 1e-2;
constexpr double kGaussMcTol = 1e-3;
constexpr double kFeasTol = 1e-8;          // 3: dual feasibility
constexpr double kGapRelTol = 1e-3;
constexpr double kPlanGapTol = 1e-9;       // 4: shared-plan certificates
constexpr double kValueSpreadMin = 0.1;
constexpr double kSlopeTol = 5e-2;         // 5: recovered h' vs 2x
constexpr double kAnchorTol = 1e-3;
constexpr double kRecoverySeconds = 10.0;
constexpr double kConcaveRelTol = 5e-2;    // 6: recovered (l')^{-1} vs 1/(4s^2)
constexpr double kSurfaceTol = 1e-6;       // 7: value vs a^2 + 1 and density form
constexpr double kDeconvRelL2 = 0.1;       // 8: bump round trip at eps = 1e-3
constexpr double kDeconvSeconds = 2.0;
constexpr double kPostRelTol = 0.10;       // 9: L = 1/(s+1) at order 10
constexpr double kPostExactTol = 1e-9;     //    L = 1/s
constexpr double kVariationTol = 1e-2;     // 10: difference quotient vs inner product
constexpr double kRadialGapTol = 1e-9;     // 11: embedded LP vs 1D LP

int failures = 0;

void report(int num, bool ok, const std::string& what, const std::string& detail = "") {
    std::string line = std::string(ok ? "PASS" : "FAIL") + " criterion " + std::to_string(num) +
                       ": " + what;
    if (!detail.empty()) line += " [" + detail + "]";
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Measure1D hann_measure(double lo, double hi, int n = 1001) {
    const auto grid = linspace(lo, hi, std::size_t(n));
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        d[i] = 1.0 - std::cos(2.0 * M_PI * (grid[i] - lo) / (hi - lo));
    return cdf_and_quantile_from_density(grid, d);
}

Measure1D uniform_measure(double lo, double hi, int n = 1001) {
    const auto grid = linspace(lo, hi, std::size_t(n));
    return cdf_and_quantile_from_density(grid, std::vector<double>(grid.size(), 1.0));
}

double lp_value(const CostSpec& cost, const Measure1D& mu, const Measure1D& nu, int n) {
    return ot_lp(discretize(mu, n), discretize(nu, n), cost).cost;
}

// worst f(x) + g(y) - h(x - y) over the full potential grids
double feasibility_violation(const CostSpec& cost, const Potentials1D& P) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < P.x.size(); ++i)
        for (std::size_t j = 0; j < P.y.size(); ++j)
            worst = std::max(worst, P.f[i] + P.g[j] - cost.h(P.x[i] - P.y[j]));
    return worst;
}

void criterion_1() {
    const auto mu = hann_measure(0.0, 1.0);
    const auto nu = hann_measure(2.0, 4.0);
    bool ok = true;
    std::string detail;
    for (double p : {1.5, 2.0, 3.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto cost = power_cost(p);
        const double qv = ot_cost_quantile(cost, mu, nu);
        const double lp = lp_value(cost, mu, nu, 200);
        const double rel = std::fabs(qv - lp) / std::fabs(qv);
        const double secs = seconds_since(t0);
        ok = ok && rel <= kOracleRelTol && secs <= kOracleSeconds;
        if (!detail.empty()) detail += ", ";
        detail += "p=" + fmt(p) + " rel=" + fmt(rel) + " t=" + fmt(secs) + "s";
    }
    report(1, ok, "quantile value matches the LP oracle for power costs", detail);
}

void criterion_2() {
    const auto fam = LocationScaleFamily::normal();
    const auto mu = fam.member(0.0, 1.0);
    const auto nu = fam.member(1.0, 2.0);

    const auto T = monotone_map(mu, nu);
    double map_err = 0.0;
    for (double x = -3.0; x <= 3.0; x += 0.01)
        map_err = std::max(map_err, std::fabs(T(x) - (2.0 * x + 1.0)));

    const GaussianMeasure gmu(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    const GaussianMeasure gnu(Eigen::VectorXd::Constant(1, 1.0),
                              Eigen::MatrixXd::Identity(1, 1) * 4.0);
    const double closed = gaussian_ot(gmu, gnu).cost;

    const double lp = lp_value(power_cost(2.0), mu, nu, 200);

    std::mt19937_64 rng(1);
    double acc = 0.0;
    for (int i = 0; i < 500000; ++i) {
        const double u1 = (double(rng()) + 0.5) * 0x1p-64;
        const double u2 = (double(rng()) + 0.5) * 0x1p-64;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double z1 = r * std::cos(2.0 * M_PI * u2);
        const double z2 = r * std::sin(2.0 * M_PI * u2);
        acc += (z1 + 1.0) * (z1 + 1.0) + (z2 + 1.0) * (z2 + 1.0);
    }
    const double mc = acc / 1e6;

    const bool ok = map_err <= kGaussMapTol && std::fabs(closed - 2.0) <= 1e-12 &&
                    std::fabs(closed - lp) <= kGaussLpTol && std::fabs(closed - mc) <= kGaussMcTol;
    report(2, ok, "gaussian pair hits the closed form, the LP oracle, and Monte Carlo",
           "map_err=" + fmt(map_err) + ", lp_diff=" + fmt(std::fabs(closed - lp)) +
               ", mc_diff=" + fmt(std::fabs(closed - mc)));
}

void criterion_3() {
    const auto fam = LocationScaleFamily::normal();
    struct Inst {
        CostSpec cost;
        Measure1D mu, nu;
    };
    std::vector<Inst> batch;
    for (double p : {1.5, 2.0, 3.0})
        batch.push_back({power_cost(p), hann_measure(0.0, 1.0), hann_measure(2.0, 4.0)});
    batch.push_back({power_cost(2.0), fam.member(0.0, 1.0), fam.member(1.0, 2.0)});
    batch.push_back({power_cost(2.0), fam.member(0.0, 1.0, 401), fam.member(0.0, 2.0, 401)});
    double worst_feas = -1e300, worst_gap = 0.0;
    for (const auto& inst : batch) {
        const auto P = potentials_1d(inst.cost, inst.mu, inst.nu);
        worst_feas = std::max(worst_feas, feasibility_violation(inst.cost, P));
        worst_gap = std::max(worst_gap, std::fabs(P.rel_gap));
    }
    const bool ok = worst_feas <= kFeasTol && worst_gap <= kGapRelTol;
    report(3, ok, "all dual potentials are feasible with small duality gaps",
           "max_violation=" + fmt(worst_feas) + ", max_rel_gap=" + fmt(worst_gap));
}

void criterion_4() {
    const auto rep = plans_only_nonidentifiability({power_cost(2.0), power_cost(4.0)},
                                                   uniform_measure(0.0, 1.0),
                                                   uniform_measure(2.0, 3.0), 50);
    double worst_gap = 0.0;
    for (double g : rep.gaps) worst_gap = std::max(worst_gap, std::fabs(g));
    const bool ok = rep.plans_agree && rep.monotone_certified && worst_gap <= kPlanGapTol &&
                    rep.max_value_spread >= kValueSpreadMin;
    report(4, ok, "one monotone plan is optimal for both costs while values split",
           "max_gap=" + fmt(worst_gap) + ", value_spread=" + fmt(rep.max_value_spread));
}

void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto fam = LocationScaleFamily::normal();
    const auto mu = fam.member(0.0, 1.0, 401);
    const auto nu = fam.member(0.0, 2.0, 401);
    const auto cost = power_cost(2.0);
    const auto T = monotone_map(mu, nu);
    const auto fp = potential_derivative_1d(cost, mu, nu);
    const auto graph = conjugate_graph_from_map(T, fp);
    const auto rc = assemble_convex_cost(graph);
    const double span = rc.domain_hi - rc.domain_lo;
    double worst = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double x = rc.domain_lo + span * (0.1 + 0.8 * double(k) / 400.0);
        worst = std::max(worst, std::fabs(rc.hprime(x) - 2.0 * x));
    }
    const auto anchored = assemble_convex_cost(
        graph, ValueAnchor{mu, nu, ot_cost_quantile(cost, mu, nu)});
    const double secs = seconds_since(t0);
    const bool ok = worst <= kSlopeTol && std::fabs(anchored.k) <= kAnchorTol &&
                    secs <= kRecoverySeconds;
    report(5, ok, "square cost round-trips from normal location-scale observations",
           "slope_err=" + fmt(worst) + ", k=" + fmt(anchored.k) + ", t=" + fmt(secs) + "s");
}

void criterion_6() {
    const auto res = concave_ot_1d(concave_power_cost(0.5), uniform_measure(0.0, 1.0),
                                   uniform_measure(3.0, 4.0), 100);
    const auto rc = recover_concave(concave_graph_from_lp(res));
    double worst = 0.0;
    for (std::size_t j = 0; j < rc.hprime.x.size(); ++j) {
        const double s = rc.hprime.y[j];
        const double want = 1.0 / (4.0 * s * s);
        worst = std::max(worst, std::fabs(rc.hprime.x[j] - want) / want);
    }
    report(6, worst <= kConcaveRelTol,
           "square-root cost round-trips from the leftover transport plan",
           "rel_err=" + fmt(worst) + " over s in [" + fmt(rc.hprime.y.back()) + ", " +
               fmt(rc.hprime.y.front()) + "]");
}

void criterion_7() {
    const auto fam = LocationScaleFamily::normal();
    const std::function<double(double)> sq = [](double x) { return x * x; };
    bool ok = true;
    std::string detail;
    for (double a : {-1.0, 0.0, 1.0}) {
        const double value = ot_cost_quantile(power_cost(2.0), fam.member(a, 2.0),
                                              fam.member(0.0, 1.0));
        const double density_form = g_transform(sq, a - 12.0, a + 12.0, fam, a, 1.0);
        const double want = a * a + 1.0;
        ok = ok && std::fabs(value - want) <= kSurfaceTol &&
             std::fabs(value - density_form) <= kSurfaceTol;
        if (!detail.empty()) detail += ", ";
        detail += "a=" + fmt(a) + " err=" + fmt(std::fabs(value - want));
    }
    report(7, ok, "location-scale values equal the kernel-transform of the cost", detail);
}

void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto fam = LocationScaleFamily::normal();
    const auto bump = [](double x) {
        const double t = 1.0 - x * x;
        return t > 0.0 ? t * t : 0.0;
    };
    const auto agrid = linspace(-8.0, 8.0, 129);
    std::vector<double> v(agrid.size());
    for (std::size_t i = 0; i < agrid.size(); ++i)
        v[i] = g_transform(bump, -1.0, 1.0, fam, agrid[i], 1.0);
    const auto rec = deconvolve_location(agrid, v, fam, 1.0, SpectralRegularization{});
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < agrid.size(); ++i) {
        if (std::fabs(agrid[i]) > 3.0) continue;
        const double b = bump(agrid[i]);
        num += (rec[i] - b) * (rec[i] - b);
        den += b * b;
    }
    const double rel = std::sqrt(num / den);
    const double secs = seconds_since(t0);
    report(8, rel <= kDeconvRelL2 && secs <= kDeconvSeconds,
           "bump survives the kernel-transform round trip at the pinned cutoff",
           "rel_l2=" + fmt(rel) + ", t=" + fmt(secs) + "s");
}

void criterion_9() {
    const auto decaying = [](double s) { return 1.0 / (s + 1.0); };
    const auto constant = [](double s) { return 1.0 / s; };
    bool ok = true;
    std::string detail;
    for (double x : {0.5, 1.0, 2.0}) {
        const double est = post_laplace_invert(decaying, x, 10);
        const double rel = std::fabs(est - std::exp(-x)) / std::exp(-x);
        const double flat = std::fabs(post_laplace_invert(constant, x, 10) - 1.0);
        ok = ok && rel <= kPostRelTol && flat <= kPostExactTol;
        if (!detail.empty()) detail += ", ";
        detail += "x=" + fmt(x) + " rel=" + fmt(rel);
    }
    report(9, ok, "rate-domain inversion recovers exponentials at order 10", detail);
}

void criterion_10() {
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
    const auto r2 = first_variation_check(power_cost(2.0), mu, nu, phi, 5e-4);
    const bool ok = r1.discrepancy <= kVariationTol && r2.discrepancy < r1.discrepancy;
    report(10, ok, "difference quotient matches the potential pairing and tightens",
           "disc(t)=" + fmt(r1.discrepancy) + ", disc(t/2)=" + fmt(r2.discrepancy));
}

void criterion_11() {
    const auto mu = uniform_measure(0.0, 1.0);
    const auto nu = uniform_measure(2.0, 3.0);
    const auto cost = power_cost(2.0);
    const auto d2 = affine_reduction_check(cost, mu, nu, {std::sqrt(0.5), std::sqrt(0.5)},
                                           {0.3, -0.7}, 100);
    const auto d3 = affine_reduction_check(cost, mu, nu, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 100);
    const bool ok = d2.gap <= kRadialGapTol && d3.gap <= kRadialGapTol;
    report(11, ok, "embedded transport matches the one dimensional value in d = 2, 3",
           "gap2=" + fmt(d2.gap) + ", gap3=" + fmt(d3.gap));
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(INVOT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

bool dirs_match(const fs::path& a, const fs::path& b) {
    std::set<std::string> na, nb;
    for (const auto& e : fs::directory_iterator(a))
        if (e.path().filename() != "run.log") na.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b))
        if (e.path().filename() != "run.log") nb.insert(e.path().filename().string());
    if (na != nb || na.empty()) return false;
    for (const auto& name : na)
        if (io::read_text_file((a / name).string()) != io::read_text_file((b / name).string()))
            return false;
    return true;
}

void criterion_12() {
    const fs::path root = fs::temp_directory_path() / "invot_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    GTransformSamples surf;
    {
        const auto fam = LocationScaleFamily::normal();
        std::vector<std::pair<double, double>> params;
        for (double a : linspace(-8.0, 8.0, 65)) params.emplace_back(a, 2.0);
        surf = value_surface_locscale(power_cost(2.0), fam, params);
    }
    io::write_surface_csv((root / "surface.csv").string(), surf, "acceptance");

    const std::vector<std::pair<std::string, std::string>> pipelines = {
        {"forward", "forward --cost power:2 --mu normal:0,1 --nu normal:1,2"},
        {"demo", "demo plans-nonidentifiability"},
        {"recover",
         "recover-values --surface " + (root / "surface.csv").string() +
             " --family normal --method fourier"},
        {"identify", "identify --c1 power:2 --c2 power:4 --family normal --na 3 --nb 3"},
    };
    bool ok = true;
    std::string detail;
    for (const auto& [name, args] : pipelines) {
        const fs::path ra = root / (name + "_a"), rb = root / (name + "_b");
        const int ca = run_cli(args + " --out " + ra.string());
        const int cb = run_cli(args + " --out " + rb.string());
        const bool same = ca == 0 && cb == 0 && dirs_match(ra, rb);
        ok = ok && same;
        if (!detail.empty()) detail += ", ";
        detail += name + (same ? "=identical" : "=DIFFERS");
    }
    report(12, ok, "every pipeline re-run is byte-identical outside the log", detail);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
