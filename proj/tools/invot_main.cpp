#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "invot/invot.hpp"

namespace fs = std::filesystem;
using invot::io::json;

namespace {

struct RunContext {
    std::string command;
    std::map<std::string, std::string> config;  // math-relevant flags, canonical
    fs::path outdir;
    std::string hash;
    std::vector<std::string> artifacts;
    json tolerances = json::object();
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void set(const std::string& key, const std::string& value) { config[key] = value; }
    void set(const std::string& key, double value) { config[key] = invot::io::fmt17(value); }
    void set(const std::string& key, int value) { config[key] = std::to_string(value); }

    void seal() {
        std::string canon = command;
        for (const auto& [k, v] : config) canon += "|" + k + "=" + v;
        hash = invot::io::config_hash(canon);
        fs::create_directories(outdir);
    }

    fs::path path(const std::string& name) {
        artifacts.push_back(name);
        return outdir / name;
    }

    void finish() {
        json inputs = json::object();
        for (const auto& [k, v] : config) inputs[k] = v;
        json arts = json::array();
        for (const auto& a : artifacts) arts.push_back(a);
        json manifest{{"config_hash", hash},
                      {"command", command},
                      {"inputs", inputs},
                      {"tolerances", tolerances},
                      {"artifacts", arts}};
        invot::io::write_json_file((outdir / "manifest.json").string(), manifest);
        // timestamps are confined to this sidecar; everything else is
        // reproducible byte for byte
        std::ofstream log(outdir / "run.log", std::ios::app);
        const auto wall = std::chrono::system_clock::now();
        const auto secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        log << std::chrono::duration_cast<std::chrono::seconds>(wall.time_since_epoch()).count()
            << " " << command << " config=" << hash << " elapsed=" << secs << "s\n";
    }
};

json error_json(const std::string& op, const std::string& name, std::string message) {
    if (message.rfind(name + ": ", 0) == 0) message = message.substr(name.size() + 2);
    return json{{"error", name}, {"op", op}, {"message", message}};
}

int exit_code_for(invot::errc code) {
    switch (code) {
        case invot::errc::parse_error:
        case invot::errc::non_positive_scale:
        case invot::errc::size_exceeded:
        case invot::errc::method_family_mismatch:
            return 1;
        default:
            return 2;
    }
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            invot::require(pos == item.size(), invot::errc::parse_error, "bad number");
        } catch (const std::exception&) {
            invot::fail(invot::errc::parse_error, "bad number '" + item + "' in list '" + s + "'");
        }
    }
    return out;
}

double central_forward_residual(const invot::GTransformSamples& surf,
                                const invot::LocationScaleFamily& fam,
                                const std::vector<double>& x, const std::vector<double>& h) {
    const double scale = std::fabs(surf.entries.front().b - 1.0);
    if (scale <= 1e-12) return 0.0;  // b = 1 section is read off exactly
    invot::GridFunction hg{x, h};
    const std::size_t n = surf.entries.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = n / 4; i < n - n / 4; ++i) {
        const double fwd = invot::g_transform(hg, fam, surf.entries[i].a, scale);
        const double d = fwd - surf.entries[i].value;
        num += d * d;
        den += surf.entries[i].value * surf.entries[i].value;
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// ---- subcommand bodies ----

int run_forward(RunContext& ctx, const std::string& cost_arg, const std::string& mu_arg,
                const std::string& nu_arg, int lp_n, int grid_n) {
    auto cost = invot::io::cost_from_arg(cost_arg);
    auto mu = invot::io::measure_from_arg(mu_arg, grid_n);
    auto nu = invot::io::measure_from_arg(nu_arg, grid_n);
    ctx.seal();
    json report{{"config_hash", ctx.hash}, {"command", "forward"}, {"cost_kind",
                cost.kind == invot::CostKind::convex ? "convex" : "concave"}};
    if (cost.kind == invot::CostKind::convex) {
        const double value = invot::ot_cost_quantile(cost, mu, nu);
        auto pots = invot::potentials_1d(cost, mu, nu);
        auto lp = invot::ot_lp(invot::discretize(mu, lp_n), invot::discretize(nu, lp_n), cost);
        invot::io::write_potentials_csv(ctx.path("potentials_f.csv").string(),
                                        ctx.path("potentials_g.csv").string(), pots, ctx.hash);
        invot::io::write_coupling_csv(ctx.path("plan.csv").string(), lp.coupling, ctx.hash);
        report["value"] = value;
        report["lp_value"] = lp.cost;
        report["lp_duality_gap"] = lp.gap;
        report["potentials_rel_gap"] = pots.rel_gap;
        std::cout << "value " << invot::io::fmt17(value) << "\n";
    } else {
        auto res = invot::concave_ot_1d(cost, mu, nu, lp_n);
        report["value"] = res.value;
        report["moved_mass"] = res.parts.moved_mass;
        report["common_mass"] = res.parts.common_mass;
        report["support_separation"] = res.separation;
        report["antimonotone"] = res.antimonotone;
        if (res.has_lp) {
            invot::io::write_coupling_csv(ctx.path("plan.csv").string(), res.lp.coupling,
                                          ctx.hash);
            report["lp_duality_gap"] = res.lp.gap;
        }
        std::cout << "value " << invot::io::fmt17(res.value) << "\n";
    }
    ctx.tolerances = json{{"lp_n", lp_n}};
    invot::io::write_json_file(ctx.path("value.json").string(), report);
    ctx.finish();
    return 0;
}

int run_potentials(RunContext& ctx, const std::string& cost_arg, const std::string& mu_arg,
                   const std::string& nu_arg, int grid_n) {
    auto cost = invot::io::cost_from_arg(cost_arg);
    auto mu = invot::io::measure_from_arg(mu_arg, grid_n);
    auto nu = invot::io::measure_from_arg(nu_arg, grid_n);
    ctx.seal();
    auto pots = invot::potentials_1d(cost, mu, nu);
    invot::io::write_potentials_csv(ctx.path("potentials_f.csv").string(),
                                    ctx.path("potentials_g.csv").string(), pots, ctx.hash);
    json report{{"config_hash", ctx.hash},
                {"command", "potentials"},
                {"dual_value", pots.dual_value},
                {"primal_value", pots.primal_value},
                {"rel_gap", pots.rel_gap}};
    invot::io::write_json_file(ctx.path("potentials.json").string(), report);
    std::cout << "rel_gap " << invot::io::fmt17(pots.rel_gap) << "\n";
    ctx.finish();
    return 0;
}

int run_recover_map(RunContext& ctx, const std::string& cost_arg, const std::string& mu_arg,
                    const std::string& nu_arg, const std::string& map_csv, bool anchor,
                    double anchor_alpha, bool have_anchor_alpha, int grid_n) {
    auto mu = invot::io::measure_from_arg(mu_arg, grid_n);
    auto nu = invot::io::measure_from_arg(nu_arg, grid_n);
    ctx.seal();

    invot::TransportMap1D T;
    invot::GridFunction fprime;
    invot::CostSpec truth;
    bool have_truth = false;
    if (!map_csv.empty()) {
        std::tie(T, fprime) = invot::io::read_map_csv(map_csv);
    } else {
        invot::require(!cost_arg.empty(), invot::errc::parse_error,
                       "recover-map needs --cost to synthesize observations or --map-csv");
        truth = invot::io::cost_from_arg(cost_arg);
        have_truth = true;
        T = invot::monotone_map(mu, nu);
        fprime = invot::potential_derivative_1d(truth, mu, nu);
    }
    auto graph = invot::conjugate_graph_from_map(T, fprime);
    std::optional<invot::ValueAnchor> va;
    if (have_anchor_alpha)
        va = invot::ValueAnchor{mu, nu, anchor_alpha};
    else if (anchor) {
        invot::require(have_truth, invot::errc::parse_error,
                       "--anchor without --anchor-alpha needs --cost to price the instance");
        va = invot::ValueAnchor{mu, nu, invot::ot_cost_quantile(truth, mu, nu)};
    }
    auto rc = invot::assemble_convex_cost(graph, va);
    invot::io::write_function_csv(ctx.path("hprime.csv").string(), rc.hprime.x, rc.hprime.y,
                                  ctx.hash, "x,hprime");
    invot::io::write_function_csv(ctx.path("h.csv").string(), rc.h.x, rc.h.y, ctx.hash, "x,h");
    json report = invot::io::recovery_report(rc);
    report["config_hash"] = ctx.hash;
    invot::io::write_json_file(ctx.path("recovery.json").string(), report);
    std::cout << "identified_domain [" << invot::io::fmt17(rc.domain_lo) << ", "
              << invot::io::fmt17(rc.domain_hi) << "] k " << invot::io::fmt17(rc.k) << " ("
              << rc.k_method << ")\n";
    ctx.finish();
    return 0;
}

int run_recover_values(RunContext& ctx, const std::string& surface_csv, const std::string& family,
                       const std::string& method, double reg_eps, int post_order,
                       const std::string& targets_arg, bool poly_refit,
                       const std::string& reference_arg) {
    auto fam = invot::io::family_by_name(family);
    auto surf = invot::io::read_surface_csv(surface_csv, family);
    ctx.seal();
    invot::require(!surf.entries.empty(), invot::errc::parse_error, "empty surface");

    invot::ValueRecovery out;
    if (method == "fourier") {
        invot::SpectralRegularization reg;
        reg.eps = reg_eps;
        out = invot::recover_values_fourier(surf, fam, reg, poly_refit);
    } else if (method == "post") {
        std::vector<double> targets = parse_double_list(
            targets_arg.empty() ? std::string("0.5,1,2") : targets_arg);
        out = invot::recover_values_post(surf, fam, targets, post_order);
    } else {
        invot::fail(invot::errc::parse_error, "unknown method '" + method + "'");
    }

    invot::io::write_function_csv(ctx.path("recovered.csv").string(), out.x, out.h, ctx.hash);
    json report{{"config_hash", ctx.hash},
                {"command", "recover-values"},
                {"method", method},
                {"family", family},
                {"refit", out.refit},
                {"clamped_bins", out.clamped_bins}};
    if (method == "fourier")
        report["l2_error"] = central_forward_residual(surf, fam, out.x, out.h);
    if (!reference_arg.empty()) {
        auto ref = invot::io::cost_from_arg(reference_arg);
        const std::size_t n = out.x.size();
        double num = 0.0, den = 0.0;
        for (std::size_t i = n / 4; i < std::max<std::size_t>(n - n / 4, n / 4 + 1); ++i) {
            const double t = ref.h(out.x[i]);
            num += (out.h[i] - t) * (out.h[i] - t);
            den += t * t;
        }
        report["reference_l2_error"] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    ctx.tolerances = json{{"reg_eps", reg_eps}, {"post_order", post_order}};
    invot::io::write_json_file(ctx.path("recovery.json").string(), report);
    if (report.contains("l2_error"))
        std::cout << "l2_error " << invot::io::fmt17(report["l2_error"].get<double>()) << "\n";
    else
        std::cout << "recovered " << out.x.size() << " points\n";
    ctx.finish();
    return 0;
}

int run_recover_concave(RunContext& ctx, const std::string& cost_arg, const std::string& mu_arg,
                        const std::string& nu_arg, int lp_n, int grid_n) {
    auto cost = invot::io::cost_from_arg(cost_arg);
    auto mu = invot::io::measure_from_arg(mu_arg, grid_n);
    auto nu = invot::io::measure_from_arg(nu_arg, grid_n);
    ctx.seal();
    auto res = invot::concave_ot_1d(cost, mu, nu, lp_n);
    auto graph = invot::concave_graph_from_lp(res);
    auto rc = invot::recover_concave(graph);
    invot::io::write_function_csv(ctx.path("lprime.csv").string(), rc.hprime.x, rc.hprime.y,
                                  ctx.hash, "t,lprime");
    invot::io::write_function_csv(ctx.path("l.csv").string(), rc.h.x, rc.h.y, ctx.hash, "t,l");
    json report = invot::io::recovery_report(rc);
    report["config_hash"] = ctx.hash;
    report["value"] = res.value;
    report["moved_mass"] = res.parts.moved_mass;
    report["support_separation"] = res.separation;
    report["antimonotone"] = res.antimonotone;
    invot::io::write_json_file(ctx.path("recovery.json").string(), report);
    std::cout << "visited_range [" << invot::io::fmt17(rc.domain_lo) << ", "
              << invot::io::fmt17(rc.domain_hi) << "] (" << rc.k_method << ")\n";
    ctx.finish();
    return 0;
}

int run_identify(RunContext& ctx, const std::string& c1_arg, const std::string& c2_arg,
                 const std::string& family, double tol, int jobs, int na, int nb, double a_min,
                 double a_max, double b_min, double b_max, const std::string& mu_arg,
                 const std::string& nu_arg, int lp_n) {
    auto c1 = invot::io::cost_from_arg(c1_arg);
    auto c2 = invot::io::cost_from_arg(c2_arg);
    auto fam = invot::io::family_by_name(family);
    ctx.seal();
    auto lattice = invot::default_param_lattice(na, nb, a_min, a_max, b_min, b_max);
    auto rep = invot::values_equal_on_family(c1, c2, fam, lattice, tol, {}, jobs);
    if (!mu_arg.empty() && !nu_arg.empty()) {
        auto mu = invot::io::measure_from_arg(mu_arg, 0);
        auto nu = invot::io::measure_from_arg(nu_arg, 0);
        auto plans = invot::plans_only_nonidentifiability({c1, c2}, mu, nu, lp_n);
        rep.plans_agree = plans.plans_agree;
        rep.certificates = plans.gaps;
    }
    json report = invot::io::identify_report(rep);
    report["config_hash"] = ctx.hash;
    ctx.tolerances = json{{"tol", tol}};
    invot::io::write_json_file(ctx.path("identify.json").string(), report);
    std::cout << (rep.distinguishable ? "distinguishable" : "indistinguishable") << " max_gap "
              << invot::io::fmt17(rep.max_value_gap) << "\n";
    ctx.finish();
    return 0;
}

int run_demo_plans(RunContext& ctx, int lp_n) {
    ctx.seal();
    auto mu = invot::io::measure_from_json(invot::io::expand_shorthand("uniform:0,1", false), 0);
    auto nu = invot::io::measure_from_json(invot::io::expand_shorthand("uniform:2,3", false), 0);
    std::vector<invot::CostSpec> costs{invot::power_cost(2.0), invot::power_cost(4.0)};
    auto rep = invot::plans_only_nonidentifiability(costs, mu, nu, lp_n);
    json gaps = json::array(), values = json::array();
    for (double g : rep.gaps) gaps.push_back(g);
    for (double v : rep.lp_values) values.push_back(v);
    json report{{"config_hash", ctx.hash},
                {"command", "demo plans-nonidentifiability"},
                {"costs", {"power:2", "power:4"}},
                {"mu", "uniform:0,1"},
                {"nu", "uniform:2,3"},
                {"plans_agree", rep.plans_agree},
                {"monotone_certified", rep.monotone_certified},
                {"lp_values", values},
                {"duality_gaps", gaps},
                {"max_value_spread", rep.max_value_spread}};
    invot::io::write_json_file(ctx.path("demo.json").string(), report);
    // the shared monotone plan, exported once since the plans coincide
    auto lp = invot::ot_lp(invot::discretize(mu, lp_n), invot::discretize(nu, lp_n), costs[0]);
    invot::io::write_coupling_csv(ctx.path("plan.csv").string(), lp.coupling, ctx.hash);
    std::cout << "plans_agree " << (rep.plans_agree ? "true" : "false") << " value_spread "
              << invot::io::fmt17(rep.max_value_spread) << "\n";
    ctx.finish();
    return 0;
}

int run_validate(const std::string& config_path) {
    json diags = json::array();
    json cfg = invot::io::parse_json_text(invot::io::read_text_file(config_path), config_path);
    if (!cfg.is_object()) {
        diags.push_back("config must be a JSON object");
        std::cout << diags.dump(2) << "\n";
        return 0;
    }
    static const std::vector<std::string> known{
        "command", "cost", "c1", "c2", "mu", "nu", "family", "surface", "method",
        "reg-eps", "post-order", "grid-n", "lp-n", "tol", "out", "jobs", "seed",
        "targets", "poly-refit", "anchor", "anchor-alpha", "map-csv", "reference"};
    for (const auto& [key, val] : cfg.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            diags.push_back("unknown field '" + key + "'");
    static const std::vector<std::string> commands{
        "forward", "potentials", "recover-map", "recover-values",
        "recover-concave", "identify", "demo"};
    if (!cfg.contains("command") || !cfg["command"].is_string() ||
        std::find(commands.begin(), commands.end(), cfg["command"].get<std::string>()) ==
            commands.end())
        diags.push_back("missing or unknown 'command'");
    auto try_parse = [&](const char* key, bool is_cost) {
        if (!cfg.contains(key)) return;
        try {
            const std::string arg =
                cfg[key].is_string() ? cfg[key].get<std::string>() : cfg[key].dump();
            if (is_cost)
                invot::io::cost_from_arg(arg);
            else
                invot::io::measure_from_arg(arg, 0);
        } catch (const invot::error& e) {
            diags.push_back(std::string(key) + ": " + e.what());
        } catch (const std::exception& e) {
            diags.push_back(std::string(key) + ": " + e.what());
        }
    };
    try_parse("cost", true);
    try_parse("c1", true);
    try_parse("c2", true);
    try_parse("mu", false);
    try_parse("nu", false);
    if (cfg.contains("family")) {
        try {
            invot::io::family_by_name(cfg["family"].get<std::string>());
        } catch (const std::exception& e) {
            diags.push_back(std::string("family: ") + e.what());
        }
    }
    if (cfg.contains("surface")) {
        try {
            invot::io::read_surface_csv(cfg["surface"].get<std::string>(),
                                        cfg.value("family", std::string("normal")));
        } catch (const std::exception& e) {
            diags.push_back(std::string("surface: ") + e.what());
        }
    }
    auto range_check = [&](const char* key, double lo, double hi) {
        if (!cfg.contains(key)) return;
        if (!cfg[key].is_number()) {
            diags.push_back(std::string(key) + ": must be numeric");
            return;
        }
        const double v = cfg[key].get<double>();
        if (!(v >= lo && v <= hi))
            diags.push_back(std::string(key) + ": " + invot::io::fmt17(v) +
                            " outside [" + invot::io::fmt17(lo) + ", " + invot::io::fmt17(hi) +
                            "]");
    };
    range_check("grid-n", 9, 1e7);
    range_check("lp-n", 2, 1000);
    range_check("reg-eps", 1e-12, 1.0);
    range_check("post-order", 2, 24);
    range_check("tol", 0.0, 1.0);
    range_check("jobs", 1, 256);
    if (cfg.contains("method")) {
        const std::string m = cfg["method"].is_string() ? cfg["method"].get<std::string>() : "";
        if (m != "fourier" && m != "post") diags.push_back("method: must be fourier or post");
    }
    std::cout << diags.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"invot: forward and inverse optimal transport on the line"};
    app.require_subcommand(1);
    app.fallthrough();  // --out/--seed may appear after the subcommand name

    std::string out = "out";
    int seed = 0, jobs = 1, grid_n = 0, lp_n = 200, post_order = 10;
    double tol = 1e-6, reg_eps = 1e-3;
    std::string cost_arg, mu_arg, nu_arg, family = "normal", surface, method = "fourier";
    std::string c1_arg, c2_arg, targets_arg, map_csv, reference_arg;
    bool poly_refit = false, anchor = false;
    double anchor_alpha = 0.0;
    bool have_anchor_alpha = false;

    app.add_option("--out", out, "output directory (env INVOT_OUT overrides the default)");
    app.add_option("--seed", seed, "seed for randomized instance generation");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--grid-n", grid_n, "tabulation grid size for family measures");
        sub->add_option("--lp-n", lp_n, "discretization size for LP oracles");
        sub->add_option("--tol", tol, "decision tolerance");
    };

    auto* fwd = app.add_subcommand("forward", "OT value, plan, and potentials");
    fwd->add_option("--cost", cost_arg)->required();
    fwd->add_option("--mu", mu_arg)->required();
    fwd->add_option("--nu", nu_arg)->required();
    add_common(fwd);

    auto* pot = app.add_subcommand("potentials", "dual potentials with certificates");
    pot->add_option("--cost", cost_arg)->required();
    pot->add_option("--mu", mu_arg)->required();
    pot->add_option("--nu", nu_arg)->required();
    add_common(pot);

    auto* rmap = app.add_subcommand("recover-map", "convex cost from map + potential samples");
    rmap->add_option("--cost", cost_arg, "true cost used to synthesize observations");
    rmap->add_option("--mu", mu_arg)->required();
    rmap->add_option("--nu", nu_arg)->required();
    rmap->add_option("--map-csv", map_csv, "observed x,T,fprime samples");
    rmap->add_flag("--anchor", anchor, "anchor the constant with the instance OT value");
    rmap->add_option("--anchor-alpha", anchor_alpha, "observed OT value for the anchor")
        ->each([&](const std::string&) { have_anchor_alpha = true; });
    add_common(rmap);

    auto* rval = app.add_subcommand("recover-values", "cost from a value surface");
    rval->add_option("--surface", surface)->required();
    rval->add_option("--family", family)->required();
    rval->add_option("--method", method)->check(CLI::IsMember({"fourier", "post"}));
    rval->add_option("--reg-eps", reg_eps, "spectral cutoff");
    rval->add_option("--post-order", post_order);
    rval->add_option("--targets", targets_arg, "comma-separated x targets (post)");
    rval->add_flag("--poly-refit", poly_refit, "refit a low-degree polynomial forward model");
    rval->add_option("--reference", reference_arg, "cost to compare the recovery against");

    auto* rcon = app.add_subcommand("recover-concave", "concave cost from leftover transport");
    rcon->add_option("--cost", cost_arg)->required();
    rcon->add_option("--mu", mu_arg)->required();
    rcon->add_option("--nu", nu_arg)->required();
    add_common(rcon);

    auto* ident = app.add_subcommand("identify", "value-surface distinguishability");
    ident->add_option("--c1", c1_arg)->required();
    ident->add_option("--c2", c2_arg)->required();
    ident->add_option("--family", family);
    ident->add_option("--jobs", jobs, "lattice sweep parallelism");
    ident->add_option("--mu", mu_arg, "optional marginals for a shared-plan certificate");
    ident->add_option("--nu", nu_arg);
    int na = 9, nb = 9;
    double a_min = -2.0, a_max = 2.0, b_min = 1.1, b_max = 3.0;
    ident->add_option("--na", na);
    ident->add_option("--nb", nb);
    ident->add_option("--a-min", a_min);
    ident->add_option("--a-max", a_max);
    ident->add_option("--b-min", b_min);
    ident->add_option("--b-max", b_max);
    add_common(ident);

    auto* demo = app.add_subcommand("demo", "built-in demonstrations");
    std::string demo_name;
    demo->add_option("name", demo_name, "plans-nonidentifiability")->required();
    add_common(demo);

    auto* val = app.add_subcommand("validate", "check a run config without running");
    std::string config_path;
    val->add_option("config", config_path)->required();

    CLI11_PARSE(app, argc, argv);
    if (const char* env = std::getenv("INVOT_OUT")) out = env;  // env wins over --out

    RunContext ctx;
    ctx.outdir = out;
    std::string op = "parse";
    try {
        if (app.got_subcommand(fwd)) {
            op = "forward";
            ctx.command = op;
            ctx.set("cost", cost_arg);
            ctx.set("mu", mu_arg);
            ctx.set("nu", nu_arg);
            ctx.set("lp_n", lp_n);
            ctx.set("grid_n", grid_n);
            ctx.set("seed", seed);
            return run_forward(ctx, cost_arg, mu_arg, nu_arg, lp_n, grid_n);
        }
        if (app.got_subcommand(pot)) {
            op = "potentials";
            ctx.command = op;
            ctx.set("cost", cost_arg);
            ctx.set("mu", mu_arg);
            ctx.set("nu", nu_arg);
            ctx.set("grid_n", grid_n);
            ctx.set("seed", seed);
            return run_potentials(ctx, cost_arg, mu_arg, nu_arg, grid_n);
        }
        if (app.got_subcommand(rmap)) {
            op = "recover-map";
            ctx.command = op;
            ctx.set("cost", cost_arg);
            ctx.set("mu", mu_arg);
            ctx.set("nu", nu_arg);
            ctx.set("map_csv", map_csv);
            ctx.set("anchor", anchor ? 1 : 0);
            if (have_anchor_alpha) ctx.set("anchor_alpha", anchor_alpha);
            ctx.set("grid_n", grid_n);
            ctx.set("seed", seed);
            return run_recover_map(ctx, cost_arg, mu_arg, nu_arg, map_csv, anchor, anchor_alpha,
                                   have_anchor_alpha, grid_n);
        }
        if (app.got_subcommand(rval)) {
            op = "recover-values";
            ctx.command = op;
            ctx.set("surface", surface);
            ctx.set("family", family);
            ctx.set("method", method);
            ctx.set("reg_eps", reg_eps);
            ctx.set("post_order", post_order);
            ctx.set("targets", targets_arg);
            ctx.set("poly_refit", poly_refit ? 1 : 0);
            ctx.set("reference", reference_arg);
            ctx.set("seed", seed);
            return run_recover_values(ctx, surface, family, method, reg_eps, post_order,
                                      targets_arg, poly_refit, reference_arg);
        }
        if (app.got_subcommand(rcon)) {
            op = "recover-concave";
            ctx.command = op;
            ctx.set("cost", cost_arg);
            ctx.set("mu", mu_arg);
            ctx.set("nu", nu_arg);
            ctx.set("lp_n", lp_n);
            ctx.set("grid_n", grid_n);
            ctx.set("seed", seed);
            return run_recover_concave(ctx, cost_arg, mu_arg, nu_arg, lp_n, grid_n);
        }
        if (app.got_subcommand(ident)) {
            op = "identify";
            ctx.command = op;
            ctx.set("c1", c1_arg);
            ctx.set("c2", c2_arg);
            ctx.set("family", family);
            ctx.set("tol", tol);
            ctx.set("na", na);
            ctx.set("nb", nb);
            ctx.set("a_min", a_min);
            ctx.set("a_max", a_max);
            ctx.set("b_min", b_min);
            ctx.set("b_max", b_max);
            ctx.set("mu", mu_arg);
            ctx.set("nu", nu_arg);
            ctx.set("lp_n", lp_n);
            ctx.set("seed", seed);
            // jobs deliberately left out of the hash: it must not change results
            return run_identify(ctx, c1_arg, c2_arg, family, tol, jobs, na, nb, a_min, a_max,
                                b_min, b_max, mu_arg, nu_arg, lp_n);
        }
        if (app.got_subcommand(demo)) {
            op = "demo";
            invot::require(demo_name == "plans-nonidentifiability", invot::errc::parse_error,
                           "unknown demo '" + demo_name + "'");
            ctx.command = "demo plans-nonidentifiability";
            ctx.set("lp_n", lp_n);
            ctx.set("seed", seed);
            return run_demo_plans(ctx, lp_n);
        }
        if (app.got_subcommand(val)) {
            op = "validate";
            return run_validate(config_path);
        }
    } catch (const invot::error& e) {
        std::cerr << error_json(op, e.name(), e.what()).dump() << "\n";
        return exit_code_for(e.code());
    } catch (const std::invalid_argument& e) {
        std::cerr << error_json(op, "ParseError", e.what()).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_json(op, "InternalError", e.what()).dump() << "\n";
        return 2;
    }
    return 1;
}
