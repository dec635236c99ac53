#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "invot/costs.hpp"
#include "invot/errors.hpp"
#include "invot/forward.hpp"
#include "invot/identify.hpp"
#include "invot/measures.hpp"
#include "invot/recovery.hpp"
#include "invot/transforms.hpp"

namespace invot::io {

using json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const std::string& canonical) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
    return buf;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(bool(in), errc::parse_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    json j = json::parse(text, nullptr, false);
    require(!j.is_discarded(), errc::parse_error, "malformed JSON in " + origin);
    return j;
}

namespace detail {

inline double want_number(const json& j, const char* key, const std::string& ctx) {
    require(j.contains(key) && j[key].is_number(), errc::parse_error,
            ctx + ": missing numeric field '" + key + "'");
    return j[key].get<double>();
}

inline std::vector<double> want_array(const json& j, const char* key, const std::string& ctx) {
    require(j.contains(key) && j[key].is_array(), errc::parse_error,
            ctx + ": missing array field '" + key + "'");
    std::vector<double> v;
    v.reserve(j[key].size());
    for (const auto& e : j[key]) {
        require(e.is_number(), errc::parse_error, ctx + ": non-numeric entry in '" + key + "'");
        v.push_back(e.get<double>());
    }
    return v;
}

} // namespace detail

inline LocationScaleFamily family_by_name(const std::string& name) {
    if (name == "normal") return LocationScaleFamily::normal();
    if (name == "cauchy") return LocationScaleFamily::cauchy();
    if (name == "laplace") return LocationScaleFamily::laplace();
    if (name == "exponential-scale") return LocationScaleFamily::exponential_scale();
    fail(errc::parse_error, "unknown family '" + name + "'");
}

inline Measure1D measure_from_json(const json& j, int grid_n);

inline LocationScaleFamily family_from_json(const json& j) {
    require(j.is_object() && j.contains("family") && j["family"].is_string(), errc::parse_error,
            "family spec needs a 'family' name");
    const std::string name = j["family"].get<std::string>();
    if (name == "custom-grid") {
        require(j.contains("generator"), errc::parse_error, "custom-grid family needs 'generator'");
        return LocationScaleFamily::custom_grid(measure_from_json(j["generator"], 0));
    }
    return family_by_name(name);
}

// grid_n = 0 keeps the module default tabulation size.
inline Measure1D measure_from_json(const json& j, int grid_n = 0) {
    require(j.is_object(), errc::parse_error, "measure spec must be a JSON object");
    if (j.contains("grid")) {
        const auto grid = detail::want_array(j, "grid", "measure");
        const auto density = detail::want_array(j, "density", "measure");
        require(grid.size() == density.size() && grid.size() >= 2, errc::parse_error,
                "measure: grid and density must match with length >= 2");
        try {
            return cdf_and_quantile_from_density(grid, density);
        } catch (const std::invalid_argument& e) {
            fail(errc::parse_error, std::string("measure: ") + e.what());
        }
    }
    require(j.contains("family"), errc::parse_error, "measure spec needs 'grid' or 'family'");
    const LocationScaleFamily fam = family_from_json(j);
    const double a = j.contains("a") ? detail::want_number(j, "a", "measure") : 0.0;
    const double b = j.contains("b") ? detail::want_number(j, "b", "measure") : 1.0;
    return grid_n > 0 ? fam.member(a, b, grid_n) : fam.member(a, b);
}

inline CostSpec cost_from_json(const json& j) {
    require(j.is_object(), errc::parse_error, "cost spec must be a JSON object");
    require(j.contains("kind") && j["kind"].is_string(), errc::parse_error,
            "cost spec needs a 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    require(kind == "convex" || kind == "concave", errc::parse_error,
            "cost kind must be convex or concave, got '" + kind + "'");
    require(j.contains("builtin") && j["builtin"].is_string(), errc::parse_error,
            "cost spec needs a 'builtin' tag");
    const std::string builtin = j["builtin"].get<std::string>();
    if (builtin == "power") {
        const double p = detail::want_number(j, "p", "cost");
        if (kind == "convex") {
            require(p > 1.0, errc::parse_error, "convex power cost needs p > 1");
            return power_cost(p);
        }
        require(p > 0.0 && p < 1.0, errc::parse_error, "concave power cost needs p in (0,1)");
        return concave_power_cost(p);
    }
    if (builtin == "grid") {
        auto x = detail::want_array(j, "x", "cost");
        auto h = detail::want_array(j, "h", "cost");
        require(x.size() == h.size() && x.size() >= 2, errc::parse_error,
                "cost: x and h must match with length >= 2");
        require(strictly_increasing(x), errc::parse_error,
                "cost: displacement grid must be strictly increasing");
        const double growth = j.contains("growth_p") ? detail::want_number(j, "growth_p", "cost")
                                                     : 2.0;
        // shape diagnostics before building: slopes must be monotone the right way
        for (std::size_t i = 2; i < x.size(); ++i) {
            const double s0 = (h[i - 1] - h[i - 2]) / (x[i - 1] - x[i - 2]);
            const double s1 = (h[i] - h[i - 1]) / (x[i] - x[i - 1]);
            const double slack = 1e-9 * (1.0 + std::abs(s0) + std::abs(s1));
            if (kind == "convex" && s1 < s0 - slack)
                fail(errc::parse_error, "cost: slope decreases between grid indices " +
                                            std::to_string(i - 1) + " and " + std::to_string(i) +
                                            ", not convex");
            if (kind == "concave" && s1 > s0 + slack)
                fail(errc::parse_error, "cost: slope increases between grid indices " +
                                            std::to_string(i - 1) + " and " + std::to_string(i) +
                                            ", not concave");
        }
        return grid_cost(std::move(x), std::move(h),
                         kind == "convex" ? CostKind::convex : CostKind::concave, growth);
    }
    fail(errc::parse_error, "unknown cost builtin '" + builtin + "'");
}

// Expands CLI shorthand into the JSON spec of the measures/costs modules:
// "power:2", "concave-power:0.5", "normal:0,1", "uniform:0,1"; anything
// starting with '{' is inline JSON, anything else is read as a file path.
inline json expand_shorthand(const std::string& arg, bool is_cost, int grid_n = 0) {
    if (!arg.empty() && arg.front() == '{') return parse_json_text(arg, "inline spec");
    const auto colon = arg.find(':');
    const bool pathlike = arg.find(".json") != std::string::npos ||
                          arg.find('/') != std::string::npos;
    if (colon == std::string::npos || pathlike) return parse_json_text(read_text_file(arg), arg);
    const std::string head = arg.substr(0, colon);
    const std::string tail = arg.substr(colon + 1);
    std::vector<double> nums;
    {
        std::string item;
        std::istringstream ss(tail);
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t pos = 0;
                nums.push_back(std::stod(item, &pos));
                require(pos == item.size(), errc::parse_error, "bad number '" + item + "'");
            } catch (const std::exception&) {
                fail(errc::parse_error, "bad number '" + item + "' in '" + arg + "'");
            }
        }
    }
    if (is_cost) {
        require(nums.size() == 1, errc::parse_error, "cost shorthand needs one number: " + arg);
        if (head == "power") return json{{"kind", "convex"}, {"builtin", "power"}, {"p", nums[0]}};
        if (head == "concave-power")
            return json{{"kind", "concave"}, {"builtin", "power"}, {"p", nums[0]}};
        fail(errc::parse_error, "unknown cost shorthand '" + head + "'");
    }
    if (head == "uniform") {
        require(nums.size() == 2 && nums[1] > nums[0], errc::parse_error,
                "uniform shorthand needs lo,hi: " + arg);
        const int n = grid_n > 0 ? grid_n : defaults::grid_n;
        json grid = json::array(), density = json::array();
        for (int i = 0; i < n; ++i) {
            grid.push_back(nums[0] + (nums[1] - nums[0]) * double(i) / double(n - 1));
            density.push_back(1.0 / (nums[1] - nums[0]));
        }
        return json{{"grid", grid}, {"density", density}};
    }
    require(nums.size() == 2, errc::parse_error, "family shorthand needs a,b: " + arg);
    return json{{"family", head}, {"a", nums[0]}, {"b", nums[1]}};
}

inline Measure1D measure_from_arg(const std::string& arg, int grid_n = 0) {
    return measure_from_json(expand_shorthand(arg, false, grid_n), grid_n);
}

inline CostSpec cost_from_arg(const std::string& arg) {
    return cost_from_json(expand_shorthand(arg, true));
}

// ---- CSV ----

inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& l : lines) out << l << '\n';
}

inline void write_surface_csv(const std::string& path, const GTransformSamples& s,
                              const std::string& hash) {
    std::vector<std::string> lines{"# config=" + hash, "a,b,alpha"};
    for (const auto& e : s.entries)
        lines.push_back(fmt17(e.a) + "," + fmt17(e.b) + "," + fmt17(e.value));
    write_lines(path, lines);
}

inline void write_function_csv(const std::string& path, const std::vector<double>& x,
                               const std::vector<double>& y, const std::string& hash,
                               const std::string& header = "x,h") {
    std::vector<std::string> lines{"# config=" + hash, header};
    for (std::size_t i = 0; i < x.size(); ++i) lines.push_back(fmt17(x[i]) + "," + fmt17(y[i]));
    write_lines(path, lines);
}

inline void write_coupling_csv(const std::string& path, const Coupling& c,
                               const std::string& hash) {
    std::vector<std::string> lines{"# config=" + hash, "i,j,mass"};
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.m; ++j)
            if (c.at(i, j) > 0.0)
                lines.push_back(std::to_string(i) + "," + std::to_string(j) + "," +
                                fmt17(c.at(i, j)));
    write_lines(path, lines);
}

inline void write_potentials_csv(const std::string& fpath, const std::string& gpath,
                                 const Potentials1D& P, const std::string& hash) {
    std::vector<std::string> fl{"# config=" + hash, "x,f,fprime"};
    for (std::size_t i = 0; i < P.x.size(); ++i)
        fl.push_back(fmt17(P.x[i]) + "," + fmt17(P.f[i]) + "," + fmt17(P.fprime[i]));
    write_lines(fpath, fl);
    std::vector<std::string> gl{"# config=" + hash, "y,g"};
    for (std::size_t j = 0; j < P.y.size(); ++j)
        gl.push_back(fmt17(P.y[j]) + "," + fmt17(P.g[j]));
    write_lines(gpath, gl);
}

inline std::vector<std::vector<double>> read_csv_rows(const std::string& path,
                                                      const std::string& expect_header) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool seen_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!seen_header) {
            require(line == expect_header, errc::parse_error,
                    path + ":" + std::to_string(lineno) + ": expected header '" + expect_header +
                        "', got '" + line + "'");
            seen_header = true;
            continue;
        }
        std::vector<double> row;
        std::string item;
        std::istringstream ls(line);
        while (std::getline(ls, item, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(item, &pos));
                require(pos == item.size(), errc::parse_error, "trailing junk");
            } catch (const std::exception&) {
                fail(errc::parse_error,
                     path + ":" + std::to_string(lineno) + ": bad number '" + item + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    require(seen_header, errc::parse_error, path + ": missing header row");
    return rows;
}

// Observed map + potential-derivative samples: header "x,T,fprime".
inline std::pair<TransportMap1D, GridFunction> read_map_csv(const std::string& path) {
    TransportMap1D T;
    GridFunction fp;
    for (const auto& row : read_csv_rows(path, "x,T,fprime")) {
        require(row.size() == 3, errc::parse_error, path + ": map rows need 3 columns");
        T.x.push_back(row[0]);
        T.Tx.push_back(row[1]);
        fp.x.push_back(row[0]);
        fp.y.push_back(row[2]);
    }
    require(T.x.size() >= 2, errc::parse_error, path + ": need at least 2 samples");
    return {std::move(T), std::move(fp)};
}

inline GTransformSamples read_surface_csv(const std::string& path, const std::string& family) {
    GTransformSamples s;
    s.family = family;
    for (const auto& row : read_csv_rows(path, "a,b,alpha")) {
        require(row.size() == 3, errc::parse_error, path + ": surface rows need 3 columns");
        s.entries.push_back({row[0], row[1], row[2]});
    }
    return s;
}

// ---- report JSON ----

inline json grid_function_json(const GridFunction& g) {
    json x = json::array(), y = json::array();
    for (double v : g.x) x.push_back(v);
    for (double v : g.y) y.push_back(v);
    return json{{"x", x}, {"y", y}};
}

inline json recovery_report(const RecoveredCost& rc) {
    return json{{"identified_domain", {rc.domain_lo, rc.domain_hi}},
                {"k", rc.k},
                {"k_method", rc.k_method},
                {"hprime", grid_function_json(rc.hprime)},
                {"h", grid_function_json(rc.h)},
                {"diagnostics",
                 {{"isotonic_projection_distance", rc.isotonic_projection_distance},
                  {"anchor_residual", rc.anchor_residual}}}};
}

inline json identify_report(const IdentifiabilityReport& rep) {
    json witness;
    if (rep.has_witness)
        witness = json{{"a", rep.witness_a}, {"b", rep.witness_b}};
    else
        witness = nullptr;
    json certs = json::array();
    for (double g : rep.certificates) certs.push_back(g);
    return json{{"distinguishable", rep.distinguishable},
                {"witness", witness},
                {"max_value_gap", rep.max_value_gap},
                {"plans_agree", rep.plans_agree},
                {"certificates", certs}};
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

} // namespace invot::io
