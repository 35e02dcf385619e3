#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sobocomp/cutoff.hpp"
#include "sobocomp/engine.hpp"
#include "sobocomp/exponents.hpp"
#include "sobocomp/families.hpp"
#include "sobocomp/muckenhoupt.hpp"

namespace sobocomp {

// Exponents arrive as exact strings ("2", "3/2", "inf") or as JSON numbers
// (converted exactly from their binary value).
inline Exponent parse_exponent(const nlohmann::json& j, const std::string& name) {
    try {
        if (j.is_string()) {
            std::string s = j.get<std::string>();
            if (s == "inf" || s == "infinity") return Exponent::inf();
            auto slash = s.find('/');
            if (slash == std::string::npos) return Exponent(Rational(std::stoll(s)));
            return Exponent(Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))));
        }
        if (j.is_number_integer()) return Exponent(Rational(j.get<long long>()));
        if (j.is_number_float()) return Exponent(Rational::from_double(j.get<double>()));
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail_config("config: cannot parse exponent '" + name + "'");
    }
    fail_config("config: exponent '" + name + "' must be a number or a rational string");
}

struct MeasureSpec {
    std::string preset = "lebesgue";  // lebesgue | power_distance | density | lebesgue_plus_mass
    double alpha = 0;                 // power_distance
    std::string expr;                 // density
    double extra_mass = 0;            // lebesgue_plus_mass: added where region_expr != 0
    std::string region_expr;
};

struct FamilySpec {
    std::string preset = "sine_decay";  // sine_decay | sine | constants | bumps | file
    int count = 8;
    double M = 2.0;
    double width_lo = 0.05, width_hi = 0.2;
    std::string path;  // file preset: CSV (cell,f,g1..gn)
};

struct RunConfig {
    GridSpec domain;
    MeasureSpec w, nu, mu;
    std::string metric_kind = "euclidean";  // euclidean | power | anisotropic
    double metric_beta = 1.0;
    std::array<double, 3> metric_axis_beta{1, 1, 1};
    std::optional<double> metric_kappa;  // declared override
    std::string form_preset = "identity";  // identity | grushin | diag_expr
    std::vector<std::string> form_entries;
    FamilySpec family;

    Exponent p = Exponent::of(2);
    Exponent N = Exponent::inf();
    std::vector<Exponent> q_list;
    Exponent sigma = Exponent::of(3, 2);
    Exponent s = Exponent::inf();
    Exponent a = Exponent::of(0);
    Exponent b = Exponent::of(0);

    std::vector<double> eps_schedule{0.1, 0.05, 0.02, 0.01};
    CoverBuildConfig cover;
    int j_max = 4;
    std::string cover_mode = "balls";   // balls | triples
    std::string K_rule = "greedy_mass";  // compact-core selection rule

    nlohmann::json lab;  // subcommand-specific knobs, passed through
    std::string out_dir = "out";
};

namespace detail {

inline void get_if(const nlohmann::json& j, const char* key, double& into) {
    if (j.contains(key)) into = j.at(key).get<double>();
}
inline void get_if(const nlohmann::json& j, const char* key, int& into) {
    if (j.contains(key)) into = j.at(key).get<int>();
}
inline void get_if(const nlohmann::json& j, const char* key, std::string& into) {
    if (j.contains(key)) into = j.at(key).get<std::string>();
}
inline void get_if(const nlohmann::json& j, const char* key, bool& into) {
    if (j.contains(key)) into = j.at(key).get<bool>();
}

inline MeasureSpec parse_measure(const nlohmann::json& j) {
    MeasureSpec m;
    if (j.is_string()) {
        m.preset = j.get<std::string>();
        return m;
    }
    get_if(j, "preset", m.preset);
    get_if(j, "alpha", m.alpha);
    get_if(j, "expr", m.expr);
    get_if(j, "extra_mass", m.extra_mass);
    get_if(j, "region_expr", m.region_expr);
    return m;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    RunConfig c;
    try {
        if (j.contains("domain")) {
            const auto& d = j.at("domain");
            detail::get_if(d, "dim", c.domain.dim);
            if (d.contains("bounds")) {
                auto b = d.at("bounds");
                for (size_t ax = 0; ax < b.size() && ax < 3; ++ax) {
                    c.domain.bounds[ax][0] = b[ax][0].get<double>();
                    c.domain.bounds[ax][1] = b[ax][1].get<double>();
                }
            }
            if (d.contains("cells")) {
                auto cc = d.at("cells");
                for (size_t ax = 0; ax < cc.size() && ax < 3; ++ax)
                    c.domain.cells[ax] = cc[ax].get<int>();
            }
            detail::get_if(d, "mask", c.domain.mask);
            detail::get_if(d, "complement_includes_bounds", c.domain.complement_includes_bounds);
        }
        if (j.contains("measures")) {
            const auto& m = j.at("measures");
            if (m.contains("w")) c.w = detail::parse_measure(m.at("w"));
            if (m.contains("nu")) c.nu = detail::parse_measure(m.at("nu"));
            if (m.contains("mu")) c.mu = detail::parse_measure(m.at("mu"));
        }
        if (j.contains("quasimetric")) {
            const auto& q = j.at("quasimetric");
            detail::get_if(q, "kind", c.metric_kind);
            detail::get_if(q, "beta", c.metric_beta);
            if (q.contains("axis_beta")) {
                auto ab = q.at("axis_beta");
                for (size_t ax = 0; ax < ab.size() && ax < 3; ++ax)
                    c.metric_axis_beta[ax] = ab[ax].get<double>();
            }
            if (q.contains("kappa")) c.metric_kappa = q.at("kappa").get<double>();
        }
        if (j.contains("form")) {
            const auto& f = j.at("form");
            detail::get_if(f, "preset", c.form_preset);
            if (f.contains("entries"))
                for (const auto& e : f.at("entries")) c.form_entries.push_back(e.get<std::string>());
        }
        if (j.contains("family")) {
            const auto& f = j.at("family");
            detail::get_if(f, "preset", c.family.preset);
            detail::get_if(f, "count", c.family.count);
            detail::get_if(f, "M", c.family.M);
            detail::get_if(f, "width_lo", c.family.width_lo);
            detail::get_if(f, "width_hi", c.family.width_hi);
            detail::get_if(f, "path", c.family.path);
        }
        if (j.contains("exponents")) {
            const auto& e = j.at("exponents");
            if (e.contains("p")) c.p = parse_exponent(e.at("p"), "p");
            if (e.contains("N")) c.N = parse_exponent(e.at("N"), "N");
            if (e.contains("sigma")) c.sigma = parse_exponent(e.at("sigma"), "sigma");
            if (e.contains("s")) c.s = parse_exponent(e.at("s"), "s");
            if (e.contains("a")) c.a = parse_exponent(e.at("a"), "a");
            if (e.contains("b")) c.b = parse_exponent(e.at("b"), "b");
            if (e.contains("q_list"))
                for (const auto& q : e.at("q_list")) c.q_list.push_back(parse_exponent(q, "q"));
        }
        if (j.contains("engine")) {
            const auto& e = j.at("engine");
            if (e.contains("eps_schedule")) {
                c.eps_schedule.clear();
                for (const auto& x : e.at("eps_schedule")) c.eps_schedule.push_back(x.get<double>());
            }
            detail::get_if(e, "c0", c.cover.c0);
            detail::get_if(e, "radius0", c.cover.radius0);
            detail::get_if(e, "shrink", c.cover.shrink);
            detail::get_if(e, "max_shrinks", c.cover.max_shrinks);
            detail::get_if(e, "j_max", c.j_max);
            detail::get_if(e, "cover_mode", c.cover_mode);
            detail::get_if(e, "K_rule", c.K_rule);
        }
        if (j.contains("lab")) c.lab = j.at("lab");
        if (j.contains("output")) detail::get_if(j.at("output"), "dir", c.out_dir);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail_config(std::string("config: ") + e.what());
    }

    // exponent relations validated exactly before anything runs
    if (c.p.is_inf() || c.p.rat() < Rational(1)) fail_config("config: p must satisfy 1 <= p < inf");
    if (!(Exponent::of(1) < c.N)) fail_config("config: N must exceed 1");
    for (const auto& q : c.q_list) {
        if (q.is_inf() || q.rat() < Rational(1)) fail_config("config: q entries must be finite and >= 1");
    }
    if (!(c.eps_schedule.size() >= 1)) fail_config("config: eps schedule must be nonempty");
    for (size_t i = 1; i < c.eps_schedule.size(); ++i)
        if (!(c.eps_schedule[i] < c.eps_schedule[i - 1]))
            fail_config("config: eps schedule must be strictly decreasing");
    if (c.K_rule != "greedy_mass")
        fail_config("config: unknown K selection rule '" + c.K_rule + "'");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot read config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail_config(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["domain"]["dim"] = c.domain.dim;
    for (int ax = 0; ax < c.domain.dim; ++ax) {
        j["domain"]["bounds"].push_back({c.domain.bounds[static_cast<size_t>(ax)][0],
                                         c.domain.bounds[static_cast<size_t>(ax)][1]});
        j["domain"]["cells"].push_back(c.domain.cells[static_cast<size_t>(ax)]);
    }
    j["domain"]["mask"] = c.domain.mask;
    j["domain"]["complement_includes_bounds"] = c.domain.complement_includes_bounds;
    auto measure_json = [](const MeasureSpec& m) {
        nlohmann::json x;
        x["preset"] = m.preset;
        x["alpha"] = m.alpha;
        x["expr"] = m.expr;
        x["extra_mass"] = m.extra_mass;
        x["region_expr"] = m.region_expr;
        return x;
    };
    j["measures"]["w"] = measure_json(c.w);
    j["measures"]["nu"] = measure_json(c.nu);
    j["measures"]["mu"] = measure_json(c.mu);
    j["quasimetric"]["kind"] = c.metric_kind;
    j["quasimetric"]["beta"] = c.metric_beta;
    j["quasimetric"]["axis_beta"] = {c.metric_axis_beta[0], c.metric_axis_beta[1], c.metric_axis_beta[2]};
    if (c.metric_kappa) j["quasimetric"]["kappa"] = *c.metric_kappa;
    j["form"]["preset"] = c.form_preset;
    j["form"]["entries"] = c.form_entries;
    j["family"]["preset"] = c.family.preset;
    j["family"]["count"] = c.family.count;
    j["family"]["M"] = c.family.M;
    j["family"]["width_lo"] = c.family.width_lo;
    j["family"]["width_hi"] = c.family.width_hi;
    j["family"]["path"] = c.family.path;
    j["exponents"]["p"] = c.p.str();
    j["exponents"]["N"] = c.N.str();
    j["exponents"]["sigma"] = c.sigma.str();
    j["exponents"]["s"] = c.s.str();
    j["exponents"]["a"] = c.a.str();
    j["exponents"]["b"] = c.b.str();
    for (const auto& q : c.q_list) j["exponents"]["q_list"].push_back(q.str());
    j["engine"]["eps_schedule"] = c.eps_schedule;
    j["engine"]["c0"] = c.cover.c0;
    j["engine"]["radius0"] = c.cover.radius0;
    j["engine"]["shrink"] = c.cover.shrink;
    j["engine"]["max_shrinks"] = c.cover.max_shrinks;
    j["engine"]["j_max"] = c.j_max;
    j["engine"]["cover_mode"] = c.cover_mode;
    j["engine"]["K_rule"] = c.K_rule;
    if (!c.lab.is_null()) j["lab"] = c.lab;
    j["output"]["dir"] = c.out_dir;
    return j;
}

// --- builders -----------------------------------------------------------------

inline MeasureField build_measure(const MeasureSpec& spec, const DomainPtr& dom) {
    if (spec.preset == "lebesgue") return lebesgue_measure(dom);
    if (spec.preset == "power_distance") {
        auto rho = distance_to_complement(dom);
        return power_weight(rho, spec.alpha);
    }
    if (spec.preset == "density") {
        if (spec.expr.empty()) fail_config("config: density measure needs an expr");
        return measure_from_density(dom, Expr::parse(spec.expr));
    }
    if (spec.preset == "lebesgue_plus_mass") {
        auto m = lebesgue_measure(dom);
        if (spec.region_expr.empty()) fail_config("config: lebesgue_plus_mass needs region_expr");
        auto region = Expr::parse(spec.region_expr);
        for (int32_t a = 0; a < dom->n_active(); ++a)
            if (region.eval(dom->center(a)) != 0.0) m.mass[static_cast<size_t>(a)] += spec.extra_mass;
        return m;
    }
    fail_config("config: unknown measure preset '" + spec.preset + "'");
}

inline Quasimetric build_metric(const RunConfig& c) {
    Quasimetric q;
    if (c.metric_kind == "euclidean") q = Quasimetric::euclidean();
    else if (c.metric_kind == "power") q = Quasimetric::power(c.metric_beta);
    else if (c.metric_kind == "anisotropic") q = Quasimetric::anisotropic(c.metric_axis_beta, c.domain.dim);
    else fail_config("config: unknown quasimetric kind '" + c.metric_kind + "'");
    if (c.metric_kappa) {
        if (*c.metric_kappa < q.kappa)
            fail_config("config: declared kappa below the preset's triangle constant");
        q.kappa = *c.metric_kappa;
    }
    return q;
}

inline QuadraticFormField build_form(const RunConfig& c, const DomainPtr& dom) {
    if (c.form_preset == "identity") return QuadraticFormField::identity(dom);
    if (c.form_preset == "grushin") return QuadraticFormField::grushin(dom);
    if (c.form_preset == "diag_expr") return QuadraticFormField::diag_expr(dom, c.form_entries);
    fail_config("config: unknown form preset '" + c.form_preset + "'");
}

inline std::vector<SobolevPair> load_pairs_csv(const std::string& path, const DomainPtr& dom) {
    std::ifstream in(path);
    if (!in) fail_io("cannot read pair file: " + path);
    ScalarField f{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    VectorField g;
    g.dom = dom;
    for (int ax = 0; ax < dom->dim; ++ax)
        g.comp[static_cast<size_t>(ax)].assign(static_cast<size_t>(dom->n_active()), 0.0);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() < 2 + static_cast<size_t>(dom->dim))
            fail_config("pair file: row with too few columns");
        auto cell = static_cast<int32_t>(vals[0]);
        if (cell < 0 || cell >= dom->n_active()) fail_config("pair file: cell index out of range");
        f.v[static_cast<size_t>(cell)] = vals[1];
        for (int ax = 0; ax < dom->dim; ++ax)
            g.comp[static_cast<size_t>(ax)][static_cast<size_t>(cell)] = vals[2 + static_cast<size_t>(ax)];
    }
    return {{std::move(f), std::move(g), std::nullopt}};
}

inline std::vector<SobolevPair> build_family(const FamilySpec& spec, const DomainPtr& dom) {
    if (spec.preset == "sine_decay") return family_sine_decay(dom, spec.count);
    if (spec.preset == "sine") return family_sine(dom, spec.count);
    if (spec.preset == "constants") return family_constants(dom, spec.count);
    if (spec.preset == "bumps") return family_bumps(dom, spec.count, spec.width_lo, spec.width_hi);
    if (spec.preset == "file") return load_pairs_csv(spec.path, dom);
    fail_config("config: unknown family preset '" + spec.preset + "'");
}

}  // namespace sobocomp
