// Command-line laboratory: covers, Poincare calibration, weight probes,
// exponent verdicts, partitions, and the compact-embedding extraction runs.
// One scenario per invocation; outputs are byte-stable for a fixed config.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "sobocomp/sobocomp.hpp"

namespace fs = std::filesystem;
using namespace sobocomp;

namespace {

struct Ctx {
    RunConfig cfg;
    DomainPtr dom;
    MeasureField w, nu, mu;
    Quasimetric d;
};

Ctx make_ctx(const RunConfig& cfg) {
    Ctx ctx{cfg, build_grid(cfg.domain), {}, {}, {}, build_metric(cfg)};
    ctx.w = build_measure(cfg.w, ctx.dom);
    ctx.nu = build_measure(cfg.nu, ctx.dom);
    ctx.mu = build_measure(cfg.mu, ctx.dom);
    return ctx;
}

void ensure_outdir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail_io("cannot create output directory: " + dir);
}

CellSet box_cells(const GridDomain& dom, const nlohmann::json& box) {
    CellSet out;
    for (int32_t a = 0; a < dom.n_active(); ++a) {
        auto x = dom.center(a);
        bool in = true;
        for (size_t ax = 0; ax < box.size() && ax < static_cast<size_t>(dom.dim); ++ax) {
            double lo = box[ax][0].get<double>(), hi = box[ax][1].get<double>();
            if (x[ax] < lo || x[ax] > hi) in = false;
        }
        if (in) out.push_back(a);
    }
    if (out.empty()) fail_config("lab: box selects no cells");
    return out;
}

int32_t nearest_cell(const GridDomain& dom, const nlohmann::json& coords) {
    std::array<double, 3> x{0.5, 0.5, 0.5};
    for (size_t ax = 0; ax < coords.size() && ax < 3; ++ax) x[ax] = coords[ax].get<double>();
    int32_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int32_t a = 0; a < dom.n_active(); ++a) {
        auto y = dom.center(a);
        double d2 = 0;
        for (int ax = 0; ax < dom.dim; ++ax) {
            double t = y[static_cast<size_t>(ax)] - x[static_cast<size_t>(ax)];
            d2 += t * t;
        }
        if (d2 < bd) {
            bd = d2;
            best = a;
        }
    }
    return best;
}

std::vector<double> q_doubles(const RunConfig& cfg) {
    std::vector<double> q;
    for (const auto& e : cfg.q_list) q.push_back(e.to_double());
    return q;
}

// --- subcommand pipelines ----------------------------------------------------

int cmd_cover(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    double eps = cfg.eps_schedule.front();
    CellSet K = cfg.lab.contains("K_box") ? box_cells(*ctx.dom, cfg.lab.at("K_box"))
                                          : compact_core(ctx.w, eps);
    double r = cfg.cover.radius0 > 0 ? cfg.cover.radius0
                                     : ctx.d(*ctx.dom, 0, ctx.dom->n_active() - 1) / 8.0;
    CoverPlan plan = cfg.cover_mode == "triples"
                         ? euclid_cover_triples(*ctx.dom, K, r, ctx.w)
                         : build_cover(ctx.d, *ctx.dom, K, r, cfg.cover.c0, ctx.w, eps);
    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/cover.csv", cover_csv(plan, *ctx.dom));
    Json j = Json::object();
    j["J"] = static_cast<long long>(plan.pairs.size());
    j["overlap_M"] = static_cast<long long>(plan.overlap_M);
    j["coverage_deficit"] = plan.coverage_deficit;
    j["radius"] = plan.radius;
    j["eps"] = plan.epsilon;
    write_text_file(cfg.out_dir + "/summary.json", j.str() + "\n");
    std::cout << "cover: J=" << plan.pairs.size() << " M=" << plan.overlap_M
              << " deficit=" << fmt17(plan.coverage_deficit) << "\n";
    return 0;
}

int cmd_poincare(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    auto Q = build_form(cfg, ctx.dom);
    auto family = build_family(cfg.family, ctx.dom);
    double p = cfg.p.to_double();

    CellSet K = cfg.lab.contains("K_box") ? box_cells(*ctx.dom, cfg.lab.at("K_box"))
                                          : compact_core(ctx.w, cfg.eps_schedule.front());
    std::vector<double> grid;
    if (cfg.lab.contains("radius_grid"))
        for (const auto& r : cfg.lab.at("radius_grid")) grid.push_back(r.get<double>());
    if (grid.empty()) {
        double r = ctx.d(*ctx.dom, 0, ctx.dom->n_active() - 1) / 4.0;
        for (int i = 0; i < 12; ++i, r *= 0.5) grid.push_back(r);
        std::sort(grid.begin(), grid.end());
    }

    Json summary = Json::object();
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "eps,delta,ok,worst_radius,worst_quotient\n";
    for (double eps : cfg.eps_schedule) {
        auto cal = calibrate_delta(ctx.d, family, K, eps, cfg.cover.c0, p, ctx.w, ctx.nu, ctx.mu,
                                   Q, grid);
        Json row = Json::object();
        row["eps"] = eps;
        row["delta"] = cal.delta;
        row["ok"] = cal.ok;
        if (!cal.ok) {
            row["witness_radius"] = cal.witness_radius;
            row["witness_member"] = static_cast<long long>(cal.witness_member);
            row["witness_quotient"] = cal.witness_quotient;
        }
        rows.push_back(row);
        csv << fmt17(eps) << ',' << fmt17(cal.delta) << ',' << (cal.ok ? 1 : 0) << ','
            << fmt17(cal.witness_radius) << ',' << fmt17(cal.witness_quotient) << "\n";
        std::cout << "poincare: eps=" << fmt17(eps) << " delta=" << fmt17(cal.delta)
                  << (cal.ok ? "" : " (sentinel)") << "\n";
    }
    summary["c0"] = cfg.cover.c0;
    summary["rows"] = std::move(rows);
    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/summary.json", summary.str() + "\n");
    write_text_file(cfg.out_dir + "/poincare.csv", csv.str());
    return 0;
}

int cmd_apcheck(const RunConfig& cfg) {
    double p = cfg.p.to_double();
    int steps = cfg.lab.contains("refine_steps") ? cfg.lab.at("refine_steps").get<int>() : 4;

    auto sup_at = [&](int factor) {
        GridSpec spec = cfg.domain;
        for (int ax = 0; ax < spec.dim; ++ax) spec.cells[static_cast<size_t>(ax)] *= factor;
        auto dom = build_grid(spec);
        auto w = build_measure(cfg.w, dom);
        return ap_constant(w, p, ap_ball_sample(*dom));
    };
    auto coarse = sup_at(1);
    auto fine = sup_at(1 << steps);

    double trend = fine.sup / coarse.sup;
    std::string verdict = trend > 10.0 ? "non_Ap"
                          : std::fabs(fine.sup - coarse.sup) <= 0.2 * coarse.sup ? "stable"
                                                                                 : "inconclusive";
    Json j = Json::object();
    j["p"] = p;
    j["sup_coarse"] = coarse.sup;
    j["sup_fine"] = fine.sup;
    j["trend"] = trend;
    j["refine_steps"] = static_cast<long long>(steps);
    j["verdict"] = verdict;
    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/summary.json", j.str() + "\n");
    write_text_file(cfg.out_dir + "/ap_fine.csv", ap_csv(fine));
    std::cout << "apcheck: sup=" << fmt17(fine.sup) << " trend=" << fmt17(trend) << " verdict="
              << verdict << "\n";
    return 0;
}

int cmd_doubling(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    if (!cfg.lab.contains("ball_pairs")) fail_config("doubling: lab.ball_pairs required");
    std::vector<BallPairSpec> pairs;
    for (const auto& bp : cfg.lab.at("ball_pairs"))
        pairs.push_back({nearest_cell(*ctx.dom, bp.at("center")), bp.at("r").get<double>(),
                         bp.at("r_prime").get<double>()});
    auto fit = doubling_exponent(ctx.w, pairs);
    Json j = Json::object();
    j["theta"] = fit.theta;
    j["C"] = fit.C;
    j["max_residual"] = fit.max_residual;
    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/summary.json", j.str() + "\n");
    std::cout << "doubling: theta=" << fmt17(fit.theta) << " C=" << fmt17(fit.C) << "\n";
    return 0;
}

int cmd_exponents(const RunConfig& cfg) {
    if (!cfg.lab.contains("grid")) fail_config("exponents: lab.grid required");
    const auto& g = cfg.lab.at("grid");
    auto list = [&](const char* key, const Exponent& fallback) {
        std::vector<Exponent> out;
        if (g.contains(key))
            for (const auto& v : g.at(key)) out.push_back(parse_exponent(v, key));
        if (out.empty()) out.push_back(fallback);
        return out;
    };
    std::vector<long long> ns;
    if (g.contains("n"))
        for (const auto& v : g.at("n")) ns.push_back(v.get<long long>());
    if (ns.empty()) ns.push_back(2);
    auto ps = list("p", Exponent::of(2));
    auto as = list("a", Exponent::of(0));
    auto bs = list("b", Exponent::of(0));
    auto ss = list("s", Exponent::of(1));
    std::string part = g.contains("part") ? g.at("part").get<std::string>() : "i";

    Json table = Json::array();
    for (long long n : ns)
        for (const auto& p : ps)
            for (const auto& a : as)
                for (const auto& b : bs)
                    for (const auto& s : ss) {
                        Json row = Json::object();
                        row["n"] = n;
                        row["p"] = p.str();
                        row["a"] = a.str();
                        row["b"] = b.str();
                        row["s"] = s.str();
                        row["part"] = part;
                        auto v = sjohn_admissible(n, p.rat(), a.rat(), b.rat(), s.rat(),
                                                  part == "ii" ? SJohnPart::II : SJohnPart::I);
                        row["holds"] = v.holds;
                        row["binding"] = v.binding_constraint;
                        if (v.holds) row["q_upper"] = v.q_upper_threshold.str();
                        table.push_back(std::move(row));
                    }
    Json j = Json::object();
    j["verdicts"] = std::move(table);
    std::cout << j.str() << "\n";
    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/summary.json", j.str() + "\n");
    return 0;
}

int cmd_partition(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    auto Q = build_form(cfg, ctx.dom);
    if (!cfg.lab.contains("K_box")) fail_config("partition: lab.K_box required");
    CellSet K = box_cells(*ctx.dom, cfg.lab.at("K_box"));
    double r = cfg.lab.contains("radius") ? cfg.lab.at("radius").get<double>() : 0.22;
    double gamma = cfg.lab.contains("gamma") ? cfg.lab.at("gamma").get<double>() : r / 2.0;
    double s = cfg.s.to_double();

    std::vector<Cutoff> cutoffs;
    if (!cfg.lab.contains("centers")) fail_config("partition: lab.centers required");
    for (const auto& c : cfg.lab.at("centers")) {
        int32_t y = nearest_cell(*ctx.dom, c);
        cutoffs.push_back(
            build_cutoff(ctx.d, *ctx.dom, ball(ctx.d, y, r, *ctx.dom), gamma, Q, ctx.mu, s));
    }
    auto fam = partition_of_unity(*ctx.dom, K, std::move(cutoffs));

    double min_on_K = 2, max_on_K = 0;
    std::vector<double> sum(static_cast<size_t>(ctx.dom->n_active()), 0.0);
    for (const auto& psi : fam.psi)
        for (size_t i = 0; i < psi.v.size(); ++i) sum[i] += psi.v[i];
    for (int32_t c : K) {
        min_on_K = std::min(min_on_K, sum[static_cast<size_t>(c)]);
        max_on_K = std::max(max_on_K, sum[static_cast<size_t>(c)]);
    }
    Json j = Json::object();
    j["count"] = static_cast<long long>(fam.psi.size());
    j["sum_min_on_K"] = min_on_K;
    j["sum_max_on_K"] = max_on_K;
    Json certs = Json::array();
    for (const auto& c : fam.cutoffs) certs.push_back(c.certificate);
    j["certificates"] = std::move(certs);
    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/summary.json", j.str() + "\n");
    std::cout << "partition: " << fam.psi.size() << " pieces, sum on K in ["
              << fmt17(min_on_K) << ", " << fmt17(max_on_K) << "]\n";
    return 0;
}

int cmd_sobolev_local(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    auto Q = build_form(cfg, ctx.dom);
    double p = cfg.p.to_double();
    double sigma = cfg.sigma.to_double();
    if (!cfg.lab.contains("ball")) fail_config("sobolev-local: lab.ball required");
    const auto& bj = cfg.lab.at("ball");
    int32_t center = nearest_cell(*ctx.dom, bj.at("center"));
    Ball B = ball(ctx.d, center, bj.at("radius").get<double>(), *ctx.dom);

    auto xc = ctx.dom->center(center);
    std::vector<SobolevPair> fam;
    int count = cfg.family.count;
    for (int k = 0; k < count; ++k) {
        double t = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
        double width = cfg.family.width_lo *
                       std::pow(cfg.family.width_hi / cfg.family.width_lo, t);
        fam.push_back(make_bump(ctx.dom, xc, width));
    }
    double CB = local_sobolev_constant(fam, B, p, sigma, ctx.w, ctx.nu, ctx.mu, Q);
    bool normalized_ok = true;
    if (cfg.lab.contains("C_cand")) {
        double cand = cfg.lab.at("C_cand").get<double>();
        for (const auto& pr : fam)
            normalized_ok = normalized_ok &&
                            normalized_sobolev_check(pr, B, p, sigma, ctx.w, ctx.nu, ctx.mu, Q, cand);
    }
    Json j = Json::object();
    j["C_ball"] = CB;
    j["normalized_ok"] = normalized_ok;

    // optional assembly pass: partition the target set and compose the
    // global constant from per-ball constants, then test held-out bumps
    if (cfg.lab.contains("assembly")) {
        const auto& asm_cfg = cfg.lab.at("assembly");
        CellSet omega_prime = box_cells(*ctx.dom, asm_cfg.at("omega_prime_box"));
        double r = asm_cfg.at("radius").get<double>();
        double gamma = asm_cfg.contains("gamma") ? asm_cfg.at("gamma").get<double>() : r / 2.0;
        double s = cfg.s.to_double();
        Exponent t_prime = cutoff_conjugates(cfg.s, cfg.p, cfg.sigma).t_prime;

        std::vector<Cutoff> cutoffs;
        for (const auto& c : asm_cfg.at("centers")) {
            int32_t y = nearest_cell(*ctx.dom, c);
            cutoffs.push_back(
                build_cutoff(ctx.d, *ctx.dom, ball(ctx.d, y, r, *ctx.dom), gamma, Q, ctx.mu, s));
        }
        auto part = partition_of_unity(*ctx.dom, omega_prime, std::move(cutoffs));

        std::vector<double> local_C, C1_consts;
        for (const auto& cut : part.cutoffs) {
            auto xb = ctx.dom->center(cut.outer.center);
            std::vector<SobolevPair> train;
            for (int k = 0; k < cfg.family.count; ++k) {
                double t = cfg.family.count == 1 ? 0.5
                                                 : static_cast<double>(k) / (cfg.family.count - 1);
                double width = cfg.family.width_lo *
                               std::pow(cfg.family.width_hi / cfg.family.width_lo, t);
                auto pr = make_bump(ctx.dom, xb, width);
                if (pr.support && cells_subset(*pr.support, cut.outer.cells))
                    train.push_back(std::move(pr));
            }
            local_C.push_back(
                local_sobolev_constant(train, cut.outer, p, sigma, ctx.w, ctx.nu, ctx.mu, Q));
            double c1 = 0;
            for (const auto& pr : train) {
                double num = lp_norm(pr.f, p * t_prime.to_double(), ctx.mu, cut.outer.cells);
                double den = sobolev_norm(pr, p, ctx.nu, ctx.mu, Q, ctx.dom->all_cells());
                if (den > 0) c1 = std::max(c1, num / den);
            }
            C1_consts.push_back(c1);
        }
        double C_omega = local_to_global_sobolev(omega_prime, part, local_C, C1_consts, s, Q, ctx.mu);
        j["C_omega_prime"] = C_omega;
        Json per_ball = Json::array();
        for (double c : local_C) per_ball.push_back(c);
        j["C_per_ball"] = std::move(per_ball);
    }

    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/summary.json", j.str() + "\n");
    std::cout << "sobolev-local: C(B)=" << fmt17(CB) << "\n";
    return 0;
}

FamilyS make_engine_family(const Ctx& ctx) {
    FamilyS fam;
    fam.members = build_family(ctx.cfg.family, ctx.dom);
    fam.p = ctx.cfg.p.to_double();
    fam.N = ctx.cfg.N.to_double();
    fam.q_list = q_doubles(ctx.cfg);
    fam.declared_M = ctx.cfg.family.M;
    return fam;
}

void emit_extraction(const RunConfig& cfg, const ExtractionReport& rep, const GridDomain& dom) {
    ensure_outdir(cfg.out_dir);
    write_text_file(cfg.out_dir + "/summary.json", extraction_json(rep).str() + "\n");
    write_text_file(cfg.out_dir + "/levels.csv", extraction_csv(rep));
    for (size_t i = 0; i < rep.levels.size(); ++i)
        write_text_file(cfg.out_dir + "/cover_" + std::to_string(i) + ".csv",
                        cover_csv(rep.levels[i].cover, dom));
    write_text_file(cfg.out_dir + "/limit.csv", field_csv(rep.limit));
}

int cmd_compact_general(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    auto Q = build_form(cfg, ctx.dom);
    auto fam = make_engine_family(ctx);
    auto rep = run_general(ctx.d, fam, ctx.w, ctx.nu, ctx.mu, Q, cfg.eps_schedule, cfg.cover);
    emit_extraction(cfg, rep, *ctx.dom);
    std::cout << "compact-general: subsequence " << rep.subsequence.size() << "/"
              << fam.members.size() << ", final L1 modulus "
              << fmt17(rep.levels.back().modulus_L1) << "\n";
    return 0;
}

int cmd_compact_abstract(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    auto Q = build_form(cfg, ctx.dom);
    auto fam = make_engine_family(ctx);
    std::vector<ScalarField> scalars;
    for (const auto& m : fam.members) scalars.push_back(m.f);

    bool reduction = cfg.lab.contains("from_general") && cfg.lab.at("from_general").get<bool>();
    ExtractionReport rep;
    bool match = false;
    if (reduction) {
        auto general = run_general(ctx.d, fam, ctx.w, ctx.nu, ctx.mu, Q, cfg.eps_schedule, cfg.cover);
        std::vector<CoverPlan> covers;
        for (const auto& lvl : general.levels) covers.push_back(lvl.cover);
        AbstractBounds a = [&](int e, int m, int l) {
            const auto& F = covers[static_cast<size_t>(e)].pairs[static_cast<size_t>(l)].F;
            return sobolev_norm(fam.members[static_cast<size_t>(m)], fam.p, ctx.nu, ctx.mu, Q,
                                F.cells);
        };
        double C = general.C2 * std::pow(fam.declared_M, fam.p);
        rep = run_abstract(scalars, ctx.w, fam.p, fam.N, fam.q_list, C, fam.declared_M,
                           cfg.eps_schedule, covers, a);
        match = rep.subsequence == general.subsequence;
    } else {
        double C = cfg.lab.contains("C") ? cfg.lab.at("C").get<double>() : 1.0;
        rep = run_abstract(scalars, ctx.w, fam.p, fam.N, fam.q_list, C, fam.declared_M,
                           cfg.eps_schedule, ctx.d, cfg.cover);
    }
    emit_extraction(cfg, rep, *ctx.dom);
    std::cout << "compact-abstract: subsequence " << rep.subsequence.size() << "/" << scalars.size()
              << (reduction ? (match ? ", matches general" : ", MISMATCH vs general") : "") << "\n";
    if (reduction && !match) fail_invariant("compact-abstract: reduction subsequence mismatch");
    return 0;
}

int cmd_compact_local(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    auto Q = build_form(cfg, ctx.dom);
    auto fam = make_engine_family(ctx);
    if (!cfg.lab.contains("omega_prime_box"))
        fail_config("compact-local: lab.omega_prime_box required");
    CellSet omega_prime = box_cells(*ctx.dom, cfg.lab.at("omega_prime_box"));
    auto rep = run_local(ctx.d, fam, ctx.w, ctx.nu, ctx.mu, Q, omega_prime, cfg.j_max, cfg.cover);
    emit_extraction(cfg, rep, *ctx.dom);
    std::cout << "compact-local: subsequence " << rep.subsequence.size() << "/"
              << fam.members.size() << "\n";
    return 0;
}

int cmd_compact_quasimetric(const RunConfig& cfg) {
    auto ctx = make_ctx(cfg);
    auto fam_pairs = build_family(cfg.family, ctx.dom);
    std::vector<ScalarField> members;
    for (const auto& m : fam_pairs) members.push_back(m.f);
    double p = cfg.p.to_double();
    double N = cfg.N.to_double();

    std::string a_kind = cfg.lab.contains("a_star") ? cfg.lab.at("a_star").get<std::string>() : "radius";
    double a_const = cfg.lab.contains("a_constant") ? cfg.lab.at("a_constant").get<double>() : 0.3;
    std::function<double(double)> a_star;
    if (a_kind == "radius") a_star = [](double r) { return r; };
    else if (a_kind == "constant") a_star = [a_const](double) { return a_const; };
    else fail_config("compact-quasimetric: unknown a_star kind");

    const auto& dom = ctx.dom;
    const auto& mu = ctx.mu;
    BallSetFunction b = [&, a_star](int m, const Ball& B, const Ball& dilate) {
        ScalarField mag{dom, std::vector<double>(members[0].v.size(), 0.0)};
        for (int32_t c : dilate.cells) {
            double s = 0;
            for (int ax = 0; ax < dom->dim; ++ax) {
                double t = fam_pairs[static_cast<size_t>(m)]
                               .g.comp[static_cast<size_t>(ax)][static_cast<size_t>(c)];
                s += t * t;
            }
            mag.v[static_cast<size_t>(c)] = std::sqrt(s);
        }
        return a_star(B.radius) * lp_norm(mag, p, mu, dilate.cells);
    };

    auto out = run_quasimetric(ctx.d, members, ctx.w, b, cfg.cover.c0, p, N, q_doubles(cfg),
                               cfg.family.M, cfg.eps_schedule, cfg.cover, a_star);
    emit_extraction(cfg, out.report, *ctx.dom);
    Json extra = Json::object();
    Json sups = Json::array();
    for (double v : out.a_star_sup) sups.push_back(v);
    extra["a_star_sup"] = std::move(sups);
    extra["a_star_vanishing"] = out.a_star_vanishing;
    write_text_file(cfg.out_dir + "/a_star.json", extra.str() + "\n");
    std::cout << "compact-quasimetric: subsequence " << out.report.subsequence.size() << "/"
              << members.size() << (out.a_star_vanishing ? "" : " (a_* non-vanishing)") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for weighted compact-embedding machinery"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int threads = 0;

    std::map<std::string, std::function<int(const RunConfig&)>> handlers = {
        {"cover", cmd_cover},
        {"poincare", cmd_poincare},
        {"apcheck", cmd_apcheck},
        {"doubling", cmd_doubling},
        {"exponents", cmd_exponents},
        {"partition", cmd_partition},
        {"sobolev-local", cmd_sobolev_local},
        {"compact-general", cmd_compact_general},
        {"compact-abstract", cmd_compact_abstract},
        {"compact-local", cmd_compact_local},
        {"compact-quasimetric", cmd_compact_quasimetric},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, fn] : handlers) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "scenario config (JSON)")->required();
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--threads", threads, "worker thread cap");
        subs[name] = sub;
    }

    CLI11_PARSE(app, argc, argv);

    if (threads <= 0) {
        if (const char* env = std::getenv("SOBOCOMP_THREADS")) threads = std::atoi(env);
    }
    set_thread_cap(threads > 0 ? threads : 1);

    try {
        RunConfig cfg = load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        for (const auto& [name, fn] : handlers) {
            if (subs[name]->parsed()) return fn(cfg);
        }
        fail_config("no subcommand selected");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
