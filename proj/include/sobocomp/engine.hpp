#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sobocomp/cover.hpp"
#include "sobocomp/forms.hpp"
#include "sobocomp/parallel.hpp"
#include "sobocomp/poincare.hpp"

namespace sobocomp {

// A finite family with declared exponents and a boundedness certificate: the
// engine refuses to run when a member's measured norm exceeds declared_M.
struct FamilyS {
    std::vector<SobolevPair> members;
    double p = 2;
    double N = std::numeric_limits<double>::infinity();
    std::vector<double> q_list;
    double declared_M = 0;
};

struct CoverBuildConfig {
    double c0 = 1.0;
    double radius0 = 0.0;  // 0: start from the d-diameter / 8
    double shrink = 0.5;
    int max_shrinks = 20;
};

struct EpsLevelReport {
    double eps = 0;
    double radius = 0;
    int J = 0;
    int overlap_M = 0;
    double worst_quotient = 0;  // worst verified hypothesis quotient
    int T_eps = 0;              // tail start (position in the subsequence)
    double I = 0;               // worst tail-pair I
    double II = 0;              // worst tail-pair II
    double pairwise_modulus = 0;  // worst tail-pair L^p modulus on union(E)
    double modulus_L1 = 0;        // worst tail-pair L^1 modulus on Omega
    double bound_L1_cover = 0;    // C eps w(Omega)^{1/p'}
    double bound_L1_tail = 0;     // 2 M eps^{1/N'}
    CoverPlan cover;
};

struct QModulusRow {
    double q = 0;
    double lambda = 0;
    double modulus = 0;  // worst tail-pair L^q modulus at the finest level
    double bound = 0;    // interpolation bound
};

struct ExtractionReport {
    std::vector<EpsLevelReport> levels;
    std::vector<int> subsequence;  // 0-based member positions, increasing
    int limit_index = 0;           // tail representative
    ScalarField limit;
    std::vector<QModulusRow> q_table;
    double M = 0;           // declared certificate
    double M_measured = 0;  // measured sup of the certified norms
    double C1 = 0;
    double C2 = 0;
    // membership of each member in the a.e.-closure is witnessed by its own
    // constant approximating sequence; recorded for the report
    std::string closure_note = "closure membership witnessed by constant sequences";
};

// --- product-space property -------------------------------------------------

struct BpVerdict {
    bool holds = false;
    double C2 = 0;
    double worst_ratio = 0;  // max over pairs of lhs / (2^p C1 rhs)
};

// Checks sum_l ||(f,g) chi_{B_l}||^p <= 2^p C1 ||(f,g)||^p for every sample
// pair, against a family with cellwise overlap at most C1.
inline BpVerdict verify_Bp(const std::vector<Ball>& balls, int C1,
                           const std::vector<SobolevPair>& sample_pairs, double p,
                           const MeasureField& nu, const MeasureField& mu,
                           const QuadraticFormField& Q) {
    if (balls.empty()) fail_pre("verify_Bp: empty ball family");
    const auto& dom = *nu.dom;
    {
        std::vector<int> count(static_cast<size_t>(dom.n_active()), 0);
        for (const auto& b : balls)
            for (int32_t c : b.cells) ++count[static_cast<size_t>(c)];
        int m = 0;
        for (int c : count) m = std::max(m, c);
        if (m > C1)
            fail_pre("verify_Bp: overlap " + std::to_string(m) + " exceeds declared C1 " +
                     std::to_string(C1));
    }
    BpVerdict v;
    v.C2 = std::pow(2.0, p) * C1;
    v.holds = true;
    auto all = dom.all_cells();
    for (const auto& pair : sample_pairs) {
        double rhs = std::pow(sobolev_norm(pair, p, nu, mu, Q, all), p) * v.C2;
        double lhs = 0;
        for (const auto& b : balls) lhs += std::pow(sobolev_norm(pair, p, nu, mu, Q, b.cells), p);
        if (rhs == 0) {
            if (lhs > 0) v.holds = false;
            continue;
        }
        v.worst_ratio = std::max(v.worst_ratio, lhs / rhs);
        if (lhs > rhs * (1 + 1e-9)) v.holds = false;
    }
    return v;
}

// --- the I / II split -------------------------------------------------------

struct Decomposition {
    double I = 0;
    double II = 0;
};

// I = sum_l int_{E_l} |d - d_{E_l,w}|^p dw, II = sum_l |d_{E_l,w}|^p w(E_l),
// with the union integral verified against 2^{p-1}(I + II).
inline Decomposition decompose_I_II(const ScalarField& fm, const ScalarField& fk,
                                    const CoverPlan& cover, double p, const MeasureField& w) {
    Decomposition out;
    const size_t n = fm.v.size();
    std::vector<double> diff(n);
    for (size_t i = 0; i < n; ++i) diff[i] = fm.v[i] - fk.v[i];

    std::vector<char> in_union(n, 0);
    for (const auto& pr : cover.pairs) {
        double mass = 0, acc = 0;
        for (int32_t c : pr.E) {
            mass += w.mass[static_cast<size_t>(c)];
            acc += diff[static_cast<size_t>(c)] * w.mass[static_cast<size_t>(c)];
            in_union[static_cast<size_t>(c)] = 1;
        }
        if (!(mass > 0)) fail_pre("decompose_I_II: zero-measure E (must have been dropped)");
        double avg = acc / mass;
        double dev = 0;
        for (int32_t c : pr.E)
            dev += std::pow(std::fabs(diff[static_cast<size_t>(c)] - avg), p) *
                   w.mass[static_cast<size_t>(c)];
        out.I += dev;
        out.II += std::pow(std::fabs(avg), p) * mass;
    }

    double union_integral = 0;
    for (size_t i = 0; i < n; ++i)
        if (in_union[i]) union_integral += std::pow(std::fabs(diff[i]), p) * w.mass[i];
    double bound = std::pow(2.0, p - 1) * (out.I + out.II);
    if (union_integral > bound * (1 + 1e-10) + 1e-300)
        fail_invariant("decompose_I_II: union integral exceeds 2^{p-1}(I+II)");
    return out;
}

// --- deterministic finite Bolzano-Weierstrass -------------------------------

// Value bisection per coordinate: keep the larger half (ties keep the half
// holding the earliest member) until the spread meets the tolerance or only
// two members remain. Positions are 0-based.
inline std::vector<int> select_subsequence(const std::vector<std::vector<double>>& table,
                                           const std::vector<double>& tol) {
    const int n = static_cast<int>(table.size());
    std::vector<int> S(static_cast<size_t>(n));
    std::iota(S.begin(), S.end(), 0);
    if (n < 2) return S;
    const size_t coords = table.front().size();
    if (tol.size() != coords) fail_pre("select_subsequence: tolerance size mismatch");
    for (const auto& row : table)
        if (row.size() != coords) fail_pre("select_subsequence: ragged table");

    for (size_t c = 0; c < coords; ++c) {
        for (;;) {
            if (S.size() <= 2) break;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int i : S) {
                lo = std::min(lo, table[static_cast<size_t>(i)][c]);
                hi = std::max(hi, table[static_cast<size_t>(i)][c]);
            }
            if (hi - lo <= tol[c]) break;
            double mid = 0.5 * (lo + hi);
            std::vector<int> low, high;
            for (int i : S)
                (table[static_cast<size_t>(i)][c] <= mid ? low : high).push_back(i);
            if (low.empty() || high.empty()) break;  // spread is one rounding step
            if (low.size() > high.size()) S = std::move(low);
            else if (high.size() > low.size()) S = std::move(high);
            else S = (low.front() < high.front()) ? std::move(low) : std::move(high);
        }
    }
    return S;
}

// Wrapper enforcing the boundedness precondition on the member norms.
inline std::vector<int> select_subsequence(const std::vector<std::vector<double>>& table,
                                           const std::vector<double>& tol,
                                           const std::vector<double>& norms, double M) {
    for (size_t i = 0; i < norms.size(); ++i)
        if (norms[i] > M * (1 + 1e-12))
            fail_pre("select_subsequence: member " + std::to_string(i) +
                     " exceeds the declared norm bound");
    return select_subsequence(table, tol);
}

// --- shared extraction machinery ---------------------------------------------

namespace detail {

struct LevelData {
    double eps = 0;
    CoverPlan cover;
    std::vector<std::vector<double>> averages;  // [member][ell]
    std::vector<double> tol;                    // [ell]
    double worst_quotient = 0;
};

inline std::vector<std::vector<double>> average_table(const std::vector<const ScalarField*>& fs,
                                                      const CoverPlan& cover,
                                                      const MeasureField& w) {
    std::vector<std::vector<double>> avg(fs.size());
    for (size_t m = 0; m < fs.size(); ++m) {
        avg[m].resize(cover.pairs.size());
        for (size_t l = 0; l < cover.pairs.size(); ++l)
            avg[m][l] = average(*fs[m], cover.pairs[l].E, w);
    }
    return avg;
}

inline std::vector<double> level_tolerances(const CoverPlan& cover, double eps, double p) {
    const double J = static_cast<double>(cover.pairs.size());
    std::vector<double> tol(cover.pairs.size());
    for (size_t l = 0; l < cover.pairs.size(); ++l)
        tol[l] = std::pow(std::pow(eps, p) / (J * cover.pairs[l].wE), 1.0 / p);
    return tol;
}

// Smallest tail position such that every later pair meets the per-set term
// bound w(E_l) |avg_m - avg_k|^p <= eps^p / J.
inline int tail_start(const std::vector<int>& subseq, const LevelData& lvl, double p) {
    const int len = static_cast<int>(subseq.size());
    if (len < 2) return std::max(0, len - 1);
    const double J = static_cast<double>(lvl.cover.pairs.size());
    const double budget = std::pow(lvl.eps, p) / J * (1 + 1e-9);
    auto pair_ok = [&](int a, int b) {
        for (size_t l = 0; l < lvl.cover.pairs.size(); ++l) {
            double da = lvl.averages[static_cast<size_t>(subseq[static_cast<size_t>(a)])][l];
            double db = lvl.averages[static_cast<size_t>(subseq[static_cast<size_t>(b)])][l];
            if (lvl.cover.pairs[l].wE * std::pow(std::fabs(da - db), p) > budget) return false;
        }
        return true;
    };
    int t = len - 1;
    for (int start = len - 2; start >= 0; --start) {
        bool ok = true;
        for (int a = start; a < len && ok; ++a)
            for (int b = a + 1; b < len && ok; ++b) ok = pair_ok(a, b);
        if (!ok) break;
        t = start;
    }
    return t;
}

inline double lq_norm_diff(const ScalarField& fa, const ScalarField& fb, double q,
                           const MeasureField& w, std::span<const int32_t> cells) {
    ScalarField d{fa.dom, std::vector<double>(fa.v.size(), 0.0)};
    for (size_t i = 0; i < d.v.size(); ++i) d.v[i] = fa.v[i] - fb.v[i];
    return lp_norm(d, q, w, cells);
}

}  // namespace detail

namespace detail {

struct AbstractChainResult {
    std::vector<EpsLevelReport> levels;
    std::vector<int> subsequence;
    std::vector<QModulusRow> q_table;
};

// Shared tail machinery for the E-set-only runs: averages, tolerances, one
// subsequence, per-level I/II and moduli, the L^1 proof bound with constant
// C_hyp from the hypothesis sum, and interpolation at the finest level. The
// moduli are taken over `modulus_cells` (the whole space or Omega').
inline AbstractChainResult abstract_chain(const std::vector<const ScalarField*>& fs,
                                          const MeasureField& w, double p, double N,
                                          const std::vector<double>& q_list, double C_hyp,
                                          double M_for_tail, std::vector<LevelData> levels,
                                          const CellSet& modulus_cells) {
    AbstractChainResult out;
    std::vector<std::vector<double>> table(fs.size());
    std::vector<double> tol;
    for (auto& lvl : levels) {
        lvl.averages = average_table(fs, lvl.cover, w);
        lvl.tol = level_tolerances(lvl.cover, lvl.eps, p);
        for (size_t m = 0; m < fs.size(); ++m)
            table[m].insert(table[m].end(), lvl.averages[m].begin(), lvl.averages[m].end());
        tol.insert(tol.end(), lvl.tol.begin(), lvl.tol.end());
    }
    out.subsequence = select_subsequence(table, tol);

    const double p_conj = p == 1 ? std::numeric_limits<double>::infinity() : p / (p - 1);
    const double N_conj = std::isinf(N) ? 1.0 : N / (N - 1.0);
    const double w_modulus = w.on(modulus_cells);
    const double C_chain =
        std::pow(std::pow(2.0, p - 1) * (std::pow(2.0, p) * C_hyp + 1.0), 1.0 / p);

    const int len = static_cast<int>(out.subsequence.size());
    for (auto& lvl : levels) {
        EpsLevelReport lr;
        lr.eps = lvl.eps;
        lr.radius = lvl.cover.radius;
        lr.J = static_cast<int>(lvl.cover.pairs.size());
        lr.overlap_M = lvl.cover.overlap_M;
        lr.worst_quotient = lvl.worst_quotient;
        lr.T_eps = tail_start(out.subsequence, lvl, p);

        // the L^p modulus lives on the covered part of the modulus set; the
        // I/II composition only controls the union of the E sets
        CellSet covered_part;
        {
            auto u = lvl.cover.union_of_E();
            std::set_intersection(modulus_cells.begin(), modulus_cells.end(), u.begin(), u.end(),
                                  std::back_inserter(covered_part));
        }

        for (int a = lr.T_eps; a < len; ++a) {
            for (int b = a + 1; b < len; ++b) {
                const auto& fa = *fs[static_cast<size_t>(out.subsequence[static_cast<size_t>(a)])];
                const auto& fb = *fs[static_cast<size_t>(out.subsequence[static_cast<size_t>(b)])];
                auto dec = decompose_I_II(fa, fb, lvl.cover, p, w);
                lr.I = std::max(lr.I, dec.I);
                lr.II = std::max(lr.II, dec.II);
                lr.pairwise_modulus =
                    std::max(lr.pairwise_modulus, lq_norm_diff(fa, fb, p, w, covered_part));
                lr.modulus_L1 = std::max(lr.modulus_L1, lq_norm_diff(fa, fb, 1.0, w, modulus_cells));
            }
        }

        if (lr.I > std::pow(2.0, p) * C_hyp * std::pow(lvl.eps, p) * (1 + 1e-9) + 1e-300)
            fail_invariant("extraction: I exceeds 2^p C eps^p at eps " + std::to_string(lvl.eps));
        if (lr.II > std::pow(lvl.eps, p) * (1 + 1e-9))
            fail_invariant("extraction: tail II exceeds eps^p at eps " + std::to_string(lvl.eps));
        if (std::pow(lr.pairwise_modulus, p) >
            std::pow(2.0, p - 1) * (lr.I + lr.II) * (1 + 1e-9) + 1e-300)
            fail_invariant("extraction: modulus exceeds the I/II composition");

        lr.bound_L1_cover = C_chain * lvl.eps *
                            (std::isinf(p_conj) ? 1.0 : std::pow(w_modulus, 1.0 / p_conj));
        lr.bound_L1_tail = 2.0 * M_for_tail * std::pow(lvl.eps, 1.0 / N_conj);
        if (lr.modulus_L1 > (lr.bound_L1_cover + lr.bound_L1_tail) * (1 + 1e-9))
            fail_invariant("extraction: L1 modulus exceeds the proof bound at eps " +
                           std::to_string(lvl.eps));

        lr.cover = std::move(lvl.cover);
        out.levels.push_back(std::move(lr));
    }

    const auto& fine = out.levels.back();
    for (double q : q_list) {
        QModulusRow row;
        row.q = q;
        row.lambda = std::isinf(N) ? 1.0 / q : (1.0 / q - 1.0 / N) / (1.0 - 1.0 / N);
        for (int a = fine.T_eps; a < len; ++a) {
            for (int b = a + 1; b < len; ++b) {
                const auto& fa = *fs[static_cast<size_t>(out.subsequence[static_cast<size_t>(a)])];
                const auto& fb = *fs[static_cast<size_t>(out.subsequence[static_cast<size_t>(b)])];
                double mq = lq_norm_diff(fa, fb, q, w, modulus_cells);
                double m1 = lq_norm_diff(fa, fb, 1.0, w, modulus_cells);
                double mN = lq_norm_diff(fa, fb, N, w, modulus_cells);
                if (mq > std::pow(m1, row.lambda) * std::pow(mN, 1.0 - row.lambda) * (1 + 1e-9) + 1e-300)
                    fail_invariant("extraction: interpolation inequality violated");
                row.modulus = std::max(row.modulus, mq);
            }
        }
        row.bound = std::pow(fine.modulus_L1, row.lambda) * std::pow(2.0 * M_for_tail, 1.0 - row.lambda);
        if (row.modulus > row.bound * (1 + 1e-9) + 1e-300)
            fail_invariant("extraction: L^q modulus exceeds the interpolation bound");
        out.q_table.push_back(row);
    }
    return out;
}

}  // namespace detail

// --- extraction runs ----------------------------------------------------------

// General run: verifies the boundedness certificate, builds one cover per
// eps with the local Poincare hypothesis verified member-by-member and
// ball-by-ball, extracts a single subsequence, and checks the bound chain
// I <= 2^p C2 M^p eps^p, II <= eps^p on the tail, and the L^1 modulus
// against C eps w(Omega)^{1/p'} + 2 M eps^{1/N'}.
inline ExtractionReport run_general(const Quasimetric& d, const FamilyS& family,
                                    const MeasureField& w, const MeasureField& nu,
                                    const MeasureField& mu, const QuadraticFormField& Q,
                                    const std::vector<double>& eps_schedule,
                                    const CoverBuildConfig& cfg = {}) {
    if (family.members.empty()) fail_pre("run_general: empty family");
    if (!(family.p >= 1)) fail_pre("run_general: p must be >= 1");
    if (!(family.N > 1)) fail_pre("run_general: requires N > 1");
    for (double q : family.q_list)
        if (!(q >= 1) || !(q < family.N)) fail_pre("run_general: q_list entries must satisfy 1 <= q < N");
    const auto& dom = *w.dom;
    const double p = family.p;
    auto all = dom.all_cells();

    ExtractionReport rep;
    rep.M = family.declared_M;

    // boundedness certificate
    for (size_t m = 0; m < family.members.size(); ++m) {
        const auto& pr = family.members[m];
        double nrm = lp_norm(pr.f, family.N, w, all) + sobolev_norm(pr, p, nu, mu, Q, all);
        rep.M_measured = std::max(rep.M_measured, nrm);
        if (nrm > family.declared_M * (1 + 1e-12))
            fail_hypothesis("run_general: boundedness certificate violated by member " +
                            std::to_string(m) + " (norm " + std::to_string(nrm) +
                            " > declared M " + std::to_string(family.declared_M) + ")");
    }

    double r0 = cfg.radius0;
    if (r0 <= 0) {
        r0 = d(dom, 0, dom.n_active() - 1) / 8.0;
        if (!(r0 > 0)) r0 = 1.0;
    }

    // per-eps covers with hypothesis (iii) verified, shrinking the radius
    // until every member passes on every pair
    std::vector<detail::LevelData> levels;
    for (double eps : eps_schedule) {
        if (!(eps > 0)) fail_pre("run_general: eps must be positive");
        CellSet K = compact_core(w, eps);
        double r = r0;
        bool accepted = false;
        std::string last_witness;
        for (int attempt = 0; attempt <= cfg.max_shrinks && !accepted; ++attempt, r *= cfg.shrink) {
            CoverPlan cover = build_cover(d, dom, K, r, cfg.c0, w, eps);
            if (cover.pairs.empty()) continue;
            double worst = 0;
            bool ok = true;
            std::vector<double> worst_per_member(family.members.size(), 0.0);
            parallel_for(static_cast<int64_t>(family.members.size()), [&](int64_t lo, int64_t hi) {
                for (int64_t m = lo; m < hi; ++m) {
                    for (const auto& prc : cover.pairs) {
                        const auto& pr = family.members[static_cast<size_t>(m)];
                        double avg = average(pr.f, prc.E, w);
                        double num = 0;
                        for (int32_t c : prc.E)
                            num += std::pow(std::fabs(pr.f.v[static_cast<size_t>(c)] - avg), p) *
                                   w.mass[static_cast<size_t>(c)];
                        num = std::pow(num, 1.0 / p);
                        double den = sobolev_norm(pr, p, nu, mu, Q, prc.F.cells);
                        double quot = den > 0 ? num / den
                                              : (num > 0 ? std::numeric_limits<double>::infinity() : 0.0);
                        worst_per_member[static_cast<size_t>(m)] =
                            std::max(worst_per_member[static_cast<size_t>(m)], quot);
                    }
                }
            });
            for (size_t m = 0; m < worst_per_member.size(); ++m) {
                worst = std::max(worst, worst_per_member[m]);
                if (worst_per_member[m] > eps * (1 + 1e-12)) {
                    ok = false;
                    last_witness = "member " + std::to_string(m) + ", radius " + std::to_string(r) +
                                   ", quotient " + std::to_string(worst_per_member[m]);
                }
            }
            if (ok) {
                detail::LevelData lvl;
                lvl.eps = eps;
                lvl.cover = std::move(cover);
                lvl.worst_quotient = worst;
                levels.push_back(std::move(lvl));
                accepted = true;
            }
        }
        if (!accepted)
            fail_hypothesis("run_general: local Poincare hypothesis failed at eps " +
                            std::to_string(eps) +
                            (last_witness.empty() ? "" : " (" + last_witness + ")"));
    }

    // C1 independent of eps: the worst observed overlap across the schedule
    int C1 = 0;
    for (const auto& lvl : levels) C1 = std::max(C1, lvl.cover.overlap_M);
    rep.C1 = C1;
    rep.C2 = std::pow(2.0, p) * C1;

    // product-space property on each cover's dilated balls
    for (const auto& lvl : levels) {
        std::vector<Ball> balls;
        for (const auto& prc : lvl.cover.pairs) balls.push_back(prc.F);
        auto bp = verify_Bp(balls, C1, family.members, p, nu, mu, Q);
        if (!bp.holds) fail_invariant("run_general: product-space property violated");
    }

    // (1.6)-style per-member sum against C2 M^p eps^p
    const double M = family.declared_M;
    for (const auto& lvl : levels) {
        const double diff_budget = rep.C2 * std::pow(M, p) * std::pow(lvl.eps, p);
        for (size_t m = 0; m < family.members.size(); ++m) {
            double sum = 0;
            for (const auto& prc : lvl.cover.pairs) {
                double avg = average(family.members[m].f, prc.E, w);
                for (int32_t c : prc.E)
                    sum += std::pow(std::fabs(family.members[m].f.v[static_cast<size_t>(c)] - avg), p) *
                           w.mass[static_cast<size_t>(c)];
            }
            if (sum > diff_budget * (1 + 1e-9))
                fail_invariant("run_general: per-member deviation sum exceeds C2 M^p eps^p");
        }
    }

    std::vector<const ScalarField*> fs;
    for (const auto& m : family.members) fs.push_back(&m.f);
    auto chain = detail::abstract_chain(fs, w, p, family.N, family.q_list,
                                        rep.C2 * std::pow(M, p), M, std::move(levels), all);
    rep.levels = std::move(chain.levels);
    rep.subsequence = std::move(chain.subsequence);
    rep.q_table = std::move(chain.q_table);
    rep.limit_index = rep.subsequence.back();
    rep.limit = family.members[static_cast<size_t>(rep.limit_index)].f;
    return rep;
}

// --- abstract run (no product space, E sets only) ----------------------------

// Optional per-(level, member, set) bound values realizing the
// ||f - f_{E_l,w}|| <= eps a_l route with sum a_l^p <= C.
using AbstractBounds = std::function<double(int eps_idx, int member, int ell)>;


// Abstract run over explicit covers (typically lifted from a general run):
// verifies the hypothesis sum per member per level, either directly or via
// supplied a-values, then extracts with the same deterministic selector.
inline ExtractionReport run_abstract(const std::vector<ScalarField>& members,
                                     const MeasureField& w, double p, double N,
                                     const std::vector<double>& q_list, double C,
                                     double declared_M_N, const std::vector<double>& eps_schedule,
                                     const std::vector<CoverPlan>& covers,
                                     const AbstractBounds& a = nullptr) {
    if (members.empty()) fail_pre("run_abstract: empty family");
    if (!(p >= 1)) fail_pre("run_abstract: p must be >= 1");
    if (!(N > 1)) fail_pre("run_abstract: requires N > 1");
    if (covers.size() != eps_schedule.size())
        fail_pre("run_abstract: need one cover per eps level");
    for (double q : q_list)
        if (!(q >= 1) || !(q < N)) fail_pre("run_abstract: q_list entries must satisfy 1 <= q < N");
    const auto all = w.dom->all_cells();

    ExtractionReport rep;
    rep.M = declared_M_N;
    for (size_t m = 0; m < members.size(); ++m) {
        double nrm = lp_norm(members[m], N, w, all);
        rep.M_measured = std::max(rep.M_measured, nrm);
        if (nrm > declared_M_N * (1 + 1e-12))
            fail_hypothesis("run_abstract: L^N certificate violated by member " + std::to_string(m));
    }

    std::vector<detail::LevelData> levels;
    for (size_t e = 0; e < eps_schedule.size(); ++e) {
        double eps = eps_schedule[e];
        const CoverPlan& cover = covers[e];
        for (size_t m = 0; m < members.size(); ++m) {
            double sum = 0;
            for (size_t l = 0; l < cover.pairs.size(); ++l) {
                double avg = average(members[m], cover.pairs[l].E, w);
                double dev = 0;
                for (int32_t c : cover.pairs[l].E)
                    dev += std::pow(std::fabs(members[m].v[static_cast<size_t>(c)] - avg), p) *
                           w.mass[static_cast<size_t>(c)];
                if (a) {
                    double al = a(static_cast<int>(e), static_cast<int>(m), static_cast<int>(l));
                    if (al < 0) fail_pre("run_abstract: negative a value");
                    if (std::pow(dev, 1.0 / p) > eps * al * (1 + 1e-12))
                        fail_hypothesis("run_abstract: per-set bound violated (member " +
                                        std::to_string(m) + ", set " + std::to_string(l) +
                                        ", eps " + std::to_string(eps) + ")");
                }
                sum += dev;
            }
            if (a) {
                double asum = 0;
                for (size_t l = 0; l < cover.pairs.size(); ++l)
                    asum += std::pow(a(static_cast<int>(e), static_cast<int>(m), static_cast<int>(l)), p);
                if (asum > C * (1 + 1e-12))
                    fail_hypothesis("run_abstract: sum of a^p exceeds C (member " +
                                    std::to_string(m) + ", eps " + std::to_string(eps) + ")");
            }
            if (sum > C * std::pow(eps, p) * (1 + 1e-9))
                fail_hypothesis("run_abstract: deviation sum exceeds C eps^p (member " +
                                std::to_string(m) + ", eps " + std::to_string(eps) + ")");
        }
        detail::LevelData lvl;
        lvl.eps = eps;
        lvl.cover = cover;
        levels.push_back(std::move(lvl));
    }

    std::vector<const ScalarField*> fs;
    for (const auto& m : members) fs.push_back(&m);
    auto chain = detail::abstract_chain(fs, w, p, N, q_list, C, declared_M_N, std::move(levels), all);
    rep.levels = std::move(chain.levels);
    rep.subsequence = std::move(chain.subsequence);
    rep.q_table = std::move(chain.q_table);
    rep.limit_index = rep.subsequence.back();
    rep.limit = members[static_cast<size_t>(rep.limit_index)];
    return rep;
}

// Abstract run that builds its own covers: the radius shrinks until the
// direct hypothesis sum passes for every member.
inline ExtractionReport run_abstract(const std::vector<ScalarField>& members,
                                     const MeasureField& w, double p, double N,
                                     const std::vector<double>& q_list, double C,
                                     double declared_M_N, const std::vector<double>& eps_schedule,
                                     const Quasimetric& d, const CoverBuildConfig& cfg = {}) {
    if (members.empty()) fail_pre("run_abstract: empty family");
    const auto& dom = *w.dom;
    double r0 = cfg.radius0;
    if (r0 <= 0) {
        r0 = d(dom, 0, dom.n_active() - 1) / 8.0;
        if (!(r0 > 0)) r0 = 1.0;
    }
    std::vector<CoverPlan> covers;
    for (double eps : eps_schedule) {
        CellSet K = compact_core(w, eps);
        double r = r0;
        bool accepted = false;
        for (int attempt = 0; attempt <= cfg.max_shrinks && !accepted; ++attempt, r *= cfg.shrink) {
            CoverPlan cover = build_cover(d, dom, K, r, cfg.c0, w, eps);
            if (cover.pairs.empty()) continue;
            bool ok = true;
            for (const auto& f : members) {
                double sum = 0;
                for (const auto& pr : cover.pairs) {
                    double avg = average(f, pr.E, w);
                    for (int32_t c : pr.E)
                        sum += std::pow(std::fabs(f.v[static_cast<size_t>(c)] - avg), p) *
                               w.mass[static_cast<size_t>(c)];
                }
                if (sum > C * std::pow(eps, p) * (1 + 1e-9)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                covers.push_back(std::move(cover));
                accepted = true;
            }
        }
        if (!accepted)
            fail_hypothesis("run_abstract: no radius satisfied the hypothesis sum at eps " +
                            std::to_string(eps));
    }
    return run_abstract(members, w, p, N, q_list, C, declared_M_N, eps_schedule, covers);
}

// --- local run (Omega' covered exactly, w(Omega) unconstrained) --------------

// The certificate takes the L^N_w norm over the union of all cover sets only;
// the pair norm is global in nu and mu. Conclusions live on Omega': L^q for
// q <= p always, and q < N when p < N.
inline ExtractionReport run_local(const Quasimetric& d, const FamilyS& family,
                                  const MeasureField& w, const MeasureField& nu,
                                  const MeasureField& mu, const QuadraticFormField& Q,
                                  const CellSet& omega_prime, int j_max,
                                  const CoverBuildConfig& cfg = {}) {
    if (family.members.empty()) fail_pre("run_local: empty family");
    if (!(family.p >= 1)) fail_pre("run_local: p must be >= 1");
    if (!(family.N > 1)) fail_pre("run_local: requires N > 1");
    if (j_max < 1) fail_pre("run_local: j_max must be >= 1");
    const double p = family.p;
    for (double q : family.q_list) {
        bool ok = (q >= 1) && (q <= p || (p < family.N && q < family.N));
        if (!ok) fail_pre("run_local: q must satisfy q <= p, or q < N when p < N");
    }

    ExtractionReport rep;
    rep.M = family.declared_M;
    if (omega_prime.empty()) {
        // nothing to conclude on an empty Omega'
        rep.subsequence.resize(family.members.size());
        std::iota(rep.subsequence.begin(), rep.subsequence.end(), 0);
        rep.limit_index = rep.subsequence.back();
        rep.limit = family.members.back().f;
        return rep;
    }

    const auto& dom = *w.dom;
    auto all = dom.all_cells();
    double r0 = cfg.radius0;
    if (r0 <= 0) {
        r0 = d(dom, 0, dom.n_active() - 1) / 8.0;
        if (!(r0 > 0)) r0 = 1.0;
    }

    std::vector<detail::LevelData> levels;
    for (int j = 1; j <= j_max; ++j) {
        double eps = 1.0 / j;
        double r = r0;
        bool accepted = false;
        for (int attempt = 0; attempt <= cfg.max_shrinks && !accepted; ++attempt, r *= cfg.shrink) {
            CoverPlan cover =
                build_cover(d, dom, omega_prime, r, cfg.c0, w, std::numeric_limits<double>::infinity());
            if (cover.pairs.empty()) continue;
            // hypothesis (i): Omega' is covered with zero w-deficit, cellwise
            {
                std::vector<char> covered(static_cast<size_t>(dom.n_active()), 0);
                for (const auto& pr : cover.pairs)
                    for (int32_t c : pr.E) covered[static_cast<size_t>(c)] = 1;
                for (int32_t c : omega_prime)
                    if (!covered[static_cast<size_t>(c)] && w.mass[static_cast<size_t>(c)] > 0)
                        fail_hypothesis("run_local: Omega' cell " + std::to_string(c) +
                                        " not covered");
            }
            double worst = 0;
            bool ok = true;
            for (const auto& pr : family.members) {
                for (const auto& prc : cover.pairs) {
                    double avg = average(pr.f, prc.E, w);
                    double num = 0;
                    for (int32_t c : prc.E)
                        num += std::pow(std::fabs(pr.f.v[static_cast<size_t>(c)] - avg), p) *
                               w.mass[static_cast<size_t>(c)];
                    num = std::pow(num, 1.0 / p);
                    double den = sobolev_norm(pr, p, nu, mu, Q, prc.F.cells);
                    double quot = den > 0 ? num / den
                                          : (num > 0 ? std::numeric_limits<double>::infinity() : 0.0);
                    worst = std::max(worst, quot);
                    if (num > eps * den * (1 + 1e-12)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            if (ok) {
                detail::LevelData lvl;
                lvl.eps = eps;
                lvl.cover = std::move(cover);
                lvl.worst_quotient = worst;
                levels.push_back(std::move(lvl));
                accepted = true;
            }
        }
        if (!accepted)
            fail_hypothesis("run_local: local Poincare hypothesis failed at eps 1/" +
                            std::to_string(j));
    }

    // (1.13)-style certificate: L^N over the union of all cover sets, pair
    // norm global
    CellSet union_all;
    {
        std::vector<char> mark(static_cast<size_t>(dom.n_active()), 0);
        for (const auto& lvl : levels)
            for (const auto& pr : lvl.cover.pairs)
                for (int32_t c : pr.E) mark[static_cast<size_t>(c)] = 1;
        for (size_t i = 0; i < mark.size(); ++i)
            if (mark[i]) union_all.push_back(static_cast<int32_t>(i));
    }
    double M_N_local = 0;
    for (size_t m = 0; m < family.members.size(); ++m) {
        const auto& pr = family.members[m];
        double nrm = lp_norm(pr.f, family.N, w, union_all) + sobolev_norm(pr, p, nu, mu, Q, all);
        M_N_local = std::max(M_N_local, lp_norm(pr.f, family.N, w, union_all));
        rep.M_measured = std::max(rep.M_measured, nrm);
        if (nrm > family.declared_M * (1 + 1e-12))
            fail_hypothesis("run_local: boundedness certificate violated by member " +
                            std::to_string(m));
    }

    int C1 = 0;
    for (const auto& lvl : levels) C1 = std::max(C1, lvl.cover.overlap_M);
    rep.C1 = C1;
    rep.C2 = std::pow(2.0, p) * C1;
    const double C_hyp = rep.C2 * std::pow(family.declared_M, p);

    std::vector<const ScalarField*> fs;
    for (const auto& m : family.members) fs.push_back(&m.f);

    // q-interpolation inside abstract_chain requires q < N; Holder rows for
    // q <= p are appended afterwards
    std::vector<double> interp_q;
    std::vector<double> holder_q;
    for (double q : family.q_list)
        (q < family.N && q > 1 ? interp_q : holder_q).push_back(q);

    auto chain = detail::abstract_chain(fs, w, p, family.N, interp_q, C_hyp, M_N_local,
                                        std::move(levels), omega_prime);
    rep.levels = std::move(chain.levels);
    rep.subsequence = std::move(chain.subsequence);
    rep.q_table = std::move(chain.q_table);

    const auto& fine = rep.levels.back();
    const double w_prime = w.on(omega_prime);
    const int len = static_cast<int>(rep.subsequence.size());
    for (double q : holder_q) {
        if (!(q <= p)) fail_pre("run_local: q > p requires q < N");
        QModulusRow row;
        row.q = q;
        row.lambda = 0;
        for (int a2 = fine.T_eps; a2 < len; ++a2) {
            for (int b2 = a2 + 1; b2 < len; ++b2) {
                const auto& fa = family.members[static_cast<size_t>(rep.subsequence[static_cast<size_t>(a2)])].f;
                const auto& fb = family.members[static_cast<size_t>(rep.subsequence[static_cast<size_t>(b2)])].f;
                row.modulus = std::max(row.modulus, detail::lq_norm_diff(fa, fb, q, w, omega_prime));
            }
        }
        row.bound = fine.pairwise_modulus *
                    (q == p ? 1.0 : std::pow(w_prime, 1.0 / q - 1.0 / p));
        if (row.modulus > row.bound * (1 + 1e-9) + 1e-300)
            fail_invariant("run_local: Holder transfer violated for q " + std::to_string(q));
        rep.q_table.push_back(row);
    }

    rep.limit_index = rep.subsequence.back();
    rep.limit = family.members[static_cast<size_t>(rep.limit_index)].f;
    return rep;
}

// --- quasimetric-space run (ball set function route) --------------------------

using BallSetFunction = std::function<double(int member, const Ball& B, const Ball& dilate)>;

// Greedy coloring of the dilated balls by intersection: balls in index
// order take the smallest color unused among earlier intersecting balls.
inline std::vector<int> color_by_intersection(const std::vector<Ball>& balls) {
    std::vector<int> color(balls.size(), -1);
    for (size_t i = 0; i < balls.size(); ++i) {
        std::vector<char> used;
        for (size_t j = 0; j < i; ++j) {
            if (cells_intersect(balls[i].cells, balls[j].cells)) {
                if (used.size() <= static_cast<size_t>(color[j])) used.resize(static_cast<size_t>(color[j]) + 1, 0);
                used[static_cast<size_t>(color[j])] = 1;
            }
        }
        int c = 0;
        while (static_cast<size_t>(c) < used.size() && used[static_cast<size_t>(c)]) ++c;
        color[i] = c;
    }
    return color;
}

// Run on bare L^N families in a quasimetric space: hypothesis
// ||f - f_{B,w}|| <= b(f,B) verified per cover ball, the b-sums verified on
// the disjoint classes of a greedy coloring of the dilates, extraction as in
// the abstract run with C = (number of classes). An optional radius profile
// a_star is tracked for the vanishing diagnostic.
struct QuasimetricRunResult {
    ExtractionReport report;
    std::vector<double> a_star_sup;  // per eps level, when a_star is given
    bool a_star_vanishing = true;
};

inline QuasimetricRunResult run_quasimetric(const Quasimetric& d,
                                            const std::vector<ScalarField>& members,
                                            const MeasureField& w, const BallSetFunction& b,
                                            double c0, double p, double N,
                                            const std::vector<double>& q_list,
                                            double declared_M_N,
                                            const std::vector<double>& eps_schedule,
                                            const CoverBuildConfig& cfg_in = {},
                                            const std::function<double(double)>& a_star = nullptr) {
    if (members.empty()) fail_pre("run_quasimetric: empty family");
    if (!(p >= 1)) fail_pre("run_quasimetric: p must be >= 1");
    if (!(N > 1)) fail_pre("run_quasimetric: requires N > 1");
    for (double q : q_list)
        if (!(q >= 1) || !(q < N))
            fail_pre("run_quasimetric: q_list entries must satisfy 1 <= q < N");
    const auto& dom = *w.dom;
    auto all = dom.all_cells();
    CoverBuildConfig cfg = cfg_in;
    cfg.c0 = c0;

    QuasimetricRunResult out;
    out.report.M = declared_M_N;
    for (size_t m = 0; m < members.size(); ++m) {
        double nrm = lp_norm(members[m], N, w, all);
        out.report.M_measured = std::max(out.report.M_measured, nrm);
        if (nrm > declared_M_N * (1 + 1e-12))
            fail_hypothesis("run_quasimetric: L^N certificate violated by member " +
                            std::to_string(m));
    }

    double r0 = cfg.radius0;
    if (r0 <= 0) {
        r0 = d(dom, 0, dom.n_active() - 1) / 8.0;
        if (!(r0 > 0)) r0 = 1.0;
    }

    int max_classes = 0;
    std::vector<detail::LevelData> levels;
    for (double eps : eps_schedule) {
        if (!(eps > 0)) fail_pre("run_quasimetric: eps must be positive");
        CellSet K = compact_core(w, eps);
        double r = r0;
        bool accepted = false;
        std::string witness;
        for (int attempt = 0; attempt <= cfg.max_shrinks && !accepted; ++attempt, r *= cfg.shrink) {
            CoverPlan cover = build_cover(d, dom, K, r, c0, w, eps);
            if (cover.pairs.empty()) continue;

            // the ball-function hypothesis on every cover ball
            bool ok = true;
            double worst = 0;
            for (size_t m = 0; m < members.size() && ok; ++m) {
                for (size_t l = 0; l < cover.pairs.size(); ++l) {
                    const auto& pr = cover.pairs[l];
                    Ball B{pr.center, pr.radius, pr.E};
                    double bval = b(static_cast<int>(m), B, pr.F);
                    if (bval < 0)
                        fail_pre("run_quasimetric: ball set function returned a negative value");
                    double avg = average(members[m], pr.E, w);
                    double dev = 0;
                    for (int32_t c : pr.E)
                        dev += std::pow(std::fabs(members[m].v[static_cast<size_t>(c)] - avg), p) *
                               w.mass[static_cast<size_t>(c)];
                    dev = std::pow(dev, 1.0 / p);
                    if (bval > 0) worst = std::max(worst, dev / bval);
                    if (dev > bval * (1 + 1e-12)) {
                        ok = false;
                        witness = "ball bound failed: member " + std::to_string(m) + ", ball " +
                                  std::to_string(l) + ", radius " + std::to_string(r);
                        break;
                    }
                }
            }
            if (!ok) continue;

            // b-sums on the disjoint classes of the dilate coloring; the
            // class count is capped by the bounded-intercept constant (how
            // many dilates any one dilate meets), not by the cellwise max
            std::vector<Ball> dilates;
            for (const auto& pr : cover.pairs) dilates.push_back(pr.F);
            auto colors = color_by_intersection(dilates);
            int classes = 0;
            for (int c : colors) classes = std::max(classes, c + 1);
            int max_intercept = 1;
            for (size_t i = 0; i < dilates.size(); ++i) {
                int meets = 1;
                for (size_t j = 0; j < dilates.size(); ++j)
                    if (j != i && cells_intersect(dilates[i].cells, dilates[j].cells)) ++meets;
                max_intercept = std::max(max_intercept, meets);
            }
            if (classes > max_intercept)
                fail_invariant("run_quasimetric: coloring exceeded the intercept bound");
            for (size_t m = 0; m < members.size() && ok; ++m) {
                std::vector<double> class_sum(static_cast<size_t>(classes), 0.0);
                for (size_t l = 0; l < cover.pairs.size(); ++l) {
                    const auto& pr = cover.pairs[l];
                    Ball B{pr.center, pr.radius, pr.E};
                    class_sum[static_cast<size_t>(colors[l])] +=
                        std::pow(b(static_cast<int>(m), B, pr.F), p);
                }
                for (double s : class_sum) {
                    if (s > std::pow(eps, p) * (1 + 1e-9)) {
                        ok = false;
                        witness = "disjoint-class b-sum " + std::to_string(s) + " exceeds eps^p at eps " +
                                  std::to_string(eps) + ", radius " + std::to_string(r);
                        break;
                    }
                }
            }
            if (!ok) continue;

            if (a_star) out.a_star_sup.push_back(a_star(r));
            max_classes = std::max(max_classes, classes);
            detail::LevelData lvl;
            lvl.eps = eps;
            lvl.cover = std::move(cover);
            lvl.worst_quotient = worst;
            levels.push_back(std::move(lvl));
            accepted = true;
        }
        if (!accepted) {
            std::string extra;
            if (a_star)
                extra = "; sup a_* did not vanish along the radius schedule (non-vanishing flagged)";
            fail_hypothesis("run_quasimetric: hypothesis failed at eps " + std::to_string(eps) +
                            (witness.empty() ? "" : " (" + witness + ")") + extra);
        }
    }

    if (a_star && out.a_star_sup.size() >= 2)
        out.a_star_vanishing = out.a_star_sup.back() < out.a_star_sup.front() * (1 - 1e-9);

    int C1 = 0;
    for (const auto& lvl : levels) C1 = std::max(C1, lvl.cover.overlap_M);
    out.report.C1 = C1;
    out.report.C2 = static_cast<double>(max_classes);

    std::vector<const ScalarField*> fs;
    for (const auto& m : members) fs.push_back(&m);
    auto chain = detail::abstract_chain(fs, w, p, N, q_list, static_cast<double>(max_classes),
                                        declared_M_N, std::move(levels), all);
    out.report.levels = std::move(chain.levels);
    out.report.subsequence = std::move(chain.subsequence);
    out.report.q_table = std::move(chain.q_table);
    out.report.limit_index = out.report.subsequence.back();
    out.report.limit = members[static_cast<size_t>(out.report.limit_index)];
    return out;
}

}  // namespace sobocomp
