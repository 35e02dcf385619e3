#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sobocomp/quasimetric.hpp"

namespace sobocomp {

// One (E, F) pair of a cover: E the working set, F the dilated ball the
// hypotheses are tested against.
struct CoverPair {
    int32_t center = 0;
    double radius = 0;  // radius of E
    CellSet E;
    Ball F;
    double wE = 0;
};

struct CoverPlan {
    double epsilon = std::numeric_limits<double>::infinity();
    double radius = 0;
    double c0 = 1;
    int overlap_M = 0;
    double coverage_deficit = 0;
    std::vector<CoverPair> pairs;

    CellSet union_of_E() const {
        std::vector<char> mark;
        size_t n = 0;
        for (const auto& p : pairs)
            for (int32_t c : p.E) n = std::max(n, static_cast<size_t>(c) + 1);
        mark.assign(n, 0);
        for (const auto& p : pairs)
            for (int32_t c : p.E) mark[static_cast<size_t>(c)] = 1;
        CellSet u;
        for (size_t i = 0; i < mark.size(); ++i)
            if (mark[i]) u.push_back(static_cast<int32_t>(i));
        return u;
    }
};

// Greedy largest-mass-first compact core: the smallest prefix (mass
// descending, ordinal ascending on ties) with w(Omega \ K) < eps.
inline CellSet compact_core(const MeasureField& w, double eps) {
    if (!(eps > 0)) fail_pre("compact_core: eps must be positive");
    const auto n = static_cast<int32_t>(w.mass.size());
    std::vector<int32_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
        return w.mass[static_cast<size_t>(a)] > w.mass[static_cast<size_t>(b)];
    });
    double remaining = w.total();
    CellSet K;
    for (int32_t c : order) {
        if (remaining < eps && !K.empty()) break;
        K.push_back(c);
        remaining -= w.mass[static_cast<size_t>(c)];
    }
    if (K.empty()) K.push_back(order.front());
    std::sort(K.begin(), K.end());
    return K;
}

namespace detail {

inline int max_overlap(const std::vector<CoverPair>& pairs, int32_t n_active) {
    std::vector<int> count(static_cast<size_t>(n_active), 0);
    for (const auto& p : pairs)
        for (int32_t c : p.F.cells) ++count[static_cast<size_t>(c)];
    int m = 0;
    for (int c : count) m = std::max(m, c);
    return m;
}

inline double deficit_against(const MeasureField& w, const std::vector<CoverPair>& pairs) {
    std::vector<char> covered(w.mass.size(), 0);
    for (const auto& p : pairs)
        for (int32_t c : p.E) covered[static_cast<size_t>(c)] = 1;
    double def = 0;
    for (size_t i = 0; i < w.mass.size(); ++i)
        if (!covered[i]) def += w.mass[i];
    return def;
}

}  // namespace detail

// Cover of K by balls of radius r with dilates of radius c0*r: candidates
// B_{r/gamma}(x) for every x in K, a maximal pairwise-disjoint subcollection
// selected in lexicographic center order, then E = B_r(y) and F = B_{c0 r}(y).
// Zero-w-mass E are dropped. The caller has arranged w(Omega \ K) < eps.
inline CoverPlan build_cover(const Quasimetric& d, const GridDomain& dom, const CellSet& K,
                             double r, double c0, const MeasureField& w, double eps) {
    if (K.empty()) fail_pre("build_cover: empty K");
    if (!(r > 0)) fail_pre("build_cover: radius must be positive");
    if (!(c0 >= 1)) fail_pre("build_cover: c0 must be >= 1");
    const double gamma = swallowing_gamma(d.kappa);

    std::vector<char> taken(static_cast<size_t>(dom.n_active()), 0);
    std::vector<int32_t> selected;
    for (int32_t x : K) {
        Ball seed = ball(d, x, r / gamma, dom);
        bool clean = true;
        for (int32_t c : seed.cells)
            if (taken[static_cast<size_t>(c)]) { clean = false; break; }
        if (!clean) continue;
        for (int32_t c : seed.cells) taken[static_cast<size_t>(c)] = 1;
        selected.push_back(x);
    }

    CoverPlan plan;
    plan.epsilon = eps;
    plan.radius = r;
    plan.c0 = c0;
    for (int32_t y : selected) {
        CoverPair p;
        p.center = y;
        p.radius = r;
        p.E = ball(d, y, r, dom).cells;
        p.F = ball(d, y, c0 * r, dom);
        p.wE = w.on(p.E);
        if (p.wE > 0) plan.pairs.push_back(std::move(p));
    }

    plan.overlap_M = detail::max_overlap(plan.pairs, dom.n_active());
    plan.coverage_deficit = detail::deficit_against(w, plan.pairs);

    // K must be swallowed by the selected r-balls; verify cellwise.
    {
        std::vector<char> covered(static_cast<size_t>(dom.n_active()), 0);
        for (const auto& p : plan.pairs)
            for (int32_t c : p.E) covered[static_cast<size_t>(c)] = 1;
        for (int32_t x : K) {
            if (!covered[static_cast<size_t>(x)] && w.mass[static_cast<size_t>(x)] > 0)
                fail_invariant("build_cover: K cell " + std::to_string(x) + " left uncovered");
        }
    }
    if (!(plan.coverage_deficit < eps))
        fail_invariant("build_cover: coverage deficit " + std::to_string(plan.coverage_deficit) +
                       " not below eps " + std::to_string(eps));
    return plan;
}

// Euclidean cover by tripled balls: maximal disjoint r/6-balls centered in K,
// tripled to radius r/2, with E = F. The 2-dilates (radius r) must stay
// inside the active set and the box.
inline CoverPlan euclid_cover_triples(const GridDomain& dom, const CellSet& K, double r,
                                      const MeasureField& w) {
    if (K.empty()) fail_pre("euclid_cover_triples: empty K");
    if (!(r > 0)) fail_pre("euclid_cover_triples: radius must be positive");
    Quasimetric d = Quasimetric::euclidean();

    std::vector<char> taken(static_cast<size_t>(dom.n_active()), 0);
    std::vector<int32_t> selected;
    for (int32_t x : K) {
        Ball seed = ball(d, x, r / 6.0, dom);
        bool clean = true;
        for (int32_t c : seed.cells)
            if (taken[static_cast<size_t>(c)]) { clean = false; break; }
        if (!clean) continue;
        for (int32_t c : seed.cells) taken[static_cast<size_t>(c)] = 1;
        selected.push_back(x);
    }

    CoverPlan plan;
    plan.radius = r / 2.0;
    plan.c0 = 1.0;
    for (int32_t y : selected) {
        // the 2-dilate B_r(y) must not escape the configured domain
        auto xc = dom.center(y);
        for (int ax = 0; ax < dom.dim; ++ax) {
            auto i = static_cast<size_t>(ax);
            if (xc[i] - dom.bounds[i][0] < r || dom.bounds[i][1] - xc[i] < r)
                fail_pre("euclid_cover_triples: 2-dilate escapes the domain box at center " +
                         std::to_string(y));
        }
        // every lattice cell inside the 2-dilate must be active
        auto cc = dom.lattice_coords(dom.full_of_active[static_cast<size_t>(y)]);
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int ax = 0; ax < dom.dim; ++ax) {
            auto i = static_cast<size_t>(ax);
            int span = static_cast<int>(std::ceil(r / dom.h[i])) + 1;
            lo[i] = std::max(0, cc[i] - span);
            hi[i] = std::min(dom.cells[i] - 1, cc[i] + span);
        }
        std::array<int, 3> c{0, 0, 0};
        for (int i0 = lo[0]; i0 <= hi[0]; ++i0) {
            c[0] = i0;
            for (int i1 = (dom.dim > 1 ? lo[1] : 0); i1 <= (dom.dim > 1 ? hi[1] : 0); ++i1) {
                c[1] = i1;
                for (int i2 = (dom.dim > 2 ? lo[2] : 0); i2 <= (dom.dim > 2 ? hi[2] : 0); ++i2) {
                    c[2] = i2;
                    auto xcand = dom.center_full(dom.full_index(c));
                    double d2 = 0;
                    for (int ax = 0; ax < dom.dim; ++ax) {
                        double t = xcand[static_cast<size_t>(ax)] - xc[static_cast<size_t>(ax)];
                        d2 += t * t;
                    }
                    if (d2 < r * r && dom.active_at(c) < 0)
                        fail_pre("euclid_cover_triples: 2-dilate escapes the active set at center " +
                                 std::to_string(y));
                }
            }
        }
        CoverPair p;
        p.center = y;
        p.radius = r / 2.0;
        p.F = ball(d, y, r / 2.0, dom);
        p.E = p.F.cells;
        p.wE = w.on(p.E);
        if (p.wE > 0) plan.pairs.push_back(std::move(p));
    }
    plan.overlap_M = detail::max_overlap(plan.pairs, dom.n_active());
    plan.coverage_deficit = detail::deficit_against(w, plan.pairs);

    std::vector<char> covered(static_cast<size_t>(dom.n_active()), 0);
    for (const auto& p : plan.pairs)
        for (int32_t c : p.E) covered[static_cast<size_t>(c)] = 1;
    for (int32_t x : K)
        if (!covered[static_cast<size_t>(x)] && w.mass[static_cast<size_t>(x)] > 0)
            fail_invariant("euclid_cover_triples: K cell " + std::to_string(x) + " left uncovered");
    return plan;
}

}  // namespace sobocomp
