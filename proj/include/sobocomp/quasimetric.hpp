#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sobocomp/grid.hpp"

namespace sobocomp {

// Symmetric quasimetric presets over cell centers. The anisotropic kind is
// sum_i |dx_i|^beta_i; exponents below 1 keep kappa = 1, exponents above 1
// raise it to 2^(beta-1). Tabulated metrics carry an explicit matrix over
// active ordinals and a declared kappa.
struct Quasimetric {
    enum class Kind { Euclidean, Power, Anisotropic, Tabulated };

    Kind kind = Kind::Euclidean;
    double beta = 1.0;                       // Power: d = |x-y|^beta
    std::array<double, 3> axis_beta{1, 1, 1};  // Anisotropic
    double kappa = 1.0;
    std::shared_ptr<const std::vector<double>> table;  // Tabulated: n_active^2 row-major

    static Quasimetric euclidean() { return Quasimetric{}; }

    static Quasimetric power(double beta) {
        if (!(beta > 0)) fail_config("quasimetric: power exponent must be positive");
        Quasimetric q;
        q.kind = Kind::Power;
        q.beta = beta;
        q.kappa = beta <= 1 ? 1.0 : std::pow(2.0, beta - 1.0);
        return q;
    }

    static Quasimetric anisotropic(const std::array<double, 3>& betas, int dim) {
        Quasimetric q;
        q.kind = Kind::Anisotropic;
        q.axis_beta = betas;
        double bmax = 1.0;
        for (int ax = 0; ax < dim; ++ax) {
            if (!(betas[static_cast<size_t>(ax)] > 0)) fail_config("quasimetric: axis exponent must be positive");
            bmax = std::max(bmax, betas[static_cast<size_t>(ax)]);
        }
        q.kappa = bmax <= 1 ? 1.0 : std::pow(2.0, bmax - 1.0);
        return q;
    }

    static Quasimetric tabulated(std::vector<double> matrix, double declared_kappa) {
        Quasimetric q;
        q.kind = Kind::Tabulated;
        q.kappa = declared_kappa;
        q.table = std::make_shared<const std::vector<double>>(std::move(matrix));
        return q;
    }

    double operator()(const GridDomain& dom, int32_t a, int32_t b) const {
        if (kind == Kind::Tabulated) {
            auto n = static_cast<size_t>(dom.n_active());
            if (!table || table->size() != n * n) fail_pre("quasimetric: table size mismatch");
            return (*table)[static_cast<size_t>(a) * n + static_cast<size_t>(b)];
        }
        auto xa = dom.center(a);
        auto xb = dom.center(b);
        if (kind == Kind::Anisotropic) {
            double d = 0;
            for (int ax = 0; ax < dom.dim; ++ax) {
                auto i = static_cast<size_t>(ax);
                d += std::pow(std::fabs(xa[i] - xb[i]), axis_beta[i]);
            }
            return d;
        }
        double d2 = 0;
        for (int ax = 0; ax < dom.dim; ++ax) {
            double t = xa[static_cast<size_t>(ax)] - xb[static_cast<size_t>(ax)];
            d2 += t * t;
        }
        double d = std::sqrt(d2);
        return kind == Kind::Power ? std::pow(d, beta) : d;
    }

    // Distance from an active cell to the nearest box face, measured in this
    // metric. Tabulated metrics cannot reach off-grid points.
    double to_box_faces(const GridDomain& dom, int32_t a) const {
        if (kind == Kind::Tabulated)
            fail_pre("quasimetric: tabulated metric cannot measure distance to box faces");
        auto x = dom.center(a);
        double best = std::numeric_limits<double>::infinity();
        for (int ax = 0; ax < dom.dim; ++ax) {
            auto i = static_cast<size_t>(ax);
            double gap = std::min(x[i] - dom.bounds[i][0], dom.bounds[i][1] - x[i]);
            double d;
            switch (kind) {
                case Kind::Euclidean: d = gap; break;
                case Kind::Power: d = std::pow(gap, beta); break;
                case Kind::Anisotropic: d = std::pow(gap, axis_beta[i]); break;
                default: d = gap; break;
            }
            best = std::min(best, d);
        }
        return best;
    }

    // Per-axis center-distance cap implied by d(x,y) < r, used to restrict
    // ball scans to a lattice box. Infinity when no cap is available.
    double axis_reach(int ax, double r) const {
        switch (kind) {
            case Kind::Euclidean: return r;
            case Kind::Power: return std::pow(r, 1.0 / beta);
            case Kind::Anisotropic: return std::pow(r, 1.0 / axis_beta[static_cast<size_t>(ax)]);
            case Kind::Tabulated: return std::numeric_limits<double>::infinity();
        }
        return std::numeric_limits<double>::infinity();
    }
};

// d-ball over cell centers: strict sublevel set, cells sorted ascending.
struct Ball {
    int32_t center = 0;
    double radius = 0;
    CellSet cells;
};

inline Ball ball(const Quasimetric& d, int32_t center, double r, const GridDomain& dom) {
    if (!(r > 0)) fail_pre("ball: radius must be positive");
    Ball b;
    b.center = center;
    b.radius = r;
    bool boxed = true;
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int ax = 0; ax < dom.dim; ++ax) {
        double reach = d.axis_reach(ax, r);
        if (!std::isfinite(reach)) {
            boxed = false;
            break;
        }
        auto i = static_cast<size_t>(ax);
        auto cc = dom.lattice_coords(dom.full_of_active[static_cast<size_t>(center)]);
        int span = static_cast<int>(std::ceil(reach / dom.h[i])) + 1;
        lo[i] = std::max(0, cc[i] - span);
        hi[i] = std::min(dom.cells[i] - 1, cc[i] + span);
    }
    if (boxed) {
        std::array<int, 3> c{0, 0, 0};
        for (int i0 = lo[0]; i0 <= hi[0]; ++i0) {
            c[0] = i0;
            for (int i1 = (dom.dim > 1 ? lo[1] : 0); i1 <= (dom.dim > 1 ? hi[1] : 0); ++i1) {
                c[1] = i1;
                for (int i2 = (dom.dim > 2 ? lo[2] : 0); i2 <= (dom.dim > 2 ? hi[2] : 0); ++i2) {
                    c[2] = i2;
                    int32_t a = dom.active_at(c);
                    if (a >= 0 && d(dom, center, a) < r) b.cells.push_back(a);
                }
            }
        }
        std::sort(b.cells.begin(), b.cells.end());
    } else {
        for (int32_t a = 0; a < dom.n_active(); ++a)
            if (d(dom, center, a) < r) b.cells.push_back(a);
    }
    if (!std::binary_search(b.cells.begin(), b.cells.end(), center))
        fail_invariant("ball: center cell not contained in its own ball");
    return b;
}

struct QuasimetricCheck {
    double kappa_estimate = 0;
    long long violations = 0;
};

// Samples random triples; returns the worst triangle ratio and the count
// exceeding the declared kappa beyond tolerance. Asymmetry or d(x,x) != 0 on
// a sampled pair aborts with the witness.
inline QuasimetricCheck verify_quasimetric(const Quasimetric& d, const GridDomain& dom,
                                           long long trials, uint64_t seed = 20240601) {
    if (trials < 1) fail_pre("verify_quasimetric: trials must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int32_t> pick(0, dom.n_active() - 1);
    const double tol = 1e-9;
    QuasimetricCheck out;
    for (long long t = 0; t < trials; ++t) {
        int32_t x = pick(rng), y = pick(rng), z = pick(rng);
        double dxy = d(dom, x, y), dyx = d(dom, y, x);
        if (dxy != dyx)
            fail_pre("verify_quasimetric: asymmetry witness at cells (" + std::to_string(x) + "," +
                     std::to_string(y) + ")");
        if (d(dom, x, x) != 0.0)
            fail_pre("verify_quasimetric: d(x,x) != 0 witness at cell " + std::to_string(x));
        if ((dxy == 0.0) != (x == y))
            fail_pre("verify_quasimetric: separation axiom witness at cells (" + std::to_string(x) +
                     "," + std::to_string(y) + ")");
        double den = d(dom, x, z) + d(dom, z, y);
        if (den <= 0) continue;
        double ratio = dxy / den;
        out.kappa_estimate = std::max(out.kappa_estimate, ratio);
        if (ratio > d.kappa + tol) ++out.violations;
    }
    return out;
}

// gamma = kappa + 2*kappa^2: an intersecting smaller ball is swallowed by
// the gamma-dilate of the larger one.
inline double swallowing_gamma(double kappa) {
    if (!(kappa >= 1)) fail_pre("swallowing_gamma: kappa must be >= 1");
    return kappa + 2.0 * kappa * kappa;
}

inline bool cells_intersect(const CellSet& a, const CellSet& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else return true;
    }
    return false;
}

inline bool cells_subset(const CellSet& a, const CellSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Subset test against an explicit dilation factor; the public contract pins
// gamma to swallowing_gamma(kappa). Membership in the dilate is evaluated
// cell by cell, which is the same set inclusion without materializing it.
inline bool check_swallow_with_gamma(const Quasimetric& d, const Ball& b1, const Ball& b2,
                                     const GridDomain& dom, double gamma) {
    if (!(b1.radius <= b2.radius)) fail_pre("check_swallow: requires r1 <= r2");
    if (!cells_intersect(b1.cells, b2.cells)) fail_pre("check_swallow: balls are disjoint");
    const double reach = gamma * b2.radius;
    for (int32_t c : b1.cells)
        if (!(d(dom, b2.center, c) < reach)) return false;
    return true;
}

inline bool check_swallow(const Quasimetric& d, const Ball& b1, const Ball& b2, const GridDomain& dom) {
    return check_swallow_with_gamma(d, b1, b2, dom, swallowing_gamma(d.kappa));
}

// Empirical lower bound for the geometric doubling count: greedy packing of
// disjoint r'-balls inside B_r(x) over sampled centers x in K.
inline int doubling_probe(const Quasimetric& d, const GridDomain& dom, const CellSet& K, double r,
                          double r_prime, long long trials, uint64_t seed = 20240601) {
    if (!(r_prime > 0 && r_prime <= r)) fail_pre("doubling_probe: requires 0 < r' <= r");
    if (K.empty()) fail_pre("doubling_probe: empty center set");
    std::vector<int32_t> centers;
    if (static_cast<long long>(K.size()) <= trials) {
        centers.assign(K.begin(), K.end());
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<size_t> pick(0, K.size() - 1);
        for (long long t = 0; t < trials; ++t) centers.push_back(K[pick(rng)]);
    }
    int best = 0;
    for (int32_t x : centers) {
        Ball big = ball(d, x, r, dom);
        std::vector<char> used(static_cast<size_t>(dom.n_active()), 0);
        int count = 0;
        for (int32_t y : big.cells) {
            Ball small = ball(d, y, r_prime, dom);
            if (!cells_subset(small.cells, big.cells)) continue;
            bool clean = true;
            for (int32_t c : small.cells)
                if (used[static_cast<size_t>(c)]) { clean = false; break; }
            if (!clean) continue;
            for (int32_t c : small.cells) used[static_cast<size_t>(c)] = 1;
            ++count;
        }
        best = std::max(best, count);
    }
    return best;
}

// d(x, complement)/(2*kappa); the ball of this radius stays inside the
// active set.
inline double inner_radius(const Quasimetric& d, int32_t x, const GridDomain& dom) {
    bool faces = dom.complement_includes_bounds && d.kind != Quasimetric::Kind::Tabulated;
    if (!faces && !dom.has_inactive())
        fail_pre("inner_radius: complement is empty (unsupported configuration)");
    double best = std::numeric_limits<double>::infinity();
    if (faces) best = d.to_box_faces(dom, x);
    if (dom.has_inactive()) {
        if (d.kind == Quasimetric::Kind::Tabulated)
            fail_pre("inner_radius: tabulated metric has no off-grid distances");
        auto xc = dom.center(x);
        for (int32_t full = 0; full < dom.n_full(); ++full) {
            if (dom.active_of_full[static_cast<size_t>(full)] >= 0) continue;
            auto yc = dom.center_full(full);
            double v;
            if (d.kind == Quasimetric::Kind::Anisotropic) {
                v = 0;
                for (int ax = 0; ax < dom.dim; ++ax) {
                    auto i = static_cast<size_t>(ax);
                    v += std::pow(std::fabs(xc[i] - yc[i]), d.axis_beta[i]);
                }
            } else {
                double d2 = 0;
                for (int ax = 0; ax < dom.dim; ++ax) {
                    double t = xc[static_cast<size_t>(ax)] - yc[static_cast<size_t>(ax)];
                    d2 += t * t;
                }
                v = std::sqrt(d2);
                if (d.kind == Quasimetric::Kind::Power) v = std::pow(v, d.beta);
            }
            best = std::min(best, v);
        }
    }
    return best / (2.0 * d.kappa);
}

}  // namespace sobocomp
