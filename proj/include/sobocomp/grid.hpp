#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sobocomp/errors.hpp"
#include "sobocomp/expr.hpp"

namespace sobocomp {

using CellSet = std::vector<int32_t>;  // active-cell ordinals, sorted ascending

// How a grid is built: box bounds, cells per axis, optional mask expression
// (nonzero at a cell center means active). When complement_includes_bounds
// is false and the mask keeps every cell, the complement is empty and
// distance queries are rejected.
struct GridSpec {
    int dim = 1;
    std::array<std::array<double, 2>, 3> bounds{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
    std::array<int, 3> cells{1, 1, 1};
    std::string mask;  // empty = all cells active
    bool complement_includes_bounds = true;
};

// Uniform Cartesian grid over a box in R^n, n in {1,2,3}, with an active-cell
// mask. Cells are addressed two ways: full lattice index (row-major) and
// active ordinal (dense). All fields live on active ordinals.
class GridDomain {
public:
    int dim = 1;
    std::array<std::array<double, 2>, 3> bounds{};
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> h{1, 1, 1};
    double cell_volume = 1;
    bool complement_includes_bounds = true;

    std::vector<int32_t> active_of_full;  // full index -> active ordinal, -1 if inactive
    std::vector<int32_t> full_of_active;  // active ordinal -> full index

    int64_t n_full() const { return static_cast<int64_t>(active_of_full.size()); }
    int32_t n_active() const { return static_cast<int32_t>(full_of_active.size()); }

    std::array<int, 3> lattice_coords(int32_t full) const {
        std::array<int, 3> c{0, 0, 0};
        int32_t rem = full;
        for (int ax = dim - 1; ax >= 0; --ax) {
            c[static_cast<size_t>(ax)] = rem % cells[static_cast<size_t>(ax)];
            rem /= cells[static_cast<size_t>(ax)];
        }
        return c;
    }

    int32_t full_index(const std::array<int, 3>& c) const {
        int32_t idx = 0;
        for (int ax = 0; ax < dim; ++ax) idx = idx * cells[static_cast<size_t>(ax)] + c[static_cast<size_t>(ax)];
        return idx;
    }

    std::array<double, 3> center_full(int32_t full) const {
        auto c = lattice_coords(full);
        std::array<double, 3> x{0, 0, 0};
        for (int ax = 0; ax < dim; ++ax)
            x[static_cast<size_t>(ax)] =
                bounds[static_cast<size_t>(ax)][0] + (c[static_cast<size_t>(ax)] + 0.5) * h[static_cast<size_t>(ax)];
        return x;
    }

    std::array<double, 3> center(int32_t active) const { return center_full(full_of_active[static_cast<size_t>(active)]); }

    // Active ordinal of the lattice cell at coords, or -1.
    int32_t active_at(const std::array<int, 3>& c) const {
        for (int ax = 0; ax < dim; ++ax) {
            if (c[static_cast<size_t>(ax)] < 0 || c[static_cast<size_t>(ax)] >= cells[static_cast<size_t>(ax)]) return -1;
        }
        return active_of_full[static_cast<size_t>(full_index(c))];
    }

    bool has_inactive() const { return n_full() != n_active(); }

    CellSet all_cells() const {
        CellSet s(static_cast<size_t>(n_active()));
        std::iota(s.begin(), s.end(), 0);
        return s;
    }
};

using DomainPtr = std::shared_ptr<const GridDomain>;

inline DomainPtr build_grid(const GridSpec& spec) {
    if (spec.dim < 1 || spec.dim > 3) fail_config("build_grid: dim must be 1, 2 or 3");
    auto dom = std::make_shared<GridDomain>();
    dom->dim = spec.dim;
    dom->bounds = spec.bounds;
    dom->cells = spec.cells;
    dom->complement_includes_bounds = spec.complement_includes_bounds;
    dom->cell_volume = 1.0;
    int64_t nfull = 1;
    for (int ax = 0; ax < spec.dim; ++ax) {
        auto a = static_cast<size_t>(ax);
        if (spec.cells[a] <= 0) fail_config("build_grid: cells per axis must be positive");
        if (!(spec.bounds[a][0] < spec.bounds[a][1])) fail_config("build_grid: degenerate bounds");
        dom->h[a] = (spec.bounds[a][1] - spec.bounds[a][0]) / spec.cells[a];
        dom->cell_volume *= dom->h[a];
        nfull *= spec.cells[a];
    }
    std::optional<Expr> mask;
    if (!spec.mask.empty()) mask = Expr::parse(spec.mask);

    dom->active_of_full.assign(static_cast<size_t>(nfull), -1);
    for (int32_t full = 0; full < nfull; ++full) {
        bool active = true;
        if (mask) {
            double v = mask->eval(dom->center_full(full));
            if (!std::isfinite(v)) fail_config("build_grid: mask not evaluable at a cell center");
            active = v != 0.0;
        }
        if (active) {
            dom->active_of_full[static_cast<size_t>(full)] = static_cast<int32_t>(dom->full_of_active.size());
            dom->full_of_active.push_back(full);
        }
    }
    if (dom->full_of_active.empty()) fail_config("build_grid: empty active set");
    return dom;
}

// Per-cell masses, density sample times cell volume; m(E) is a plain sum.
struct MeasureField {
    DomainPtr dom;
    std::vector<double> mass;

    double total() const {
        double t = 0;
        for (double m : mass) t += m;
        return t;
    }

    double on(std::span<const int32_t> cells) const {
        double t = 0;
        for (int32_t c : cells) t += mass[static_cast<size_t>(c)];
        return t;
    }

    void validate() const {
        if (!dom || mass.size() != static_cast<size_t>(dom->n_active()))
            fail_pre("measure: size mismatch with domain");
        for (double m : mass) {
            if (!std::isfinite(m) || m < 0) fail_pre("measure: masses must be finite and >= 0");
        }
    }
};

struct ScalarField {
    DomainPtr dom;
    std::vector<double> v;

    void validate() const {
        if (!dom || v.size() != static_cast<size_t>(dom->n_active()))
            fail_pre("scalar field: size mismatch with domain");
        for (double x : v)
            if (!std::isfinite(x)) fail_pre("scalar field: non-finite entry");
    }
};

struct VectorField {
    DomainPtr dom;
    std::array<std::vector<double>, 3> comp;

    void validate() const {
        if (!dom) fail_pre("vector field: missing domain");
        for (int ax = 0; ax < dom->dim; ++ax) {
            const auto& c = comp[static_cast<size_t>(ax)];
            if (c.size() != static_cast<size_t>(dom->n_active()))
                fail_pre("vector field: size mismatch with domain");
            for (double x : c)
                if (!std::isfinite(x)) fail_pre("vector field: non-finite entry");
        }
    }
};

inline MeasureField lebesgue_measure(const DomainPtr& dom) {
    MeasureField m{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), dom->cell_volume)};
    return m;
}

inline MeasureField measure_from_density(const DomainPtr& dom, const Expr& density) {
    MeasureField m{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        double d = density.eval(dom->center(a));
        if (!std::isfinite(d) || d < 0) fail_config("measure: density must be finite and >= 0 at cell centers");
        m.mass[static_cast<size_t>(a)] = d * dom->cell_volume;
    }
    return m;
}

// Euclidean distance from each active cell center to the complement of the
// active set: nearest inactive cell center and, when the box boundary counts
// as complement, the nearest box face.
inline ScalarField distance_to_complement(const DomainPtr& dom) {
    const bool faces = dom->complement_includes_bounds;
    if (!faces && !dom->has_inactive())
        fail_pre("distance_to_complement: complement is empty (unsupported configuration)");

    std::vector<std::array<double, 3>> inactive_centers;
    if (dom->has_inactive()) {
        for (int32_t full = 0; full < dom->n_full(); ++full)
            if (dom->active_of_full[static_cast<size_t>(full)] < 0)
                inactive_centers.push_back(dom->center_full(full));
    }

    ScalarField rho{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        auto x = dom->center(a);
        double best = std::numeric_limits<double>::infinity();
        if (faces) {
            for (int ax = 0; ax < dom->dim; ++ax) {
                auto i = static_cast<size_t>(ax);
                best = std::min(best, x[i] - dom->bounds[i][0]);
                best = std::min(best, dom->bounds[i][1] - x[i]);
            }
        }
        for (const auto& c : inactive_centers) {
            double d2 = 0;
            for (int ax = 0; ax < dom->dim; ++ax) {
                double t = x[static_cast<size_t>(ax)] - c[static_cast<size_t>(ax)];
                d2 += t * t;
            }
            best = std::min(best, std::sqrt(d2));
        }
        if (!(best > 0)) fail_invariant("distance_to_complement: nonpositive distance at an active cell");
        rho.v[static_cast<size_t>(a)] = best;
    }
    return rho;
}

// dw = rho^alpha dx realized as cell masses; alpha = 0 reproduces Lebesgue
// masses exactly.
inline MeasureField power_weight(const ScalarField& rho, double alpha) {
    rho.validate();
    const auto& dom = rho.dom;
    MeasureField m{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        double r = rho.v[static_cast<size_t>(a)];
        if (r < 0) fail_pre("power_weight: negative rho");
        if (r == 0 && alpha < 0) fail_pre("power_weight: singular weight (rho = 0 with alpha < 0)");
        double density = alpha == 0.0 ? 1.0 : std::pow(r, alpha);
        m.mass[static_cast<size_t>(a)] = density * dom->cell_volume;
    }
    return m;
}

// (sum_E |f|^p mass)^(1/p); p = inf is the max of |f| over E.
inline double lp_norm(const ScalarField& f, double p, const MeasureField& m,
                      std::span<const int32_t> E) {
    if (!(p >= 1)) fail_pre("lp_norm: p must be >= 1 (or infinity)");
    if (std::isinf(p)) {
        double mx = 0;
        for (int32_t c : E) mx = std::max(mx, std::fabs(f.v[static_cast<size_t>(c)]));
        return mx;
    }
    double s = 0;
    if (p == 1.0) {
        for (int32_t c : E) s += std::fabs(f.v[static_cast<size_t>(c)]) * m.mass[static_cast<size_t>(c)];
        return s;
    }
    if (p == 2.0) {
        for (int32_t c : E) {
            double x = f.v[static_cast<size_t>(c)];
            s += x * x * m.mass[static_cast<size_t>(c)];
        }
        return std::sqrt(s);
    }
    for (int32_t c : E) s += std::pow(std::fabs(f.v[static_cast<size_t>(c)]), p) * m.mass[static_cast<size_t>(c)];
    return std::pow(s, 1.0 / p);
}

// Mass-weighted mean of f over E; zero-measure E is the caller's contract
// violation (such cells must have been dropped).
inline double average(const ScalarField& f, std::span<const int32_t> E, const MeasureField& m) {
    double mass = 0, acc = 0;
    for (int32_t c : E) {
        mass += m.mass[static_cast<size_t>(c)];
        acc += f.v[static_cast<size_t>(c)] * m.mass[static_cast<size_t>(c)];
    }
    if (!(mass > 0)) fail_pre("average: zero-measure set");
    return acc / mass;
}

}  // namespace sobocomp
