#pragma once

#include <random>

#include "sobocomp/cover.hpp"
#include "sobocomp/forms.hpp"
#include "sobocomp/grid.hpp"
#include "sobocomp/quasimetric.hpp"

namespace th {

using namespace sobocomp;

inline DomainPtr unit_interval(int cells) {
    GridSpec spec;
    spec.dim = 1;
    spec.bounds[0] = {0.0, 1.0};
    spec.cells[0] = cells;
    return build_grid(spec);
}

inline DomainPtr unit_square(int cells, const std::string& mask = "") {
    GridSpec spec;
    spec.dim = 2;
    spec.bounds[0] = {0.0, 1.0};
    spec.bounds[1] = {0.0, 1.0};
    spec.cells = {cells, cells, 1};
    spec.mask = mask;
    return build_grid(spec);
}

inline ScalarField sample_scalar(const DomainPtr& dom, auto&& fn) {
    ScalarField f{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    for (int32_t a = 0; a < dom->n_active(); ++a) f.v[static_cast<size_t>(a)] = fn(dom->center(a));
    return f;
}

inline VectorField sample_vector(const DomainPtr& dom, auto&& fn) {
    VectorField g;
    g.dom = dom;
    for (int ax = 0; ax < dom->dim; ++ax)
        g.comp[static_cast<size_t>(ax)].assign(static_cast<size_t>(dom->n_active()), 0.0);
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        auto v = fn(dom->center(a));
        for (int ax = 0; ax < dom->dim; ++ax)
            g.comp[static_cast<size_t>(ax)][static_cast<size_t>(a)] = v[static_cast<size_t>(ax)];
    }
    return g;
}

inline ScalarField random_scalar(const DomainPtr& dom, uint64_t seed, double lo = -1, double hi = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField f{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    for (auto& x : f.v) x = u(rng);
    return f;
}

inline MeasureField random_measure(const DomainPtr& dom, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MeasureField m{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    for (auto& x : m.mass) x = u(rng) * dom->cell_volume;
    return m;
}

// Active ordinal of the cell whose center is nearest to x.
inline int32_t cell_near(const DomainPtr& dom, const std::array<double, 3>& x) {
    int32_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        auto c = dom->center(a);
        double d2 = 0;
        for (int ax = 0; ax < dom->dim; ++ax) {
            double t = c[static_cast<size_t>(ax)] - x[static_cast<size_t>(ax)];
            d2 += t * t;
        }
        if (d2 < bd) {
            bd = d2;
            best = a;
        }
    }
    return best;
}

}  // namespace th
