#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sobocomp/forms.hpp"

namespace sobocomp {

// Bounded-gradient decaying waves along the first axis:
// f_k = sin(2 pi k x1)/(2 pi k) with g = cos(2 pi k x1) e1, k = 1..count.
inline std::vector<SobolevPair> family_sine_decay(const DomainPtr& dom, int count) {
    std::vector<SobolevPair> fam;
    for (int k = 1; k <= count; ++k) {
        double om = 2.0 * M_PI * k;
        ScalarField f{dom, std::vector<double>(static_cast<size_t>(dom->n_active()))};
        VectorField g;
        g.dom = dom;
        for (int ax = 0; ax < dom->dim; ++ax)
            g.comp[static_cast<size_t>(ax)].assign(static_cast<size_t>(dom->n_active()), 0.0);
        for (int32_t a = 0; a < dom->n_active(); ++a) {
            double x = dom->center(a)[0];
            f.v[static_cast<size_t>(a)] = std::sin(om * x) / om;
            g.comp[0][static_cast<size_t>(a)] = std::cos(om * x);
        }
        fam.push_back({std::move(f), std::move(g), std::nullopt});
    }
    return fam;
}

// Unnormalized waves: f_k = sin(2 pi k x1), g = 2 pi k cos(2 pi k x1) e1; the
// gradient norms grow linearly in k.
inline std::vector<SobolevPair> family_sine(const DomainPtr& dom, int count) {
    std::vector<SobolevPair> fam;
    for (int k = 1; k <= count; ++k) {
        double om = 2.0 * M_PI * k;
        ScalarField f{dom, std::vector<double>(static_cast<size_t>(dom->n_active()))};
        VectorField g;
        g.dom = dom;
        for (int ax = 0; ax < dom->dim; ++ax)
            g.comp[static_cast<size_t>(ax)].assign(static_cast<size_t>(dom->n_active()), 0.0);
        for (int32_t a = 0; a < dom->n_active(); ++a) {
            double x = dom->center(a)[0];
            f.v[static_cast<size_t>(a)] = std::sin(om * x);
            g.comp[0][static_cast<size_t>(a)] = om * std::cos(om * x);
        }
        fam.push_back({std::move(f), std::move(g), std::nullopt});
    }
    return fam;
}

inline std::vector<SobolevPair> family_constants(const DomainPtr& dom, int count, double value = 1.0) {
    std::vector<SobolevPair> fam;
    for (int k = 0; k < count; ++k) {
        ScalarField f{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), value)};
        VectorField g;
        g.dom = dom;
        for (int ax = 0; ax < dom->dim; ++ax)
            g.comp[static_cast<size_t>(ax)].assign(static_cast<size_t>(dom->n_active()), 0.0);
        fam.push_back({std::move(f), std::move(g), std::nullopt});
    }
    return fam;
}

// C^1 bump (1 - t^2)^2 of given center and width along all axes, with the
// analytic gradient; support recorded as the cells where the bump is live.
inline SobolevPair make_bump(const DomainPtr& dom, const std::array<double, 3>& center,
                             double width, double amplitude = 1.0) {
    ScalarField f{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    VectorField g;
    g.dom = dom;
    for (int ax = 0; ax < dom->dim; ++ax)
        g.comp[static_cast<size_t>(ax)].assign(static_cast<size_t>(dom->n_active()), 0.0);
    CellSet support;
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        auto x = dom->center(a);
        double r2 = 0;
        for (int ax = 0; ax < dom->dim; ++ax) {
            double t = (x[static_cast<size_t>(ax)] - center[static_cast<size_t>(ax)]) / width;
            r2 += t * t;
        }
        if (r2 >= 1.0) continue;
        support.push_back(a);
        double u = 1.0 - r2;
        f.v[static_cast<size_t>(a)] = amplitude * u * u;
        for (int ax = 0; ax < dom->dim; ++ax) {
            auto i = static_cast<size_t>(ax);
            double t = (x[i] - center[i]) / width;
            g.comp[i][static_cast<size_t>(a)] = amplitude * (-4.0) * u * t / width;
        }
    }
    return {std::move(f), std::move(g), std::move(support)};
}

inline std::vector<SobolevPair> family_bumps(const DomainPtr& dom, int count, double width_lo,
                                             double width_hi, uint64_t /*unused*/ = 0) {
    std::vector<SobolevPair> fam;
    double mid_lo = 0.3, mid_hi = 0.7;
    for (int k = 0; k < count; ++k) {
        double t = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
        double width = width_lo * std::pow(width_hi / width_lo, t);
        std::array<double, 3> c{0.5, 0.5, 0.5};
        c[0] = mid_lo + (mid_hi - mid_lo) * t;
        fam.push_back(make_bump(dom, c, width));
    }
    return fam;
}

}  // namespace sobocomp
