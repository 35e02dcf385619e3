#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sobocomp/forms.hpp"
#include "sobocomp/quasimetric.hpp"

namespace sobocomp {

// Plateau cutoff on a d-ball: phi = 1 on B_gamma(y), 0 outside B_r(y),
// piecewise linear in d(y,.) across the ramp. The gradient is symbolic for
// the coordinate presets and a stencil fallback for tabulated metrics; the
// certificate is ||sqrtQ grad(phi)||_{L^s_mu}.
struct Cutoff {
    Ball outer;
    double gamma_inner = 0;
    ScalarField phi;
    VectorField grad_phi;
    double s = 0;
    double certificate = 0;
    bool certificate_finite = true;
};

namespace detail {

// d/dx of d(y, x) for the coordinate presets, evaluated at an active cell.
inline std::array<double, 3> metric_gradient(const Quasimetric& d, const GridDomain& dom,
                                             int32_t y, int32_t x) {
    auto xy = dom.center(y);
    auto xx = dom.center(x);
    std::array<double, 3> g{0, 0, 0};
    switch (d.kind) {
        case Quasimetric::Kind::Euclidean:
        case Quasimetric::Kind::Power: {
            double r2 = 0;
            for (int ax = 0; ax < dom.dim; ++ax) {
                double t = xx[static_cast<size_t>(ax)] - xy[static_cast<size_t>(ax)];
                r2 += t * t;
            }
            double r = std::sqrt(r2);
            if (r == 0) return g;
            double scale = d.kind == Quasimetric::Kind::Euclidean
                               ? 1.0
                               : d.beta * std::pow(r, d.beta - 1.0);
            for (int ax = 0; ax < dom.dim; ++ax) {
                auto i = static_cast<size_t>(ax);
                g[i] = scale * (xx[i] - xy[i]) / r;
            }
            return g;
        }
        case Quasimetric::Kind::Anisotropic: {
            for (int ax = 0; ax < dom.dim; ++ax) {
                auto i = static_cast<size_t>(ax);
                double t = xx[i] - xy[i];
                double b = d.axis_beta[i];
                if (t == 0) {
                    g[i] = 0;  // one-sided kink; measure-zero on grids
                } else {
                    g[i] = b * std::pow(std::fabs(t), b - 1.0) * (t > 0 ? 1.0 : -1.0);
                }
            }
            return g;
        }
        case Quasimetric::Kind::Tabulated:
            fail_pre("metric_gradient: tabulated metric has no symbolic gradient");
    }
    return g;
}

}  // namespace detail

inline Cutoff build_cutoff(const Quasimetric& d, const GridDomain& dom, const Ball& B_outer,
                           double gamma_inner, const QuadraticFormField& Q, const MeasureField& mu,
                           double s) {
    if (!(gamma_inner > 0 && gamma_inner < B_outer.radius))
        fail_pre("build_cutoff: inner radius must lie strictly inside the outer radius");
    if (Q.dom.get() != &dom) fail_pre("build_cutoff: form field lives on a different domain");
    const double r = B_outer.radius;
    const double ramp = r - gamma_inner;
    const int32_t y = B_outer.center;

    Cutoff c;
    c.outer = B_outer;
    c.gamma_inner = gamma_inner;
    c.s = s;

    auto n = static_cast<size_t>(dom.n_active());
    std::vector<double> phi(n, 0.0);
    VectorField grad;
    for (int ax = 0; ax < dom.dim; ++ax) grad.comp[static_cast<size_t>(ax)].assign(n, 0.0);

    const bool symbolic = d.kind != Quasimetric::Kind::Tabulated;
    for (int32_t a : B_outer.cells) {
        double t = d(dom, y, a);
        if (t <= gamma_inner) {
            phi[static_cast<size_t>(a)] = 1.0;
        } else if (t < r) {
            phi[static_cast<size_t>(a)] = (r - t) / ramp;
            if (symbolic) {
                auto mg = detail::metric_gradient(d, dom, y, a);
                for (int ax = 0; ax < dom.dim; ++ax)
                    grad.comp[static_cast<size_t>(ax)][static_cast<size_t>(a)] =
                        -mg[static_cast<size_t>(ax)] / ramp;
            }
        }
    }

    c.phi = ScalarField{Q.dom, std::move(phi)};
    grad.dom = Q.dom;
    if (!symbolic) grad = gradient(c.phi);
    c.grad_phi = std::move(grad);

    ScalarField mag = sqrtQ_magnitude(Q, c.grad_phi);
    if (std::isinf(s)) {
        double mx = 0;
        for (double v : mag.v) mx = std::max(mx, v);
        c.certificate = mx;
    } else {
        c.certificate = lp_norm(mag, s, mu, dom.all_cells());
    }
    c.certificate_finite = std::isfinite(c.certificate);
    return c;
}

// Partition of unity subordinate to the cutoff supports: psi_1 = phi_1 and
// psi_j = (1-phi_1)...(1-phi_{j-1}) phi_j, with gradients carried through the
// product rule on the symbolic ramp slopes.
struct CutoffFamily {
    std::vector<Cutoff> cutoffs;  // construction order
    std::vector<ScalarField> psi;
    std::vector<VectorField> grad_psi;

    void check_invariants(const CellSet& K) const {
        if (psi.empty()) fail_pre("cutoff family: empty");
        const auto& dom = *psi.front().dom;
        std::vector<double> sum(static_cast<size_t>(dom.n_active()), 0.0);
        for (size_t j = 0; j < psi.size(); ++j) {
            std::vector<char> in(static_cast<size_t>(dom.n_active()), 0);
            for (int32_t c : cutoffs[j].outer.cells) in[static_cast<size_t>(c)] = 1;
            for (int32_t a = 0; a < dom.n_active(); ++a) {
                double v = psi[j].v[static_cast<size_t>(a)];
                if (v < 0 || v > 1) fail_invariant("cutoff family: psi outside [0,1]");
                if (!in[static_cast<size_t>(a)] && v != 0)
                    fail_invariant("cutoff family: psi nonzero outside its ball");
                sum[static_cast<size_t>(a)] += v;
            }
        }
        for (int32_t a = 0; a < dom.n_active(); ++a)
            if (sum[static_cast<size_t>(a)] > 1 + 1e-12)
                fail_invariant("cutoff family: partition sum exceeds 1");
        for (int32_t c : K)
            if (std::fabs(sum[static_cast<size_t>(c)] - 1.0) > 1e-12)
                fail_invariant("cutoff family: partition sum != 1 on K at cell " + std::to_string(c));
    }
};

inline CutoffFamily partition_of_unity(const GridDomain& dom, const CellSet& K,
                                       std::vector<Cutoff> cutoffs) {
    if (cutoffs.empty()) fail_pre("partition_of_unity: no cutoffs");
    // the inner plateaus must jointly cover K
    {
        std::vector<char> covered(static_cast<size_t>(dom.n_active()), 0);
        for (const auto& c : cutoffs)
            for (int32_t a : c.outer.cells)
                if (c.phi.v[static_cast<size_t>(a)] == 1.0) covered[static_cast<size_t>(a)] = 1;
        for (int32_t x : K)
            if (!covered[static_cast<size_t>(x)])
                fail_pre("partition_of_unity: plateaus do not cover K (cell " + std::to_string(x) + ")");
    }

    CutoffFamily fam;
    const auto n = static_cast<size_t>(dom.n_active());
    std::vector<double> P(n, 1.0);  // running product of (1 - phi_i)
    std::vector<std::array<double, 3>> gradP(n, {0, 0, 0});
    for (auto& c : cutoffs) {
        ScalarField psi{c.phi.dom, std::vector<double>(n, 0.0)};
        VectorField gpsi;
        gpsi.dom = c.phi.dom;
        for (int ax = 0; ax < dom.dim; ++ax) gpsi.comp[static_cast<size_t>(ax)].assign(n, 0.0);

        for (size_t a = 0; a < n; ++a) {
            double ph = c.phi.v[a];
            psi.v[a] = P[a] * ph;
            for (int ax = 0; ax < dom.dim; ++ax) {
                auto i = static_cast<size_t>(ax);
                double gph = c.grad_phi.comp[i][a];
                gpsi.comp[i][a] = P[a] * gph + ph * gradP[a][i];
            }
            // update running product and its gradient
            for (int ax = 0; ax < dom.dim; ++ax) {
                auto i = static_cast<size_t>(ax);
                gradP[a][i] = gradP[a][i] * (1.0 - ph) - P[a] * c.grad_phi.comp[i][a];
            }
            P[a] *= (1.0 - ph);
        }
        fam.psi.push_back(std::move(psi));
        fam.grad_psi.push_back(std::move(gpsi));
    }
    fam.cutoffs = std::move(cutoffs);
    fam.check_invariants(K);
    return fam;
}

// C(Omega') = sum_j C(B_j) (1 + Cbar * C1(B_j)) with
// Cbar = max_j ||sqrtQ grad(psi_j)||_{L^s_mu(B_j)}.
inline double local_to_global_sobolev(const CellSet& omega_prime, const CutoffFamily& fam,
                                      const std::vector<double>& local_C,
                                      const std::vector<double>& C1_consts, double s,
                                      const QuadraticFormField& Q, const MeasureField& mu) {
    if (fam.psi.empty()) fail_pre("local_to_global_sobolev: empty family");
    if (local_C.size() != fam.psi.size() || C1_consts.size() != fam.psi.size())
        fail_pre("local_to_global_sobolev: constants must match the family size");
    const auto& dom = *fam.psi.front().dom;

    // sum psi = 1 on Omega'
    {
        std::vector<double> sum(static_cast<size_t>(dom.n_active()), 0.0);
        for (const auto& p : fam.psi)
            for (size_t a = 0; a < p.v.size(); ++a) sum[a] += p.v[a];
        for (int32_t c : omega_prime)
            if (std::fabs(sum[static_cast<size_t>(c)] - 1.0) > 1e-12)
                fail_pre("local_to_global_sobolev: partition does not sum to 1 on Omega'");
    }

    double cbar = 0;
    for (size_t j = 0; j < fam.psi.size(); ++j) {
        ScalarField mag = sqrtQ_magnitude(Q, fam.grad_psi[j]);
        double nrm;
        if (std::isinf(s)) {
            nrm = 0;
            for (int32_t c : fam.cutoffs[j].outer.cells)
                nrm = std::max(nrm, mag.v[static_cast<size_t>(c)]);
        } else {
            nrm = lp_norm(mag, s, mu, fam.cutoffs[j].outer.cells);
        }
        if (!std::isfinite(nrm))
            fail_pre("local_to_global_sobolev: infinite gradient norm at ball " + std::to_string(j));
        cbar = std::max(cbar, nrm);
    }

    double total = 0;
    for (size_t j = 0; j < fam.psi.size(); ++j) {
        if (!std::isfinite(local_C[j]) || !std::isfinite(C1_consts[j]))
            fail_pre("local_to_global_sobolev: infinite ingredient at ball " + std::to_string(j));
        total += local_C[j] * (1.0 + cbar * C1_consts[j]);
    }
    return total;
}

}  // namespace sobocomp
