#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sobocomp/expr.hpp"
#include "sobocomp/grid.hpp"

namespace sobocomp {

namespace detail {

// Jacobi eigenvalue sweep for small symmetric matrices; returns the smallest
// eigenvalue. n <= 3 in the form fields, larger n only in test oracles.
inline double min_eigenvalue_sym(std::vector<double> a, int n) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[static_cast<size_t>(i * n + j)] * a[static_cast<size_t>(i * n + j)];
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[static_cast<size_t>(p * n + q)];
                if (std::fabs(apq) < 1e-300) continue;
                double app = a[static_cast<size_t>(p * n + p)];
                double aqq = a[static_cast<size_t>(q * n + q)];
                double theta = 0.5 * std::atan2(2 * apq, aqq - app);
                double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    double akp = a[static_cast<size_t>(k * n + p)];
                    double akq = a[static_cast<size_t>(k * n + q)];
                    a[static_cast<size_t>(k * n + p)] = c * akp - s * akq;
                    a[static_cast<size_t>(k * n + q)] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[static_cast<size_t>(p * n + k)];
                    double aqk = a[static_cast<size_t>(q * n + k)];
                    a[static_cast<size_t>(p * n + k)] = c * apk - s * aqk;
                    a[static_cast<size_t>(q * n + k)] = s * apk + c * aqk;
                }
            }
        }
    }
    double mn = a[0];
    for (int i = 1; i < n; ++i) mn = std::min(mn, a[static_cast<size_t>(i * n + i)]);
    return mn;
}

}  // namespace detail

// Per-cell symmetric nonnegative matrix Q(x); symmetrized at load, PSD up to
// -1e-12 on the smallest eigenvalue.
struct QuadraticFormField {
    DomainPtr dom;
    std::vector<double> m;  // n_active * dim * dim, row-major per cell

    double at(int32_t cell, int i, int j) const {
        int dim = dom->dim;
        return m[static_cast<size_t>(cell) * static_cast<size_t>(dim * dim) +
                 static_cast<size_t>(i * dim + j)];
    }

    double quad(int32_t cell, const std::array<double, 3>& g) const {
        int dim = dom->dim;
        double s = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += g[static_cast<size_t>(i)] * at(cell, i, j) * g[static_cast<size_t>(j)];
        return s;
    }

    void symmetrize_and_check() {
        int dim = dom->dim;
        for (int32_t c = 0; c < dom->n_active(); ++c) {
            size_t base = static_cast<size_t>(c) * static_cast<size_t>(dim * dim);
            std::vector<double> cellm(static_cast<size_t>(dim * dim));
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    double avg = 0.5 * (m[base + static_cast<size_t>(i * dim + j)] +
                                        m[base + static_cast<size_t>(j * dim + i)]);
                    cellm[static_cast<size_t>(i * dim + j)] = avg;
                }
            for (size_t k = 0; k < cellm.size(); ++k) m[base + k] = cellm[k];
            double mn = detail::min_eigenvalue_sym(cellm, dim);
            if (mn < -1e-12)
                fail_pre("quadratic form: PSD violation at cell " + std::to_string(c) +
                         " (min eigenvalue " + std::to_string(mn) + ")");
        }
    }

    static QuadraticFormField identity(const DomainPtr& dom) {
        int dim = dom->dim;
        QuadraticFormField q{dom, std::vector<double>(
            static_cast<size_t>(dom->n_active()) * static_cast<size_t>(dim * dim), 0.0)};
        for (int32_t c = 0; c < dom->n_active(); ++c)
            for (int i = 0; i < dim; ++i)
                q.m[static_cast<size_t>(c) * static_cast<size_t>(dim * dim) + static_cast<size_t>(i * dim + i)] = 1.0;
        return q;
    }

    // diag(1, x1^2): degenerate along the second axis on the line x1 = 0.
    static QuadraticFormField grushin(const DomainPtr& dom) {
        if (dom->dim < 2) fail_config("grushin form requires dim >= 2");
        QuadraticFormField q = identity(dom);
        int dim = dom->dim;
        for (int32_t c = 0; c < dom->n_active(); ++c) {
            double x1 = dom->center(c)[0];
            q.m[static_cast<size_t>(c) * static_cast<size_t>(dim * dim) + static_cast<size_t>(1 * dim + 1)] = x1 * x1;
        }
        return q;
    }

    static QuadraticFormField diag_expr(const DomainPtr& dom, const std::vector<std::string>& entries) {
        if (static_cast<int>(entries.size()) != dom->dim)
            fail_config("diag_expr form: need one entry per axis");
        std::vector<Expr> exprs;
        exprs.reserve(entries.size());
        for (const auto& e : entries) exprs.push_back(Expr::parse(e));
        int dim = dom->dim;
        QuadraticFormField q{dom, std::vector<double>(
            static_cast<size_t>(dom->n_active()) * static_cast<size_t>(dim * dim), 0.0)};
        for (int32_t c = 0; c < dom->n_active(); ++c) {
            auto x = dom->center(c);
            for (int i = 0; i < dim; ++i)
                q.m[static_cast<size_t>(c) * static_cast<size_t>(dim * dim) + static_cast<size_t>(i * dim + i)] =
                    exprs[static_cast<size_t>(i)].eval(x);
        }
        q.symmetrize_and_check();
        return q;
    }
};

// |sqrt(Q(x)) g(x)| per cell via the quadratic form itself.
inline ScalarField sqrtQ_magnitude(const QuadraticFormField& Q, const VectorField& g) {
    const auto& dom = g.dom;
    if (Q.dom.get() != dom.get()) fail_pre("sqrtQ_magnitude: domain mismatch");
    ScalarField out{dom, std::vector<double>(static_cast<size_t>(dom->n_active()), 0.0)};
    for (int32_t c = 0; c < dom->n_active(); ++c) {
        std::array<double, 3> gc{0, 0, 0};
        for (int ax = 0; ax < dom->dim; ++ax) gc[static_cast<size_t>(ax)] = g.comp[static_cast<size_t>(ax)][static_cast<size_t>(c)];
        double v = Q.quad(c, gc);
        if (v < -1e-12)
            fail_pre("sqrtQ_magnitude: PSD violation at cell " + std::to_string(c));
        out.v[static_cast<size_t>(c)] = std::sqrt(std::max(0.0, v));
    }
    return out;
}

inline double form_lp_norm(const VectorField& g, const QuadraticFormField& Q, double p,
                           const MeasureField& mu, std::span<const int32_t> E) {
    return lp_norm(sqrtQ_magnitude(Q, g), p, mu, E);
}

// (f, g): a function with a designated form-measured gradient. With a
// support flag, both components vanish outside it.
struct SobolevPair {
    ScalarField f;
    VectorField g;
    std::optional<CellSet> support;

    void validate() const {
        f.validate();
        g.validate();
        if (support) {
            std::vector<char> in(f.v.size(), 0);
            for (int32_t c : *support) in[static_cast<size_t>(c)] = 1;
            for (size_t i = 0; i < f.v.size(); ++i) {
                if (in[i]) continue;
                bool zero = f.v[i] == 0.0;
                for (int ax = 0; ax < f.dom->dim && zero; ++ax)
                    zero = g.comp[static_cast<size_t>(ax)][i] == 0.0;
                if (!zero) fail_pre("sobolev pair: nonzero outside declared support at cell " + std::to_string(i));
            }
        }
    }
};

// ||f||_{L^p_nu(E)} + ||sqrtQ g||_{L^p_mu(E)}.
inline double sobolev_norm(const SobolevPair& pair, double p, const MeasureField& nu,
                           const MeasureField& mu, const QuadraticFormField& Q,
                           std::span<const int32_t> E) {
    return lp_norm(pair.f, p, nu, E) + form_lp_norm(pair.g, Q, p, mu, E);
}

// Grid gradient: central differences in the interior, second-order one-sided
// at mask boundaries (first-order only when a single neighbor exists). Exact
// for affine fields.
inline VectorField gradient(const ScalarField& f) {
    const auto& dom = f.dom;
    VectorField g;
    g.dom = dom;
    for (int ax = 0; ax < dom->dim; ++ax)
        g.comp[static_cast<size_t>(ax)].assign(static_cast<size_t>(dom->n_active()), 0.0);

    for (int32_t a = 0; a < dom->n_active(); ++a) {
        auto cc = dom->lattice_coords(dom->full_of_active[static_cast<size_t>(a)]);
        for (int ax = 0; ax < dom->dim; ++ax) {
            auto i = static_cast<size_t>(ax);
            double h = dom->h[i];
            auto shifted = [&](int delta) {
                auto c = cc;
                c[i] += delta;
                return dom->active_at(c);
            };
            int32_t prev = shifted(-1), next = shifted(+1);
            double val;
            if (prev >= 0 && next >= 0) {
                val = (f.v[static_cast<size_t>(next)] - f.v[static_cast<size_t>(prev)]) / (2 * h);
            } else if (next >= 0) {
                int32_t next2 = shifted(+2);
                val = next2 >= 0
                          ? (-3 * f.v[static_cast<size_t>(a)] + 4 * f.v[static_cast<size_t>(next)] -
                             f.v[static_cast<size_t>(next2)]) / (2 * h)
                          : (f.v[static_cast<size_t>(next)] - f.v[static_cast<size_t>(a)]) / h;
            } else if (prev >= 0) {
                int32_t prev2 = shifted(-2);
                val = prev2 >= 0
                          ? (3 * f.v[static_cast<size_t>(a)] - 4 * f.v[static_cast<size_t>(prev)] +
                             f.v[static_cast<size_t>(prev2)]) / (2 * h)
                          : (f.v[static_cast<size_t>(a)] - f.v[static_cast<size_t>(prev)]) / h;
            } else {
                fail_pre("gradient: cell " + std::to_string(a) + " has no neighbor along axis " +
                         std::to_string(ax));
            }
            g.comp[i][static_cast<size_t>(a)] = val;
        }
    }
    return g;
}

}  // namespace sobocomp
