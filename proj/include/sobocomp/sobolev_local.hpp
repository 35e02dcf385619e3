#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sobocomp/forms.hpp"
#include "sobocomp/quasimetric.hpp"

namespace sobocomp {

// Empirical lower bound for the local Sobolev constant C(B): max over a
// family of ball-supported pairs of ||f||_{L^{p sigma}_w(B)} divided by the
// global pair norm. Each pair must declare support inside B.
inline double local_sobolev_constant(const std::vector<SobolevPair>& pairs, const Ball& B, double p,
                                     double sigma, const MeasureField& w, const MeasureField& nu,
                                     const MeasureField& mu, const QuadraticFormField& Q) {
    if (!(sigma > 1)) fail_pre("local_sobolev_constant: sigma must exceed 1");
    double best = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& pr = pairs[i];
        if (!pr.support)
            fail_pre("local_sobolev_constant: pair " + std::to_string(i) + " lacks a support flag");
        if (!cells_subset(*pr.support, B.cells))
            fail_pre("local_sobolev_constant: pair " + std::to_string(i) + " supported outside B");
        pr.validate();
        double num = lp_norm(pr.f, p * sigma, w, B.cells);
        if (num == 0) continue;
        double den = sobolev_norm(pr, p, nu, mu, Q, pr.f.dom->all_cells());
        if (den == 0) return std::numeric_limits<double>::infinity();
        best = std::max(best, num / den);
    }
    return best;
}

// Normalized two-term ball inequality with the factor r on the gradient
// side:
//   (avg_B |f|^{p sigma} dw)^{1/(p sigma)}
//     <= C [ (avg_B |f|^p dnu)^{1/p} + r (avg_B |sqrtQ g|^p dmu)^{1/p} ].
inline bool normalized_sobolev_check(const SobolevPair& pair, const Ball& B, double p, double sigma,
                                     const MeasureField& w, const MeasureField& nu,
                                     const MeasureField& mu, const QuadraticFormField& Q,
                                     double C_cand) {
    if (!(C_cand > 0) ) {
        // C = 0 only passes on the zero pair
        double probe = lp_norm(pair.f, p * sigma, w, B.cells);
        return probe == 0;
    }
    double wB = w.on(B.cells), nuB = nu.on(B.cells), muB = mu.on(B.cells);
    if (!(wB > 0 && nuB > 0 && muB > 0))
        fail_pre("normalized_sobolev_check: a measure vanishes on the ball");

    double lhs = lp_norm(pair.f, p * sigma, w, B.cells) / std::pow(wB, 1.0 / (p * sigma));
    double t1 = lp_norm(pair.f, p, nu, B.cells) / std::pow(nuB, 1.0 / p);
    double t2 = form_lp_norm(pair.g, Q, p, mu, B.cells) / std::pow(muB, 1.0 / p);
    double rhs = C_cand * (t1 + B.radius * t2);
    if (lhs == 0) return true;
    return lhs <= rhs * (1 + 1e-9);
}

}  // namespace sobocomp
