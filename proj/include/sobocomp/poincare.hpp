#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sobocomp/cover.hpp"
#include "sobocomp/forms.hpp"

namespace sobocomp {

// ||f - f_{B,w}||_{L^p_w(B)} / ||(f,g)||_{W^{1,p}(B_{c0 r})}. Numerator-first:
// a vanishing numerator returns 0 regardless of the denominator; a vanishing
// denominator under a live numerator surfaces the degeneracy as +inf.
inline double poincare_quotient(const Quasimetric& d, const SobolevPair& pair, const Ball& B,
                                double c0, double p, const MeasureField& w, const MeasureField& nu,
                                const MeasureField& mu, const QuadraticFormField& Q) {
    if (!(c0 >= 1)) fail_pre("poincare_quotient: c0 must be >= 1");
    if (!(w.on(B.cells) > 0)) fail_pre("poincare_quotient: zero-measure ball");
    const auto& dom = *pair.f.dom;

    double avg = average(pair.f, B.cells, w);
    ScalarField centered{pair.f.dom, pair.f.v};
    for (int32_t c : B.cells) centered.v[static_cast<size_t>(c)] -= avg;
    // only B matters below; zero the rest so lp_norm over B is unaffected
    double num = 0;
    {
        ScalarField dev{pair.f.dom, std::vector<double>(pair.f.v.size(), 0.0)};
        for (int32_t c : B.cells) dev.v[static_cast<size_t>(c)] = centered.v[static_cast<size_t>(c)];
        num = lp_norm(dev, p, w, B.cells);
    }
    if (num == 0) return 0.0;

    Ball dilate = c0 == 1.0 ? B : ball(d, B.center, c0 * B.radius, dom);
    double den = sobolev_norm(pair, p, nu, mu, Q, dilate.cells);
    if (den == 0) return std::numeric_limits<double>::infinity();
    return num / den;
}

struct DeltaCalibration {
    double delta = 0;   // 0 is the sentinel: no grid radius qualified
    bool ok = false;
    // witness of the smallest failing radius, when any
    double witness_radius = 0;
    int witness_member = -1;
    int32_t witness_center = -1;
    double witness_quotient = 0;
};

// Largest radius in the grid such that every member's quotient over every
// ball with center in K and radius up to it stays within eps.
inline DeltaCalibration calibrate_delta(const Quasimetric& d, const std::vector<SobolevPair>& family,
                                        const CellSet& K, double eps, double c0, double p,
                                        const MeasureField& w, const MeasureField& nu,
                                        const MeasureField& mu, const QuadraticFormField& Q,
                                        const std::vector<double>& radius_grid) {
    if (family.empty()) fail_pre("calibrate_delta: empty family");
    if (radius_grid.empty()) fail_pre("calibrate_delta: empty radius grid");
    for (size_t i = 1; i < radius_grid.size(); ++i)
        if (!(radius_grid[i] > radius_grid[i - 1]))
            fail_pre("calibrate_delta: radius grid must be sorted ascending");
    const auto& dom = *family.front().f.dom;

    DeltaCalibration out;
    for (double r : radius_grid) {
        for (int32_t y : K) {
            Ball B = ball(d, y, r, dom);
            if (!(w.on(B.cells) > 0)) continue;
            for (size_t m = 0; m < family.size(); ++m) {
                double q = poincare_quotient(d, family[m], B, c0, p, w, nu, mu, Q);
                if (q > eps) {
                    out.witness_radius = r;
                    out.witness_member = static_cast<int>(m);
                    out.witness_center = y;
                    out.witness_quotient = q;
                    return out;  // delta stays at the last passing radius
                }
            }
        }
        out.delta = r;
        out.ok = true;
    }
    return out;
}

enum class BalanceVerdict { Balanced, Unbalanced, Undetermined };

struct BalancingReport {
    std::vector<double> radii;
    std::vector<double> values;  // sup over K of r^p w(B_r)/mu(B_{c0 r})
    BalanceVerdict verdict = BalanceVerdict::Undetermined;
};

// Decay probe for sup_K r^p w(B_r)/mu(B_{c0 r}); balanced when the sequence
// drops below a tenth of its first value by the last radius.
inline BalancingReport balancing_probe(const Quasimetric& d, const GridDomain& dom,
                                       const MeasureField& w, const MeasureField& mu,
                                       const CellSet& K, double c0, double p,
                                       const std::vector<double>& radii) {
    if (K.empty()) fail_pre("balancing_probe: empty K");
    BalancingReport rep;
    rep.radii = radii;
    for (double r : radii) {
        if (!(r > 0)) fail_pre("balancing_probe: radii must be positive");
        double sup = 0;
        for (int32_t y : K) {
            Ball B = ball(d, y, r, dom);
            Ball C = c0 == 1.0 ? B : ball(d, y, c0 * r, dom);
            double muC = mu.on(C.cells);
            if (!(muC > 0))
                fail_pre("balancing_probe: mu vanishes on the dilated ball at center " +
                         std::to_string(y) + ", radius " + std::to_string(c0 * r));
            sup = std::max(sup, std::pow(r, p) * w.on(B.cells) / muC);
        }
        rep.values.push_back(sup);
    }
    if (rep.values.size() < 2) {
        rep.verdict = BalanceVerdict::Undetermined;
    } else {
        rep.verdict = rep.values.back() < 0.1 * rep.values.front() ? BalanceVerdict::Balanced
                                                                   : BalanceVerdict::Unbalanced;
    }
    return rep;
}

struct WeightedBallPoincare {
    bool holds = false;
    double constant = 0;   // the composed constant C~
    double lhs = 0;
    double rhs = 0;
};

// Two-weight ball Poincare with dw = rho^a dx and gradient weight rho^b dx:
// requires r(D) < rho(x_D)/2 so rho is pinched between rho(x_D)/2 and
// 3 rho(x_D)/2 on D, then checks
//   ||f - f_{D,rho^a}||_{L^p_{rho^a}(D)}
//     <= C~ (r^{(a-b)/p} + diam^{(a-b)/p}) r ||grad f||_{L^p_{rho^b}(D)}.
inline WeightedBallPoincare weighted_ball_poincare(const ScalarField& f, const GridDomain& dom,
                                                   int32_t center, double radius, double a,
                                                   double b, double p, double K_distance_floor) {
    if (a < 0) fail_pre("weighted_ball_poincare: requires a >= 0");
    auto rho = distance_to_complement(f.dom);
    double rho_c = rho.v[static_cast<size_t>(center)];
    if (!(radius < 0.5 * rho_c))
        fail_pre("weighted_ball_poincare: ball grazes the boundary (r >= rho(x_D)/2)");
    if (rho_c < K_distance_floor)
        fail_pre("weighted_ball_poincare: center below the compact-core distance floor");

    auto d = Quasimetric::euclidean();
    Ball D = ball(d, center, radius, dom);

    for (int32_t c : D.cells) {
        double rc = rho.v[static_cast<size_t>(c)];
        if (!(0.5 * rho_c <= rc && rc <= 1.5 * rho_c))
            fail_pre("weighted_ball_poincare: rho-comparability sandwich fails at cell " +
                     std::to_string(c));
    }

    auto wa = power_weight(rho, a);
    auto wb = power_weight(rho, b);

    double avg = average(f, D.cells, wa);
    ScalarField dev{f.dom, std::vector<double>(f.v.size(), 0.0)};
    for (int32_t c : D.cells) dev.v[static_cast<size_t>(c)] = f.v[static_cast<size_t>(c)] - avg;
    double lhs = lp_norm(dev, p, wa, D.cells);

    auto grad = gradient(f);
    ScalarField gmag{f.dom, std::vector<double>(f.v.size(), 0.0)};
    for (int32_t c : D.cells) {
        double s = 0;
        for (int ax = 0; ax < dom.dim; ++ax) {
            double t = grad.comp[static_cast<size_t>(ax)][static_cast<size_t>(c)];
            s += t * t;
        }
        gmag.v[static_cast<size_t>(c)] = std::sqrt(s);
    }
    double grad_norm = lp_norm(gmag, p, wb, D.cells);

    double diam = 0;
    for (int ax = 0; ax < dom.dim; ++ax) {
        auto i = static_cast<size_t>(ax);
        double len = dom.bounds[i][1] - dom.bounds[i][0];
        diam += len * len;
    }
    diam = std::sqrt(diam);

    // unweighted Poincare on a convex ball: ||f - f_D||_p <= 2 r ||grad f||_p
    const double c_p = 2.0;
    double factor_a = std::pow(1.5, a / p);
    double factor_b = std::max(std::pow(2.0, b / p), std::pow(1.5, -b / p));
    double c_tilde = 2.0 * c_p * factor_a * factor_b;

    double scale = std::pow(radius, (a - b) / p) + std::pow(diam, (a - b) / p);
    double rhs = c_tilde * scale * radius * grad_norm;

    WeightedBallPoincare out;
    out.constant = c_tilde;
    out.lhs = lhs;
    out.rhs = rhs;
    out.holds = lhs <= rhs * (1 + 1e-9);
    return out;
}

}  // namespace sobocomp
