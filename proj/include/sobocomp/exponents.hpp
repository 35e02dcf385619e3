#pragma once

#include <string>

#include "sobocomp/rational.hpp"

namespace sobocomp {

// Holder conjugate: 1/p + 1/p' = 1, with conjugate(1) = inf and
// conjugate(inf) = 1.
inline Exponent holder_conjugate(const Exponent& p) {
    if (p.is_inf()) return Exponent::of(1);
    if (p.rat() < Rational(1)) fail_pre("holder_conjugate: p < 1");
    if (p.rat() == Rational(1)) return Exponent::inf();
    return Exponent(p.rat() / (p.rat() - Rational(1)));
}

// N = np/(n-p) for 1 <= p < n.
inline Exponent classical_sobolev_N(long long n, const Exponent& p) {
    if (p.is_inf()) fail_pre("classical_sobolev_N: p must be finite");
    const Rational& pr = p.rat();
    if (pr < Rational(1)) fail_pre("classical_sobolev_N: p < 1");
    if (!(pr < Rational(n))) fail_pre("classical_sobolev_N: requires p < n");
    return Exponent((Rational(n) * pr) / (Rational(n) - pr));
}

// N = theta*p/(theta-p) for theta > p >= 1; the gain exponent attached to a
// doubling exponent theta.
inline Exponent john_N(const Exponent& theta, const Exponent& p) {
    if (theta.is_inf() || p.is_inf()) fail_pre("john_N: arguments must be finite");
    const Rational& t = theta.rat();
    const Rational& pr = p.rat();
    if (pr < Rational(1)) fail_pre("john_N: p < 1");
    if (!(t > pr)) fail_pre("john_N: requires theta > p");
    return Exponent((t * pr) / (t - pr));
}

// lambda = (1/q - 1/N)/(1 - 1/N); lambda = 1/q when N = inf, lambda = 1 at
// q = 1. Requires q < N.
inline Exponent interpolation_lambda(const Exponent& q, const Exponent& N) {
    if (q.is_inf()) fail_pre("interpolation_lambda: q must be finite");
    const Rational& qr = q.rat();
    if (qr < Rational(1)) fail_pre("interpolation_lambda: q < 1");
    if (qr == Rational(1)) return Exponent::of(1);
    if (!(q < N)) fail_pre("interpolation_lambda: requires q < N");
    if (N.is_inf()) return Exponent(Rational(1) / qr);
    const Rational& Nr = N.rat();
    // (1/q - 1/N)/(1 - 1/N) = (N - q)/(q(N - 1))
    return Exponent((Nr - qr) / (qr * (Nr - Rational(1))));
}

// t = s/p and its conjugate t'; admissible when s >= p * sigma', which pins
// t' <= sigma.
struct CutoffConjugates {
    Exponent t;
    Exponent t_prime;
};

inline CutoffConjugates cutoff_conjugates(const Exponent& s, const Exponent& p, const Exponent& sigma) {
    if (p.is_inf()) fail_pre("cutoff_conjugates: p must be finite");
    if (p.rat() < Rational(1)) fail_pre("cutoff_conjugates: p < 1");
    Exponent sigma_prime = holder_conjugate(sigma);
    // s >= p * sigma'
    if (sigma_prime.is_inf()) {
        if (!s.is_inf()) fail_pre("cutoff_conjugates: requires s >= p*sigma' (= inf)");
    } else if (!s.is_inf()) {
        if (s.rat() < p.rat() * sigma_prime.rat()) fail_pre("cutoff_conjugates: requires s >= p*sigma'");
    }
    if (s.is_inf()) return {Exponent::inf(), Exponent::of(1)};
    Exponent t(s.rat() / p.rat());
    return {t, holder_conjugate(t)};
}

// Admissibility verdicts for the power-distance embeddings on s-John
// domains; everything exact, thresholds returned as rationals.
struct AdmissibilityVerdict {
    bool holds = false;
    std::string binding_constraint;  // which constraint decided the verdict
    Exponent q_upper_threshold = Exponent::of(1);  // sup of admissible q (inf if unconstrained)
};

enum class SJohnPart { I, II };

inline AdmissibilityVerdict sjohn_admissible(long long n, const Rational& p, const Rational& a,
                                             const Rational& b, const Rational& s, SJohnPart part) {
    if (p < Rational(1)) fail_pre("sjohn_admissible: p < 1");
    if (a < Rational(0)) fail_pre("sjohn_admissible: a < 0");
    if (s < Rational(1)) fail_pre("sjohn_admissible: s < 1");
    if (n < 1) fail_pre("sjohn_admissible: n < 1");

    const Rational geom = s * (Rational(n - 1) + b) - p + Rational(1);

    AdmissibilityVerdict v;
    if (part == SJohnPart::I) {
        v.holds = (Rational(n) + a) > geom;
        if (!v.holds) {
            v.binding_constraint = "aperture: n+a <= s(n-1+b)-p+1";
            return v;
        }
        // 1/q > max{ 1/p - 1/n , geom/((n+a)p) }
        const Rational t1 = Rational(1) / p - Rational(1, n);
        const Rational t2 = geom / ((Rational(n) + a) * p);
        const Rational t = t1 > t2 ? t1 : t2;
        v.binding_constraint = t1 > t2 ? "subcritical-sobolev" : "sjohn-geometry";
        v.q_upper_threshold = t > Rational(0) ? Exponent(Rational(1) / t) : Exponent::inf();
        return v;
    }

    // part II
    if (!(p > Rational(1))) fail_pre("sjohn_admissible: part ii requires p > 1");
    if (!(b - a < p)) fail_pre("sjohn_admissible: part ii requires b - a < p");
    const bool left = (Rational(n) + a * p) > geom;
    const bool right = geom >= (Rational(n) + a);
    v.holds = left && right;
    if (!v.holds) {
        v.binding_constraint = !left ? "aperture: n+ap <= s(n-1+b)-p+1" : "aperture: s(n-1+b)-p+1 < n+a";
        return v;
    }
    // a/q > max{ b/p - 1 , (s(n-1+b)-p-n+1)/p }
    const Rational t1 = b / p - Rational(1);
    const Rational t2 = (geom - Rational(n)) / p;
    const Rational t = t1 > t2 ? t1 : t2;
    v.binding_constraint = t1 > t2 ? "weight-ratio" : "sjohn-geometry";
    if (a == Rational(0)) {
        // unreachable: right-hand aperture forces a > 0; kept for clarity
        v.q_upper_threshold = Exponent::of(1);
        return v;
    }
    v.q_upper_threshold = t > Rational(0) ? Exponent(a / t) : Exponent::inf();
    return v;
}

// Sup of admissible N for the unweighted s-John embedding:
// 1/N >= (s(n-1)-p+1)/(np). Allows the boundary s = 1 + p/(n-1), where the
// threshold collapses to N = p.
inline Exponent unweighted_sjohn_N(long long n, const Rational& p, const Rational& s) {
    if (p < Rational(1)) fail_pre("unweighted_sjohn_N: p < 1");
    if (s < Rational(1)) fail_pre("unweighted_sjohn_N: s < 1");
    if (n >= 2) {
        const Rational s_cap = Rational(1) + p / Rational(n - 1);
        if (s > s_cap) fail_pre("unweighted_sjohn_N: s beyond 1 + p/(n-1)");
    }
    const Rational t = (s * Rational(n - 1) - p + Rational(1)) / (Rational(n) * p);
    if (!(t > Rational(0))) return Exponent::inf();
    return Exponent(Rational(1) / t);
}

// Constructive witness N with 1/q > 1/N > threshold and N in (p, inf):
// midpoint in 1/N-space between the threshold and min(1/q, 1/p).
inline Exponent sjohn_witness_N(const Rational& p, const Rational& q, const AdmissibilityVerdict& v) {
    if (!v.holds) fail_pre("sjohn_witness_N: verdict does not hold");
    const Rational inv_q = Rational(1) / q;
    const Rational inv_p = Rational(1) / p;
    const Rational thr = v.q_upper_threshold.is_inf() ? Rational(0)
                                                      : Rational(1) / v.q_upper_threshold.rat();
    if (!(inv_q > thr)) fail_pre("sjohn_witness_N: q not admissible for this verdict");
    const Rational cap = inv_q < inv_p ? inv_q : inv_p;
    const Rational mid = (thr + cap) / Rational(2);
    if (!(mid > Rational(0))) fail_invariant("sjohn_witness_N: degenerate midpoint");
    return Exponent(Rational(1) / mid);
}

}  // namespace sobocomp
