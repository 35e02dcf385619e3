#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "helpers.hpp"
#include "sobocomp/cutoff.hpp"

using namespace sobocomp;
using BigRat = boost::multiprecision::cpp_rational;

TEST_CASE("cutoff profile on the interval") {
    auto dom = th::unit_interval(512);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::identity(dom);
    auto leb = lebesgue_measure(dom);

    int32_t y = th::cell_near(dom, {0.5, 0, 0});
    auto B = ball(d, y, 0.25, *dom);  // B = (0.25, 0.75)
    auto c = build_cutoff(d, *dom, B, 0.15, Q, leb, std::numeric_limits<double>::infinity());

    double yc = dom->center(y)[0];
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        double x = dom->center(a)[0];
        double t = std::fabs(x - yc);
        double v = c.phi.v[static_cast<size_t>(a)];
        if (t <= 0.15) CHECK(v == 1.0);
        else if (t >= 0.25) CHECK(v == 0.0);
        else CHECK(v == Catch::Approx((0.25 - t) / 0.10));
    }

    // max ramp slope certificate for s = infinity
    CHECK(c.certificate == Catch::Approx(1.0 / 0.10));
    CHECK(c.certificate_finite);
}

TEST_CASE("cutoff rejects inverted radii") {
    auto dom = th::unit_interval(64);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::identity(dom);
    auto leb = lebesgue_measure(dom);
    auto B = ball(d, 32, 0.1, *dom);
    CHECK_THROWS_AS(build_cutoff(d, *dom, B, 0.1, Q, leb, 2.0), Error);
    CHECK_THROWS_AS(build_cutoff(d, *dom, B, 0.2, Q, leb, 2.0), Error);
}

TEST_CASE("grushin cutoff certificate matches brute quadrature") {
    auto dom = th::unit_square(96);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::grushin(dom);
    auto leb = lebesgue_measure(dom);

    int32_t y = th::cell_near(dom, {0.55, 0.5, 0});
    auto B = ball(d, y, 0.3, *dom);
    auto c = build_cutoff(d, *dom, B, 0.18, Q, leb, 4.0);

    // oracle: integrate |sqrtQ grad(phi)|^4 directly from a stencil gradient
    auto stencil = gradient(c.phi);
    double acc = 0;
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        std::array<double, 3> g{stencil.comp[0][static_cast<size_t>(a)],
                                stencil.comp[1][static_cast<size_t>(a)], 0.0};
        double q = Q.quad(a, g);
        acc += q * q * leb.mass[static_cast<size_t>(a)];
    }
    double oracle = std::pow(acc, 0.25);
    CHECK(c.certificate == Catch::Approx(oracle).epsilon(0.10));
    CHECK(c.certificate_finite);
}

namespace {

std::vector<Cutoff> six_cutoffs_covering(const DomainPtr& dom, const Quasimetric& d,
                                         const QuadraticFormField& Q, const MeasureField& mu,
                                         double s) {
    std::vector<Cutoff> cs;
    const double r = 0.22, gamma = 0.13;
    for (double cx : {0.32, 0.5, 0.68}) {
        for (double cy : {0.42, 0.58}) {
            int32_t y = th::cell_near(dom, {cx, cy, 0});
            cs.push_back(build_cutoff(d, *dom, ball(d, y, r, *dom), gamma, Q, mu, s));
        }
    }
    return cs;
}

CellSet central_box(const DomainPtr& dom) {
    CellSet K;
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        auto x = dom->center(a);
        if (x[0] >= 0.3 && x[0] <= 0.7 && x[1] >= 0.4 && x[1] <= 0.6) K.push_back(a);
    }
    return K;
}

}  // namespace

TEST_CASE("partition of unity basics") {
    auto dom = th::unit_square(48);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::identity(dom);
    auto leb = lebesgue_measure(dom);

    // single cutoff: psi_1 = phi_1
    int32_t y = th::cell_near(dom, {0.5, 0.5, 0});
    auto c1 = build_cutoff(d, *dom, ball(d, y, 0.2, *dom), 0.12, Q, leb, 2.0);
    CellSet Ksmall;
    for (int32_t a : c1.outer.cells)
        if (c1.phi.v[static_cast<size_t>(a)] == 1.0) Ksmall.push_back(a);
    auto single = partition_of_unity(*dom, Ksmall, {c1});
    for (size_t a = 0; a < single.psi[0].v.size(); ++a)
        CHECK(single.psi[0].v[a] == c1.phi.v[a]);

    // two cutoffs: sum psi = 1 - (1-phi1)(1-phi2) cellwise
    auto c2 = build_cutoff(d, *dom, ball(d, th::cell_near(dom, {0.62, 0.5, 0}), 0.2, *dom), 0.12,
                           Q, leb, 2.0);
    auto duo = partition_of_unity(*dom, Ksmall, {c1, c2});
    for (size_t a = 0; a < duo.psi[0].v.size(); ++a) {
        double lhs = duo.psi[0].v[a] + duo.psi[1].v[a];
        double rhs = 1.0 - (1.0 - c1.phi.v[a]) * (1.0 - c2.phi.v[a]);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-15));
        // at plateau cells of either cutoff the sum is exactly 1
        if (c1.phi.v[a] == 1.0 || c2.phi.v[a] == 1.0) CHECK(lhs == 1.0);
    }
}

TEST_CASE("partition of unity covers K and satisfies the product identity exactly") {
    auto dom = th::unit_square(64);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::identity(dom);
    auto leb = lebesgue_measure(dom);

    auto cs = six_cutoffs_covering(dom, d, Q, leb, 2.0);
    auto K = central_box(dom);
    auto fam = partition_of_unity(*dom, K, cs);

    // invariants already checked at construction; verify sum on K here too
    std::vector<double> sum(static_cast<size_t>(dom->n_active()), 0.0);
    for (auto& p : fam.psi)
        for (size_t a = 0; a < p.v.size(); ++a) sum[a] += p.v[a];
    for (int32_t c : K) CHECK(std::fabs(sum[static_cast<size_t>(c)] - 1.0) <= 1e-12);

    // exact identity over the dyadic phi values: sum psi = 1 - prod(1 - phi)
    for (int32_t a = 0; a < dom->n_active(); a += 11) {
        BigRat P(1), S(0);
        for (auto& c : fam.cutoffs) {
            BigRat ph(c.phi.v[static_cast<size_t>(a)]);
            S += P * ph;
            P *= (BigRat(1) - ph);
        }
        CHECK(S == BigRat(1) - P);
        // stored doubles track the exact values
        BigRat stored(0);
        for (auto& p : fam.psi) stored += BigRat(p.v[static_cast<size_t>(a)]);
        double drift = std::fabs(static_cast<double>(stored - S));
        CHECK(drift <= 1e-14);
    }
}

TEST_CASE("partition of unity rejects uncovered K") {
    auto dom = th::unit_square(48);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::identity(dom);
    auto leb = lebesgue_measure(dom);
    auto c1 = build_cutoff(d, *dom, ball(d, th::cell_near(dom, {0.3, 0.3, 0}), 0.1, *dom), 0.05,
                           Q, leb, 2.0);
    CellSet K{th::cell_near(dom, {0.9, 0.9, 0})};
    CHECK_THROWS_AS(partition_of_unity(*dom, K, {c1}), Error);
}

TEST_CASE("product rule bound away from ramp kinks") {
    auto dom = th::unit_interval(512);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::identity(dom);
    auto leb = lebesgue_measure(dom);

    int32_t y = th::cell_near(dom, {0.5, 0, 0});
    auto c = build_cutoff(d, *dom, ball(d, y, 0.3, *dom), 0.18, Q, leb, 2.0);
    CellSet Ksmall;
    for (int32_t a : c.outer.cells)
        if (c.phi.v[static_cast<size_t>(a)] == 1.0) Ksmall.push_back(a);
    auto fam = partition_of_unity(*dom, Ksmall, {c});

    auto f = th::sample_scalar(dom, [](auto x) { return std::sin(3.0 * x[0]) + 2.0; });
    auto gf = gradient(f);

    ScalarField prod{dom, std::vector<double>(f.v.size())};
    for (size_t i = 0; i < f.v.size(); ++i) prod.v[i] = fam.psi[0].v[i] * f.v[i];
    auto gprod = gradient(prod);

    double yc = dom->center(y)[0];
    double h = dom->h[0];
    auto near_kink = [&](double x) {
        double t = std::fabs(x - yc);
        return std::fabs(t - 0.18) < 2.5 * h || std::fabs(t - 0.3) < 2.5 * h;
    };
    for (int32_t a = 0; a < dom->n_active(); ++a) {
        double x = dom->center(a)[0];
        if (near_kink(x)) continue;
        double lhs = std::fabs(gprod.comp[0][static_cast<size_t>(a)]);
        double rhs = fam.psi[0].v[static_cast<size_t>(a)] * std::fabs(gf.comp[0][static_cast<size_t>(a)]) +
                     std::fabs(f.v[static_cast<size_t>(a)]) *
                         std::fabs(fam.grad_psi[0].comp[0][static_cast<size_t>(a)]);
        CHECK(lhs <= rhs + 1e-3);
    }
}

TEST_CASE("local to global assembly arithmetic") {
    auto dom = th::unit_square(48);
    auto d = Quasimetric::euclidean();
    auto Q = QuadraticFormField::identity(dom);
    auto leb = lebesgue_measure(dom);

    int32_t y = th::cell_near(dom, {0.5, 0.5, 0});
    auto c1 = build_cutoff(d, *dom, ball(d, y, 0.25, *dom), 0.15, Q, leb, 2.0);
    CellSet Kplateau;
    for (int32_t a : c1.outer.cells)
        if (c1.phi.v[static_cast<size_t>(a)] == 1.0) Kplateau.push_back(a);

    auto fam = partition_of_unity(*dom, Kplateau, {c1});
    // single ball with C(B)=1, C1(B)=0 assembles to exactly 1
    CHECK(local_to_global_sobolev(Kplateau, fam, {1.0}, {0.0}, 2.0, Q, leb) == Catch::Approx(1.0));

    // two identical balls double the sum
    auto fam2 = partition_of_unity(*dom, Kplateau, {c1, c1});
    double one = local_to_global_sobolev(Kplateau, fam, {1.0}, {0.0}, 2.0, Q, leb);
    double two = local_to_global_sobolev(Kplateau, fam2, {1.0, 1.0}, {0.0, 0.0}, 2.0, Q, leb);
    CHECK(two == Catch::Approx(2 * one).epsilon(1e-12));

    // sum structure with gradient coupling: matches the formula with Cbar
    // taken as the worse of the two psi gradient norms
    double cbar = 0;
    for (size_t j = 0; j < fam2.psi.size(); ++j) {
        auto mag = sqrtQ_magnitude(Q, fam2.grad_psi[j]);
        cbar = std::max(cbar, lp_norm(mag, 2.0, leb, fam2.cutoffs[j].outer.cells));
    }
    double assembled = local_to_global_sobolev(Kplateau, fam2, {1.0, 2.0}, {0.5, 0.25}, 2.0, Q, leb);
    CHECK(assembled == Catch::Approx(1.0 * (1 + cbar * 0.5) + 2.0 * (1 + cbar * 0.25)).epsilon(1e-12));

    // monotone in each ingredient
    double base = local_to_global_sobolev(Kplateau, fam, {1.0}, {0.5}, 2.0, Q, leb);
    CHECK(local_to_global_sobolev(Kplateau, fam, {1.5}, {0.5}, 2.0, Q, leb) >= base);
    CHECK(local_to_global_sobolev(Kplateau, fam, {1.0}, {0.9}, 2.0, Q, leb) >= base);
}
