#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sobocomp/quasimetric.hpp"

using namespace sobocomp;

TEST_CASE("euclidean metric verifies with kappa 1") {
    auto dom = th::unit_square(16);
    auto d = Quasimetric::euclidean();
    auto r = verify_quasimetric(d, *dom, 20000);
    CHECK(r.kappa_estimate <= 1.0 + 1e-12);
    CHECK(r.violations == 0);
}

TEST_CASE("squared distance verifies with kappa 2") {
    // oracle: (a+b)^2 <= 2(a^2+b^2), brute-checked over sampled triples
    auto dom = th::unit_interval(128);
    auto d = Quasimetric::power(2.0);
    CHECK(d.kappa == Catch::Approx(2.0));
    auto r = verify_quasimetric(d, *dom, 50000);
    CHECK(r.kappa_estimate <= 2.0 + 1e-12);
    CHECK(r.violations == 0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 1000; ++t) {
        double a = u(rng), b = u(rng);
        CHECK((a + b) * (a + b) <= 2 * (a * a + b * b) + 1e-15);
    }
}

TEST_CASE("tabulated asymmetry is rejected with a witness") {
    auto dom = th::unit_interval(4);
    size_t n = 4;
    std::vector<double> t(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) t[i * n + j] = std::fabs(double(i) - double(j)) * 0.25;
    t[0 * n + 2] += 0.125;  // break symmetry
    auto d = Quasimetric::tabulated(t, 1.0);
    CHECK_THROWS_AS(verify_quasimetric(d, *dom, 5000), Error);
}

TEST_CASE("ball membership on the interval") {
    auto dom = th::unit_interval(8);  // centers at (i+0.5)/8
    auto d = Quasimetric::euclidean();
    int32_t x = th::cell_near(dom, {0.5625, 0, 0});
    auto b = ball(d, x, 0.2, *dom);
    // cells with centers in (0.3625, 0.7625): 0.4375, 0.5625, 0.6875
    CHECK(b.cells == CellSet{3, 4, 5});

    auto all = ball(d, x, 10.0, *dom);
    CHECK(all.cells.size() == static_cast<size_t>(dom->n_active()));
}

TEST_CASE("anisotropic ball equals brute-force membership scan") {
    auto dom = th::unit_square(24);
    auto d = Quasimetric::anisotropic({1.0, 0.5, 1.0}, 2);
    CHECK(d.kappa == Catch::Approx(1.0));
    int32_t x = th::cell_near(dom, {0.5, 0.5, 0});
    auto b = ball(d, x, 0.3, *dom);

    CellSet brute;
    for (int32_t a = 0; a < dom->n_active(); ++a)
        if (d(*dom, x, a) < 0.3) brute.push_back(a);
    CHECK(b.cells == brute);
}

TEST_CASE("swallowing gamma formula") {
    CHECK(swallowing_gamma(1.0) == Catch::Approx(3.0));
    CHECK(swallowing_gamma(2.0) == Catch::Approx(10.0));
    CHECK(swallowing_gamma(1.5) == Catch::Approx(6.0));
    CHECK_THROWS_AS(swallowing_gamma(0.5), Error);
}

TEST_CASE("swallowing holds over random intersecting pairs") {
    auto dom = th::unit_square(32);
    auto d = Quasimetric::euclidean();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int32_t> pick(0, dom->n_active() - 1);
    std::uniform_real_distribution<double> ur(0.02, 0.4);
    int tested = 0;
    while (tested < 2000) {
        int32_t c1 = pick(rng), c2 = pick(rng);
        double r1 = ur(rng), r2 = ur(rng);
        if (r1 > r2) std::swap(r1, r2);
        auto b1 = ball(d, c1, r1, *dom);
        auto b2 = ball(d, c2, r2, *dom);
        if (!cells_intersect(b1.cells, b2.cells)) continue;
        CHECK(check_swallow(d, b1, b2, *dom));
        ++tested;
    }
}

TEST_CASE("identical balls swallow themselves") {
    auto dom = th::unit_interval(64);
    auto d = Quasimetric::euclidean();
    auto b = ball(d, 20, 0.1, *dom);
    CHECK(check_swallow(d, b, b, *dom));
}

TEST_CASE("gamma = 1 fails on a concrete pair") {
    auto dom = th::unit_interval(256);
    auto d = Quasimetric::euclidean();
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int32_t> pick(0, dom->n_active() - 1);
    std::uniform_real_distribution<double> ur(0.02, 0.2);
    bool found_false = false;
    for (int t = 0; t < 5000 && !found_false; ++t) {
        int32_t c1 = pick(rng), c2 = pick(rng);
        if (c1 == c2) continue;
        double r1 = ur(rng), r2 = ur(rng);
        if (r1 > r2) std::swap(r1, r2);
        auto b1 = ball(d, c1, r1, *dom);
        auto b2 = ball(d, c2, r2, *dom);
        if (!cells_intersect(b1.cells, b2.cells)) continue;
        if (!check_swallow_with_gamma(d, b1, b2, *dom, 1.0)) found_false = true;
    }
    CHECK(found_false);
}

TEST_CASE("disjoint balls are a precondition error") {
    auto dom = th::unit_interval(64);
    auto d = Quasimetric::euclidean();
    auto b1 = ball(d, 5, 0.02, *dom);
    auto b2 = ball(d, 60, 0.02, *dom);
    CHECK_THROWS_AS(check_swallow(d, b1, b2, *dom), Error);
}

TEST_CASE("doubling probe") {
    auto dom = th::unit_interval(512);
    auto d = Quasimetric::euclidean();
    auto K = dom->all_cells();

    int count = doubling_probe(d, *dom, K, 0.1, 0.05, 40);
    CHECK(count >= 1);
    CHECK(count <= 4);

    CHECK(doubling_probe(d, *dom, K, 0.1, 0.1, 40) == 1);
}

TEST_CASE("doubling probe is stable under refinement") {
    auto d = Quasimetric::euclidean();
    auto coarse = th::unit_interval(1 << 9);
    auto fine = th::unit_interval(1 << 11);
    int c1 = doubling_probe(d, *coarse, coarse->all_cells(), 0.12, 0.06, 30);
    int c2 = doubling_probe(d, *fine, fine->all_cells(), 0.12, 0.06, 30);
    CHECK(std::abs(c1 - c2) <= 1);
}

TEST_CASE("inner radius formula and containment") {
    auto dom = th::unit_interval(64);
    auto d = Quasimetric::euclidean();
    int32_t mid = th::cell_near(dom, {0.5, 0, 0});
    double r = inner_radius(d, mid, *dom);
    CHECK(r == Catch::Approx(dom->center(mid)[0] >= 0.5 ? (1 - dom->center(mid)[0]) / 2
                                                        : dom->center(mid)[0] / 2)
              .epsilon(1e-12));

    // kappa = 2 halves the radius
    auto d2 = Quasimetric::power(1.0);
    d2.kappa = 2.0;
    CHECK(inner_radius(d2, mid, *dom) == Catch::Approx(r / 2));

    // containment for every active cell, including boundary-adjacent ones
    auto masked = th::unit_square(16, "(x-0.5)^2 + (y-0.5)^2 >= 0.05");
    auto de = Quasimetric::euclidean();
    for (int32_t a = 0; a < masked->n_active(); a += 3) {
        double ra = inner_radius(de, a, *masked);
        CHECK(ra > 0);
        auto b = ball(de, a, ra, *masked);
        // a ball of the inner radius never reaches an inactive lattice cell:
        // brute check over the lattice
        for (int32_t full = 0; full < masked->n_full(); ++full) {
            if (masked->active_of_full[static_cast<size_t>(full)] >= 0) continue;
            auto xc = masked->center(a);
            auto yc = masked->center_full(full);
            CHECK(std::hypot(xc[0] - yc[0], xc[1] - yc[1]) >= ra);
        }
    }
}

TEST_CASE("symmetric tabulated metric verifies and scans balls") {
    auto dom = th::unit_interval(6);
    size_t n = 6;
    std::vector<double> t(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            t[i * n + j] = std::sqrt(std::fabs(double(i) - double(j)) / 6.0);
    auto d = Quasimetric::tabulated(t, 1.0);
    auto r = verify_quasimetric(d, *dom, 4000);
    CHECK(r.violations == 0);
    CHECK(r.kappa_estimate <= 1.0 + 1e-12);

    auto b = ball(d, 2, 0.5, *dom);
    CellSet brute;
    for (int32_t a = 0; a < dom->n_active(); ++a)
        if (d(*dom, 2, a) < 0.5) brute.push_back(a);
    CHECK(b.cells == brute);
}

TEST_CASE("swallow requires r1 <= r2") {
    auto dom = th::unit_interval(64);
    auto d = Quasimetric::euclidean();
    auto big = ball(d, 32, 0.2, *dom);
    auto small = ball(d, 30, 0.05, *dom);
    CHECK_THROWS_AS(check_swallow(d, big, small, *dom), Error);
}

TEST_CASE("inner radius under the anisotropic metric with holes") {
    auto dom = th::unit_square(20, "(x-0.5)^2 + (y-0.5)^2 >= 0.04");
    auto d = Quasimetric::anisotropic({1.0, 0.5, 1.0}, 2);
    for (int32_t a = 0; a < dom->n_active(); a += 17) {
        double r = inner_radius(d, a, *dom);
        CHECK(r > 0);
        auto b = ball(d, a, r, *dom);
        CHECK(!b.cells.empty());
        // no inactive lattice cell may sit strictly inside the ball radius
        for (int32_t full = 0; full < dom->n_full(); ++full) {
            if (dom->active_of_full[static_cast<size_t>(full)] >= 0) continue;
            auto xa = dom->center(a);
            auto xf = dom->center_full(full);
            double dist = std::pow(std::fabs(xa[0] - xf[0]), 1.0) +
                          std::pow(std::fabs(xa[1] - xf[1]), 0.5);
            CHECK(dist >= r);
        }
    }
}

TEST_CASE("balls work in three dimensions") {
    GridSpec spec;
    spec.dim = 3;
    spec.bounds = {{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
    spec.cells = {12, 12, 12};
    auto dom = build_grid(spec);
    auto d = Quasimetric::euclidean();
    int32_t c = th::cell_near(dom, {0.5, 0.5, 0.5});
    auto b = ball(d, c, 0.3, *dom);
    CellSet brute;
    for (int32_t a = 0; a < dom->n_active(); ++a)
        if (d(*dom, c, a) < 0.3) brute.push_back(a);
    CHECK(b.cells == brute);
    // volume sanity: |B| ~ (4/3) pi r^3
    double vol = static_cast<double>(b.cells.size()) * dom->cell_volume;
    CHECK(vol == Catch::Approx(4.0 / 3.0 * M_PI * 0.027).epsilon(0.15));
}
