#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sobocomp/grid.hpp"
#include "sobocomp/quasimetric.hpp"

namespace sobocomp {

// Deterministic Euclidean ball sample for the A_p ratio: grid-aligned boxes
// at dyadic scales with half-stride placement, restricted to active cells.
inline std::vector<CellSet> ap_ball_sample(const GridDomain& dom, int scales = 4) {
    std::vector<CellSet> out;
    for (int s = 1; s <= scales; ++s) {
        std::array<int, 3> size{1, 1, 1};
        for (int ax = 0; ax < dom.dim; ++ax)
            size[static_cast<size_t>(ax)] = std::max(1, dom.cells[static_cast<size_t>(ax)] >> s);
        std::array<int, 3> stride{1, 1, 1};
        for (int ax = 0; ax < dom.dim; ++ax)
            stride[static_cast<size_t>(ax)] = std::max(1, size[static_cast<size_t>(ax)] / 2);

        std::array<int, 3> start{0, 0, 0};
        for (start[0] = 0; start[0] + size[0] <= dom.cells[0]; start[0] += stride[0]) {
            int y_end = dom.dim > 1 ? dom.cells[1] - size[1] : 0;
            for (start[1] = 0; start[1] <= y_end; start[1] += stride[1]) {
                int z_end = dom.dim > 2 ? dom.cells[2] - size[2] : 0;
                for (start[2] = 0; start[2] <= z_end; start[2] += stride[2]) {
                    CellSet box;
                    std::array<int, 3> c{0, 0, 0};
                    for (int i0 = start[0]; i0 < start[0] + size[0]; ++i0) {
                        c[0] = i0;
                        for (int i1 = start[1]; i1 < start[1] + (dom.dim > 1 ? size[1] : 1); ++i1) {
                            c[1] = dom.dim > 1 ? i1 : 0;
                            for (int i2 = start[2]; i2 < start[2] + (dom.dim > 2 ? size[2] : 1); ++i2) {
                                c[2] = dom.dim > 2 ? i2 : 0;
                                int32_t a = dom.active_at(c);
                                if (a >= 0) box.push_back(a);
                            }
                        }
                    }
                    if (!box.empty()) out.push_back(std::move(box));
                    if (dom.dim <= 2) break;
                }
                if (dom.dim <= 1) break;
            }
        }
    }
    return out;
}

struct ApBallRatio {
    size_t ball_index;
    double ratio;
};

struct ApReport {
    double p = 2;
    std::vector<ApBallRatio> balls;
    double sup = 0;
    // filled by refinement drivers: sup at a coarse and a finer grid
    double sup_coarse = 0;
    double sup_fine = 0;
};

// Muckenhoupt ratio over the sampled balls: for p > 1 the averaged product
// (avg eta)(avg eta^{-1/(p-1)})^{p-1}, for p = 1 (avg eta)/(min eta).
inline ApReport ap_constant(const MeasureField& weight, double p, const std::vector<CellSet>& sample) {
    if (!(p >= 1)) fail_pre("ap_constant: p must be >= 1");
    const auto& dom = *weight.dom;
    ApReport rep;
    rep.p = p;
    for (size_t bi = 0; bi < sample.size(); ++bi) {
        const auto& box = sample[bi];
        double navg = 0, ninv = 0, nmin = std::numeric_limits<double>::infinity();
        for (int32_t c : box) {
            double eta = weight.mass[static_cast<size_t>(c)] / dom.cell_volume;
            if (!(eta > 0)) fail_pre("ap_constant: density must be positive at active cells");
            navg += eta;
            if (p > 1) ninv += std::pow(eta, -1.0 / (p - 1.0));
            nmin = std::min(nmin, eta);
        }
        double n = static_cast<double>(box.size());
        double ratio = p > 1 ? (navg / n) * std::pow(ninv / n, p - 1.0) : (navg / n) / nmin;
        if (ratio < 1.0 - 1e-9)
            fail_invariant("ap_constant: ratio below 1 contradicts the mean inequality");
        rep.balls.push_back({bi, ratio});
        rep.sup = std::max(rep.sup, ratio);
    }
    return rep;
}

struct BallPairSpec {
    int32_t center;
    double r;
    double r_prime;
};

struct DoublingFit {
    double theta = 0;
    double C = 1;
    double max_residual = 0;  // worst |log w(B_r) - log(C (r/r')^theta w(B_r'))|
};

// Least theta (with C fit) such that w(B_r) <= C (r/r')^theta w(B_r') over
// the sampled pairs: log-log regression; a single pair gives the exact
// two-point slope with C = 1.
inline DoublingFit doubling_exponent(const MeasureField& w, const std::vector<BallPairSpec>& pairs) {
    if (pairs.empty()) fail_pre("doubling_exponent: no ball pairs");
    const auto& dom = *w.dom;
    auto d = Quasimetric::euclidean();

    std::vector<double> xs, ys;
    for (const auto& pr : pairs) {
        if (!(0 < pr.r_prime && pr.r_prime < pr.r))
            fail_pre("doubling_exponent: requires 0 < r' < r");
        double mr = w.on(ball(d, pr.center, pr.r, dom).cells);
        double mrp = w.on(ball(d, pr.center, pr.r_prime, dom).cells);
        if (!(mr > 0) || !(mrp > 0))
            fail_pre("doubling_exponent: zero mass on ball at center " + std::to_string(pr.center));
        xs.push_back(std::log(pr.r / pr.r_prime));
        ys.push_back(std::log(mr / mrp));
    }

    DoublingFit fit;
    if (pairs.size() == 1) {
        fit.theta = ys[0] / xs[0];
        fit.C = 1.0;
        return fit;
    }
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    double intercept;
    if (std::fabs(denom) < 1e-12 * n * sxx) {
        // all pairs share one radius ratio; the intercept is unidentifiable,
        // fit through the origin instead
        fit.theta = sxy / sxx;
        intercept = 0.0;
    } else {
        fit.theta = (n * sxy - sx * sy) / denom;
        intercept = (sy - fit.theta * sx) / n;
    }
    fit.C = std::exp(intercept);
    for (size_t i = 0; i < xs.size(); ++i)
        fit.max_residual = std::max(fit.max_residual,
                                    std::fabs(ys[i] - (fit.theta * xs[i] + intercept)));
    return fit;
}

}  // namespace sobocomp
