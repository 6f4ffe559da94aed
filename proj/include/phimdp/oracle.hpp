// This file is part of phimdp, a C++ library for solving robust Markov
// decision processes with phi-divergence ambiguity sets.
//
// MIT License
//
// Permission is hereby granted, free of charge, to any person obtaining a copy
// of this software and associated documentation files (the "Software"), to deal
// in the Software without restriction, including without limitation the rights
// to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
// copies of the Software, and to permit persons to whom the Software is
// furnished to do so, subject to the following conditions:
//
// The above copyright notice and this permission notice shall be included in
// all copies or substantial portions of the Software.
//
// THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
// IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
// FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
// AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
// LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
// OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
// SOFTWARE.

#pragma once

#include "phimdp/bellman.hpp"
#include "phimdp/divergence.hpp"
#include "phimdp/instance.hpp"

// Slow, dependency-free reference solvers used to sandwich the fast solvers in
// tests. The primal lattice enumeration yields upper bounds, the dual grid
// scan yields lower bounds (weak duality); together they bracket the true
// projection value. Never used on the hot path.

namespace phimdp {

/**
 * @brief Primal upper bound: minimum divergence over the feasible simplex lattice.
 *
 * Enumerates all p with entries that are multiples of h (all entries at least h
 * for KL and Burg, whose divergences blow up at the boundary; the bound then
 * refers to the interior-restricted problem, which still upper-bounds the true
 * value). Returns +infinity when no lattice point satisfies b^T p <= beta, in
 * which case the caller refines h.
 *
 * @throw std::invalid_argument for more than 4 states.
 */
inline prec_t oracle_project_grid(DivergenceKind kind, const ProjectionQuery& query,
                                  prec_t h) {
    const std::size_t S = query.pbar.size();
    if (S > 4) throw std::invalid_argument("oracle_project_grid: supports at most S = 4");
    if (!(h > 0)) throw std::invalid_argument("oracle_project_grid: h must be positive");
    const long n = std::lround(1.0 / h);
    const long min_part = (kind == DivergenceKind::KL || kind == DivergenceKind::Burg) ? 1 : 0;
    if (n < min_part * static_cast<long>(S)) return INFTY;

    numvec p(S, 0.0);
    prec_t best = INFTY;
    auto enumerate = [&](auto&& self, std::size_t i, long remaining) -> void {
        if (i + 1 == S) {
            if (remaining < min_part) return;
            p[i] = static_cast<prec_t>(remaining) / static_cast<prec_t>(n);
            if (dot(query.b, p) <= query.beta) {
                const prec_t d = divergence(kind, p, query.pbar);
                best = std::min(best, d);
            }
            return;
        }
        const long reserve = min_part * static_cast<long>(S - i - 1);
        for (long c = min_part; c <= remaining - reserve; ++c) {
            p[i] = static_cast<prec_t>(c) / static_cast<prec_t>(n);
            self(self, i + 1, remaining - c);
        }
    };
    enumerate(enumerate, 0, n);
    return best;
}

/**
 * @brief Documented slack L*h of the lattice bound for the given query.
 *
 * L envelops the divergence gradient over the lattice neighborhood of the
 * optimum plus the feasibility-restoring mass shift: 4Sh for variation,
 * 4Sh/min{pbar} for chi-squared, and 4Sh(1 + log(1/(h min{pbar}))) for KL and
 * Burg whose gradients grow logarithmically toward the restricted boundary.
 */
inline prec_t oracle_grid_slack(DivergenceKind kind, const ProjectionQuery& query, prec_t h) {
    const prec_t S = static_cast<prec_t>(query.pbar.size());
    prec_t pmin = 1.0;
    for (prec_t p : query.pbar)
        if (p > 0) pmin = std::min(pmin, p);
    switch (kind) {
    case DivergenceKind::Variation: return 4.0 * S * h;
    case DivergenceKind::ChiSquared: return 4.0 * S * h / pmin;
    case DivergenceKind::KL:
    case DivergenceKind::Burg: return 4.0 * S * h * (1.0 + std::log(1.0 / (h * pmin)));
    }
    return 0;
}

/**
 * @brief Dual lower bound: maximum of the bivariate dual objective over a grid.
 *
 * Every in-domain evaluation with alpha >= 0 lower-bounds the projection value
 * by weak duality, so the grid maximum is always a valid lower bound.
 * Out-of-domain grid points are skipped.
 */
inline prec_t oracle_dual_scan(DivergenceKind kind, const ProjectionQuery& query,
                               const numvec& alphas, const numvec& zetas) {
    prec_t best = -INFTY;
    for (prec_t alpha : alphas) {
        if (alpha < 0) continue;
        for (prec_t zeta : zetas)
            best = std::max(best, dual_objective(kind, alpha, zeta, query));
    }
    return best;
}

/**
 * @brief Default scan grids: geometric alpha spacing over [0, alpha_cap] and a
 * linear zeta range spanning the conjugate domains, with (0, 0) always included.
 *
 * alpha_cap follows the per-kind bound on the optimal dual: the KL bisection
 * bound log(1/min pbar)/(beta - min b), 1/(beta - min b) for Burg after
 * unscaling, the largest candidate breakpoint for variation, and a
 * sensitivity-based envelope for chi-squared.
 */
inline std::pair<numvec, numvec> default_dual_grids(DivergenceKind kind,
                                                    const ProjectionQuery& query,
                                                    std::size_t n_alpha = 160,
                                                    std::size_t n_zeta = 160) {
    const bool drop = kind == DivergenceKind::KL || kind == DivergenceKind::ChiSquared;
    prec_t bmin = INFTY, bmax = 0, pmin = 1.0;
    for (std::size_t i = 0; i < query.b.size(); ++i) {
        if (drop && query.pbar[i] == 0) continue;
        bmin = std::min(bmin, query.b[i]);
        bmax = std::max(bmax, query.b[i]);
        if (query.pbar[i] > 0) pmin = std::min(pmin, query.pbar[i]);
    }
    const prec_t omega = std::max(query.beta - bmin, prec_t(1e-12));

    prec_t alpha_cap = 1.0;
    switch (kind) {
    case DivergenceKind::KL: alpha_cap = std::log(1.0 / pmin) / omega; break;
    case DivergenceKind::Burg: alpha_cap = 1.0 / omega; break;
    case DivergenceKind::Variation: {
        alpha_cap = 1.0;
        for (prec_t bi : query.b)
            if (bi > bmin) alpha_cap = std::max(alpha_cap, 2.0 / (bi - bmin));
        break;
    }
    case DivergenceKind::ChiSquared: alpha_cap = (2.0 / pmin) / omega; break;
    }
    alpha_cap = std::clamp(alpha_cap, prec_t(1e-6), prec_t(1e12));

    numvec alphas{0.0};
    const prec_t lo = alpha_cap * 1e-8;
    const prec_t ratio = std::pow(alpha_cap / lo, 1.0 / static_cast<prec_t>(n_alpha - 1));
    prec_t a = lo;
    for (std::size_t i = 0; i + 1 < n_alpha; ++i, a *= ratio) alphas.push_back(a);

    numvec zetas{0.0};
    const prec_t zlo = -2.5;
    const prec_t zhi = alpha_cap * bmax + 2.0;
    for (std::size_t i = 0; i < n_zeta; ++i)
        zetas.push_back(zlo + (zhi - zlo) * static_cast<prec_t>(i) /
                                  static_cast<prec_t>(n_zeta - 1));
    return {std::move(alphas), std::move(zetas)};
}

namespace detail {

struct OracleProjection {
    ProjectionQuery query;  // beta filled per theta
    numvec alphas, zetas;
    prec_t bmin = 0;  // kind-aware (support-reduced for KL and chi-squared)
    prec_t pbar_dot_b = 0;

    prec_t scan_lower(DivergenceKind kind, prec_t theta) {
        if (theta < bmin) return INFTY;
        if (theta >= pbar_dot_b) return 0;
        query.beta = theta;
        return std::max(oracle_dual_scan(kind, query, alphas, zetas), prec_t(0));
    }
    prec_t grid_upper(DivergenceKind kind, prec_t theta, prec_t h) {
        if (theta < bmin) return INFTY;
        if (theta >= pbar_dot_b) return 0;
        query.beta = theta;
        return oracle_project_grid(kind, query, h);
    }
};

}  // namespace detail

/**
 * @brief Brute-force bracket on the robust Bellman value of one state.
 *
 * Scans theta over [max_a min(r_{sa} + lambda v), Rbar] on a lattice of the
 * given resolution. The left end is the last lattice point certified
 * infeasible by the dual-scan lower bounds (sum over actions > kappa); the
 * right end is the first lattice point certified feasible by the lattice upper
 * bounds (sum <= kappa). Both predicates are monotone in theta, so the flips
 * are located by binary search over the lattice. The returned interval is the
 * flip bracket padded by one resolution step per side so that it also covers
 * the oracle's own value error.
 *
 * @throw std::invalid_argument beyond S = 3 or A = 3.
 */
inline std::pair<prec_t, prec_t> oracle_bellman(const MdpInstance& instance,
                                                const numvec& v, std::size_t s,
                                                prec_t theta_resolution,
                                                prec_t grid_h = 1.0 / 128,
                                                std::size_t scan_points = 96) {
    if (instance.states > 3 || instance.actions > 3)
        throw std::invalid_argument("oracle_bellman: supports at most S = 3, A = 3");
    if (!(theta_resolution > 0))
        throw std::invalid_argument("oracle_bellman: resolution must be positive");

    const prec_t rbar = instance.value_upper_bound();
    std::vector<detail::OracleProjection> actions(instance.actions);
    prec_t lo = -INFTY;
    for (std::size_t a = 0; a < instance.actions; ++a) {
        auto& op = actions[a];
        op.query.pbar.assign(instance.nominal_row(s, a).begin(),
                             instance.nominal_row(s, a).end());
        op.query.b = detail::action_cost_vector(instance, v, s, a);
        const bool drop = instance.kind == DivergenceKind::KL ||
                          instance.kind == DivergenceKind::ChiSquared;
        op.bmin = INFTY;
        op.pbar_dot_b = 0;
        for (std::size_t i = 0; i < op.query.b.size(); ++i) {
            if (drop && op.query.pbar[i] == 0) continue;
            op.bmin = std::min(op.bmin, op.query.b[i]);
            op.pbar_dot_b += op.query.pbar[i] * op.query.b[i];
        }
        lo = std::max(lo, *std::min_element(op.query.b.begin(), op.query.b.end()));
    }
    lo = std::min(lo, rbar);
    for (auto& op : actions) {
        // fixed grids built once near the bottom of the range stay valid lower
        // bounds for every theta and keep the flip predicate monotone
        op.query.beta = lo + theta_resolution;
        std::tie(op.alphas, op.zetas) =
            default_dual_grids(instance.kind, op.query, scan_points, scan_points);
    }

    const long steps = std::max<long>(1, std::lround(std::ceil((rbar - lo) / theta_resolution)));
    auto theta_at = [&](long j) { return lo + static_cast<prec_t>(j) * theta_resolution; };
    auto sum_lower_exceeds = [&](long j) {
        prec_t sum = 0;
        for (auto& op : actions) {
            sum += op.scan_lower(instance.kind, theta_at(j));
            if (sum > instance.kappa) return true;
        }
        return sum > instance.kappa;
    };
    auto sum_upper_within = [&](long j) {
        prec_t sum = 0;
        for (auto& op : actions) {
            sum += op.grid_upper(instance.kind, theta_at(j), grid_h);
            if (sum > instance.kappa) return false;
        }
        return sum <= instance.kappa;
    };

    // last lattice point where the lower bounds certify infeasibility
    long left = -1;
    if (sum_lower_exceeds(0)) {
        long a = 0, b = steps;
        if (sum_lower_exceeds(steps)) {
            left = steps;
        } else {
            while (b - a > 1) {
                const long mid = a + (b - a) / 2;
                (sum_lower_exceeds(mid) ? a : b) = mid;
            }
            left = a;
        }
    }
    // first lattice point where the upper bounds certify feasibility;
    // falling back to the top of the range keeps R-bar as a valid right end
    // when the grid is too coarse to certify anywhere
    long right;
    if (sum_upper_within(0)) {
        right = 0;
    } else if (!sum_upper_within(steps)) {
        right = steps;
    } else {
        long a = 0, b = steps;
        while (b - a > 1) {
            const long mid = a + (b - a) / 2;
            (sum_upper_within(mid) ? b : a) = mid;
        }
        right = b;
    }

    const prec_t theta_left = (left < 0 ? lo : theta_at(left)) - theta_resolution;
    const prec_t theta_right = std::min(theta_at(right), rbar) + theta_resolution;
    return {theta_left, theta_right};
}

}  // namespace phimdp
