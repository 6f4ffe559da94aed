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

#include "phimdp/definitions.hpp"
#include "phimdp/divergence.hpp"

// Fast solvers for the generalized projection of a nominal distribution onto
// the probability simplex intersected with a half-space b^T p <= beta:
//
//     minimize d(p, pbar)  subject to  b^T p <= beta,  p in the simplex.
//
// KL and Burg entropy reduce to univariate concave maximization solved by
// bisection on the derivative to a certified delta-accurate value interval.
// Variation distance and chi-squared distance are solved exactly in
// O(S log S) by a candidate search and a sorted subproblem sweep.

namespace phimdp {

namespace detail {

/// Degenerate-threshold floor: below this margin of beta over min{b} the
/// bisection solvers report the limit behavior instead of bisecting.
constexpr prec_t OMEGA_FLOOR = 1e-12;

/// Query with zero-probability indices optionally dropped and the scalar
/// statistics every solver needs. Views into the caller's vectors unless
/// indices had to be dropped, which keeps the solver hot path allocation-free.
struct ReducedQuery {
    std::span<const prec_t> pbar;
    std::span<const prec_t> b;
    prec_t beta = 0;
    prec_t delta = 0;
    prec_t bmin = 0;
    prec_t bmax = 0;
    prec_t pbar_dot_b = 0;
    prec_t pbar_min = 0;  ///< smallest retained (positive) nominal probability

    ReducedQuery() = default;
    ReducedQuery(const ReducedQuery&) = delete;  // spans may point into owned_
    ReducedQuery& operator=(const ReducedQuery&) = delete;
    ReducedQuery(ReducedQuery&&) = default;

    numvec owned_pbar, owned_b;  ///< compacted storage, used only when dropping
};

/// KL and chi-squared force p = 0 wherever pbar = 0, so those indices are
/// dropped from the index set; Burg and variation keep them (mass may move
/// onto them), which matters for min{b}.
inline bool drops_zero_support(DivergenceKind kind) {
    return kind == DivergenceKind::KL || kind == DivergenceKind::ChiSquared;
}

inline ReducedQuery reduce_query(DivergenceKind kind, std::span<const prec_t> pbar,
                                 std::span<const prec_t> b, prec_t beta, prec_t delta) {
    ReducedQuery r;
    r.beta = beta;
    r.delta = delta;
    bool must_drop = false;
    if (drops_zero_support(kind))
        for (prec_t p : pbar)
            if (p == 0) {
                must_drop = true;
                break;
            }
    if (must_drop) {
        r.owned_pbar.reserve(pbar.size());
        r.owned_b.reserve(b.size());
        for (std::size_t i = 0; i < pbar.size(); ++i)
            if (pbar[i] != 0) {
                r.owned_pbar.push_back(pbar[i]);
                r.owned_b.push_back(b[i]);
            }
        r.pbar = r.owned_pbar;
        r.b = r.owned_b;
    } else {
        r.pbar = pbar;
        r.b = b;
    }
    r.bmin = INFTY;
    r.bmax = 0;
    r.pbar_min = INFTY;
    for (std::size_t i = 0; i < r.pbar.size(); ++i) {
        r.bmin = std::min(r.bmin, r.b[i]);
        r.bmax = std::max(r.bmax, r.b[i]);
        r.pbar_dot_b += r.pbar[i] * r.b[i];
        if (r.pbar[i] > 0) r.pbar_min = std::min(r.pbar_min, r.pbar[i]);
    }
    return r;
}

inline void validate_query(const ProjectionQuery& query) {
    if (query.pbar.empty() || query.pbar.size() != query.b.size())
        throw std::invalid_argument("projection query: pbar and b must be non-empty "
                                    "vectors of equal length");
    if (!(query.delta > 0))
        throw std::invalid_argument("projection query: delta must be positive");
    if (!(query.beta >= 0))
        throw std::invalid_argument("projection query: beta must be non-negative");
    for (prec_t x : query.b)
        if (!(x >= 0) || !std::isfinite(x))
            throw std::invalid_argument("projection query: b must be finite and non-negative");
    if (!is_distribution(query.pbar))
        throw std::invalid_argument("projection query: pbar must lie in the simplex");
}

inline ProjectionResult trivial_result() {
    ProjectionResult res;
    res.lower = res.upper = 0;
    res.dual = 0;
    res.dual_zeta = 0;
    res.status = ProjectionStatus::Trivial;
    return res;
}

inline ProjectionResult infeasible_result() {
    ProjectionResult res;
    res.lower = res.upper = INFTY;
    res.status = ProjectionStatus::Infeasible;
    return res;
}

/// Shared derivative-sign bisection for a concave univariate objective whose
/// maximizer lies in [lo, hi]. Halves the interval until its width drops to
/// tol; an exact zero derivative collapses the interval on the spot.
template <typename Derivative>
inline BisectionTrace bisect_concave(prec_t lo, prec_t hi, prec_t tol,
                                     Derivative&& derivative) {
    BisectionTrace trace;
    // hard cap: the expected count plus slack against floating-point stalls
    const prec_t width0 = hi - lo;
    long max_iters = 0;
    if (width0 > tol) {
        const prec_t expected = std::ceil(std::log2(width0 / std::max(tol, prec_t(1e-300))));
        max_iters = std::min(static_cast<long>(expected) + 8, long(4096));
    }
    while (hi - lo > tol && trace.iterations < max_iters) {
        const prec_t mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at floating-point resolution
        const prec_t d = derivative(mid);
        ++trace.iterations;
        if (d > 0) {
            trace.derivative_signs.push_back(1);
            lo = mid;
        } else if (d < 0) {
            trace.derivative_signs.push_back(-1);
            hi = mid;
        } else {
            trace.derivative_signs.push_back(0);
            lo = hi = mid;  // optimum found exactly
            break;
        }
    }
    trace.alpha_lo = lo;
    trace.alpha_hi = hi;
    return trace;
}

/// log( sum_i pbar_i e^{-alpha b_i} ), evaluated in the max-shifted form so it
/// stays finite for the large alpha the initial bound can reach.
inline prec_t log_sum_exp_neg(const ReducedQuery& r, prec_t alpha) {
    prec_t sum = 0;
    for (std::size_t i = 0; i < r.b.size(); ++i)
        sum += r.pbar[i] * std::exp(-alpha * (r.b[i] - r.bmin));
    return -alpha * r.bmin + std::log(sum);
}

// ---------------------------------------------------------------------------
// Kullback-Leibler divergence
// ---------------------------------------------------------------------------

inline ProjectionResult solve_kl(const ReducedQuery& r) {
    ProjectionResult res;
    res.status = ProjectionStatus::Solved;

    const prec_t omega = r.beta - r.bmin;
    if (omega < OMEGA_FLOOR) {
        // Limit behavior: all mass is forced onto the argmin of b, so the
        // value is -log of the nominal mass on that set. The supremum of the
        // dual is approached but not attained, so no dual is reported.
        prec_t mass = 0;
        for (std::size_t i = 0; i < r.b.size(); ++i)
            if (r.b[i] == r.bmin) mass += r.pbar[i];
        res.lower = res.upper = -std::log(mass);
        return res;
    }

    const prec_t alpha_hi0 = std::log(1.0 / r.pbar_min) / omega;
    auto f = [&r](prec_t alpha) { return -r.beta * alpha - log_sum_exp_neg(r, alpha); };
    auto fprime = [&r](prec_t alpha) {
        prec_t s = 0, sb = 0;
        for (std::size_t i = 0; i < r.b.size(); ++i) {
            const prec_t w = r.pbar[i] * std::exp(-alpha * (r.b[i] - r.bmin));
            s += w;
            sb += w * r.b[i];
        }
        return -r.beta + sb / s;
    };

    res.trace = bisect_concave(0.0, alpha_hi0, r.delta / r.bmax, fprime);
    const prec_t width = res.trace.alpha_hi - res.trace.alpha_lo;
    res.lower = f(res.trace.alpha_lo);
    res.upper = std::min(res.lower + r.bmax * width, res.lower + r.delta);
    res.dual = 0.5 * (res.trace.alpha_lo + res.trace.alpha_hi);
    res.dual_zeta = -log_sum_exp_neg(r, *res.dual);
    return res;
}

// ---------------------------------------------------------------------------
// Burg entropy
// ---------------------------------------------------------------------------

inline ProjectionResult solve_burg(const ReducedQuery& r) {
    const prec_t omega = r.beta - r.bmin;
    if (omega < OMEGA_FLOOR) {
        // Burg forbids shrinking the support, so the limit value is +infinity.
        return infeasible_result();
    }

    auto g = [&r, omega](prec_t u) {
        prec_t sum = 0;
        for (std::size_t i = 0; i < r.b.size(); ++i)
            if (r.pbar[i] > 0) sum += r.pbar[i] * std::log1p(u * (r.b[i] - r.beta) / omega);
        return sum;
    };
    auto gprime = [&r, omega](prec_t u) {
        prec_t sum = 0;
        for (std::size_t i = 0; i < r.b.size(); ++i)
            if (r.pbar[i] > 0)
                sum += r.pbar[i] * (r.b[i] - r.beta) / (omega + u * (r.b[i] - r.beta));
        return sum;
    };

    ProjectionResult res;
    res.status = ProjectionStatus::Solved;
    res.trace = bisect_concave(0.0, 1.0, r.delta * omega / r.bmax, gprime);
    const prec_t width = res.trace.alpha_hi - res.trace.alpha_lo;
    res.lower = g(res.trace.alpha_lo);
    res.upper = std::min(res.lower + (r.bmax / omega) * width, res.lower + r.delta);
    // the bisection variable is the rescaled alpha <- (beta - min{b}) alpha;
    // keep the reported point strictly inside the conjugate domain
    const prec_t u_mid =
        std::min(0.5 * (res.trace.alpha_lo + res.trace.alpha_hi), prec_t(1) - prec_t(1e-12));
    res.dual = u_mid / omega;
    res.dual_zeta = *res.dual * r.beta;
    return res;
}

// ---------------------------------------------------------------------------
// Variation distance (exact)
// ---------------------------------------------------------------------------

inline ProjectionResult solve_variation(const ReducedQuery& r) {
    // concave piecewise-linear dual objective restricted to its breakpoints
    auto h = [&r](prec_t alpha) {
        prec_t sum = 0;
        for (std::size_t i = 0; i < r.b.size(); ++i) {
            const prec_t term = 2.0 + alpha * (r.bmin - r.b[i]);
            if (term > 0) sum += r.pbar[i] * term;
        }
        return 2.0 + alpha * (r.bmin - r.beta) - sum;
    };

    numvec candidates{0.0};
    for (prec_t bi : r.b)
        if (bi > r.bmin) candidates.push_back(2.0 / (bi - r.bmin));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // ternary search over the concave sequence of candidate values
    std::size_t lo = 0, hi = candidates.size() - 1;
    while (hi - lo > 2) {
        const std::size_t m1 = lo + (hi - lo) / 3;
        const std::size_t m2 = hi - (hi - lo) / 3;
        if (h(candidates[m1]) < h(candidates[m2]))
            lo = m1 + 1;
        else
            hi = m2;
    }
    prec_t best_val = -INFTY, best_alpha = 0;
    for (std::size_t k = lo; k <= hi; ++k) {
        const prec_t val = h(candidates[k]);
        if (val > best_val) {
            best_val = val;
            best_alpha = candidates[k];
        }
    }

    ProjectionResult res;
    res.status = ProjectionStatus::Solved;
    res.lower = res.upper = std::max(best_val, prec_t(0));
    res.dual = best_alpha;
    // zeta sits on the conjugate-domain boundary 1 + alpha min{b}; report it a
    // few ulps inside so the dual point evaluates finitely in floating point
    const prec_t boundary = 1.0 + best_alpha * r.bmin;
    res.dual_zeta = boundary - 4 * std::numeric_limits<prec_t>::epsilon() *
                                   std::max(prec_t(1), std::abs(boundary));
    res.trace.alpha_lo = res.trace.alpha_hi = best_alpha;
    return res;
}

// ---------------------------------------------------------------------------
// Chi-squared distance (exact)
// ---------------------------------------------------------------------------

/// One candidate for the chi-squared dual: ζ restricted to the line u + v α,
/// the objective becomes the concave quadratic qa α² + qb α + qc on [lo, hi].
struct Chi2Candidate {
    prec_t value = -INFTY;
    prec_t alpha = 0;
    prec_t zeta = 0;
};

inline void chi2_consider(Chi2Candidate& best, prec_t P, prec_t Q, prec_t B, prec_t C,
                          prec_t beta, prec_t u, prec_t v, prec_t lo, prec_t hi) {
    lo = std::max(lo, prec_t(0));
    if (std::isinf(lo) || lo > hi) return;
    const prec_t qa = -0.25 * C + 0.5 * B * v - 0.25 * Q * v * v;
    const prec_t qb = v - Q * v + 0.5 * B * u - 0.5 * Q * u * v - beta + B;
    const prec_t qc = P + u - Q * u - 0.25 * Q * u * u;
    prec_t alpha;
    if (qa < 0) {
        alpha = -qb / (2 * qa);
        alpha = std::max(alpha, lo);
        if (!std::isinf(hi)) alpha = std::min(alpha, hi);
    } else {
        // qa == 0 within the reachable cases, and then qb <= 0 by weak duality
        alpha = (qb > 0 && !std::isinf(hi)) ? hi : lo;
    }
    const prec_t value = (qa * alpha + qb) * alpha + qc;
    if (value > best.value) best = {value, alpha, u + v * alpha};
}

inline ProjectionResult solve_chi2(const ReducedQuery& r) {
    const std::size_t n = r.b.size();
    std::vector<std::pair<prec_t, prec_t>> sorted(n);  // (b, pbar), b non-increasing
    for (std::size_t i = 0; i < n; ++i) sorted[i] = {r.b[i], r.pbar[i]};
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& x, const auto& y) { return x.first > y.first; });

    // walk the splits from empty tail to full tail, accumulating the tail sums
    Chi2Candidate best;
    prec_t Q = 0, B = 0, C = 0;
    for (std::size_t split = n + 1; split-- > 0;) {
        if (split < n) {
            const auto [bk, pk] = sorted[split];
            Q += pk;
            B += pk * bk;
            C += pk * bk * bk;
        }
        const prec_t P = 1.0 - Q;
        if (split < n) {
            const prec_t b_tail_top = sorted[split].first;
            const prec_t d_lo = Q * b_tail_top - B;
            // interior stationary zeta: zeta = 2P/Q + (B/Q) alpha
            {
                prec_t lo = 0, hi = INFTY;
                if (split >= 1) {
                    const prec_t d_hi = Q * sorted[split - 1].first - B;
                    lo = d_hi > 0 ? 2.0 / d_hi : INFTY;
                }
                if (d_lo > 0) hi = 2.0 / d_lo;
                chi2_consider(best, P, Q, B, C, r.beta, 2.0 * P / Q, B / Q, lo, hi);
            }
            // zeta pinned at the lower box edge -2 + alpha * b_tail_top
            if (d_lo > 0)
                chi2_consider(best, P, Q, B, C, r.beta, -2.0, b_tail_top, 2.0 / d_lo, INFTY);
        }
        if (split >= 1) {
            // zeta pinned at the upper box edge -2 + alpha * b_head_bottom
            const prec_t b_head_bottom = sorted[split - 1].first;
            prec_t hi = INFTY;
            if (split < n) {
                const prec_t d_hi = Q * b_head_bottom - B;
                if (d_hi > 0) hi = 2.0 / d_hi;
            }
            chi2_consider(best, P, Q, B, C, r.beta, -2.0, b_head_bottom, 0.0, hi);
        }
    }

    ProjectionResult res;
    res.status = ProjectionStatus::Solved;
    res.lower = res.upper = std::max(best.value, prec_t(0));
    res.dual = best.alpha;
    res.dual_zeta = best.zeta;
    res.trace.alpha_lo = res.trace.alpha_hi = best.alpha;
    return res;
}

/// Trivial/infeasible handling plus kind dispatch, without input validation.
/// The hot path for callers that construct queries from already-validated data.
inline ProjectionResult project_unchecked(DivergenceKind kind, std::span<const prec_t> pbar,
                                          std::span<const prec_t> b, prec_t beta,
                                          prec_t delta) {
    const ReducedQuery r = reduce_query(kind, pbar, b, beta, delta);
    if (beta >= r.pbar_dot_b) return trivial_result();
    if (beta < r.bmin) return infeasible_result();
    switch (kind) {
    case DivergenceKind::KL: return solve_kl(r);
    case DivergenceKind::Burg: return solve_burg(r);
    case DivergenceKind::Variation: return solve_variation(r);
    case DivergenceKind::ChiSquared: return solve_chi2(r);
    }
    throw std::logic_error("project: unknown divergence kind");
}

inline ProjectionResult dispatch(DivergenceKind kind, const ProjectionQuery& query) {
    validate_query(query);
    return project_unchecked(kind, query.pbar, query.b, query.beta, query.delta);
}

}  // namespace detail

/**
 * @brief Solves the generalized projection for the given divergence.
 *
 * Handles the trivial case (beta >= pbar^T b, value 0) and the infeasible case
 * (beta < min{b}, value +infinity) before dispatching to the kind-specific
 * solver. Solved results satisfy upper - lower <= delta; the variation and
 * chi-squared solvers are exact (lower == upper).
 */
inline ProjectionResult project(DivergenceKind kind, const ProjectionQuery& query) {
    return detail::dispatch(kind, query);
}

/// KL projection via bisection on the univariate dual -beta a - log sum pbar e^{-a b},
/// evaluated in log-sum-exp form. Delta-accurate.
inline ProjectionResult project_kl(const ProjectionQuery& query) {
    return detail::dispatch(DivergenceKind::KL, query);
}

/// Burg-entropy projection via bisection of the rescaled dual over [0,1].
/// Delta-accurate; beta at min{b} reports +infinity (support cannot shrink).
inline ProjectionResult project_burg(const ProjectionQuery& query) {
    return detail::dispatch(DivergenceKind::Burg, query);
}

/// Variation-distance projection, exact: ternary search over the sorted
/// breakpoints of the concave piecewise-linear dual.
inline ProjectionResult project_variation(const ProjectionQuery& query) {
    return detail::dispatch(DivergenceKind::Variation, query);
}

/// Chi-squared projection, exact: sorts b and solves the three box-constrained
/// univariate quadratics of every head/tail split analytically.
inline ProjectionResult project_chi2(const ProjectionQuery& query) {
    return detail::dispatch(DivergenceKind::ChiSquared, query);
}

}  // namespace phimdp
