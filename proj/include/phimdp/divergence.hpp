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

namespace phimdp {

/// Value of the convex conjugate phi*(y). When the argument lies outside the
/// conjugate's effective domain, in_domain is false and value is +infinity.
struct ConjugateValue {
    prec_t value = 0;
    bool in_domain = true;
};

/**
 * @brief The generator function phi(t) of the divergence, defined for t >= 0.
 *
 * phi is convex with phi(1) = 0. phi(0) is taken as the right limit:
 * 1 for KL, variation and chi-squared, +infinity for Burg entropy.
 *
 * @throw std::domain_error for negative t.
 */
inline prec_t phi(DivergenceKind kind, prec_t t) {
    if (t < 0) throw std::domain_error("phi: argument must be non-negative");
    switch (kind) {
    case DivergenceKind::KL:
        return t == 0 ? 1.0 : t * std::log(t) - t + 1.0;
    case DivergenceKind::Burg:
        return t == 0 ? INFTY : -std::log(t) + t - 1.0;
    case DivergenceKind::Variation:
        return std::abs(t - 1.0);
    case DivergenceKind::ChiSquared:
        return (t - 1.0) * (t - 1.0);
    }
    return 0;
}

/**
 * @brief Convex conjugate phi*(y) = sup_{t >= 0} { y t - phi(t) }.
 *
 * KL: e^y - 1 everywhere. Burg: -log(1 - y) for y < 1, out of domain otherwise.
 * Variation: max{-1, y} for y <= 1 (finite limit 1 kept at the boundary), out
 * of domain for y > 1. Chi-squared: y + y^2/4 for y >= -2 and -1 below.
 */
inline ConjugateValue phi_conjugate(DivergenceKind kind, prec_t y) {
    switch (kind) {
    case DivergenceKind::KL:
        return {std::expm1(y), true};
    case DivergenceKind::Burg:
        if (y < 1.0) return {-std::log1p(-y), true};
        return {INFTY, false};
    case DivergenceKind::Variation:
        if (y <= 1.0) return {std::max(prec_t(-1), y), true};
        return {INFTY, false};
    case DivergenceKind::ChiSquared:
        if (y >= -2.0) return {y + 0.25 * y * y, true};
        return {-1.0, true};
    }
    return {0, true};
}

/**
 * @brief The divergence d(p, pbar) = sum_i pbar_i phi(p_i / pbar_i).
 *
 * Entries with pbar_i = 0 contribute p_i * phi'(inf), the standard perspective
 * convention: +infinity for KL and chi-squared when p_i > 0 (support of p must
 * be contained in the support of pbar), p_i for Burg and variation. On the
 * simplex the result matches the familiar closed forms, e.g. sum p log(p/pbar)
 * for KL and sum |p - pbar| for the variation distance.
 *
 * @throw std::invalid_argument when the vectors have different lengths.
 */
inline prec_t divergence(DivergenceKind kind, std::span<const prec_t> p,
                         std::span<const prec_t> pbar) {
    if (p.size() != pbar.size())
        throw std::invalid_argument("divergence: vectors of unequal length");
    prec_t total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (pbar[i] > 0) {
            prec_t term = pbar[i] * phi(kind, p[i] / pbar[i]);
            if (std::isinf(term)) return INFTY;
            total += term;
        } else if (p[i] > 0) {
            switch (kind) {
            case DivergenceKind::KL:
            case DivergenceKind::ChiSquared:
                return INFTY;
            case DivergenceKind::Burg:
            case DivergenceKind::Variation:
                total += p[i];
                break;
            }
        }
    }
    return total;
}

/**
 * @brief Lagrangian dual objective of the generalized projection,
 *        g(alpha, zeta) = -beta alpha + zeta - sum_i pbar_i phi*(-alpha b_i + zeta).
 *
 * Any evaluation with alpha >= 0 is a lower bound on the projection value (weak
 * duality); the supremum over (alpha, zeta) attains it under strict feasibility.
 * Terms with pbar_i = 0 are dropped (0 * phi* evaluates to 0). Returns -infinity
 * when any conjugate argument with positive weight is out of domain.
 *
 * @throw std::invalid_argument for alpha < 0.
 */
inline prec_t dual_objective(DivergenceKind kind, prec_t alpha, prec_t zeta,
                             const ProjectionQuery& query) {
    if (alpha < 0) throw std::invalid_argument("dual_objective: alpha must be non-negative");
    prec_t sum = 0;
    for (std::size_t i = 0; i < query.pbar.size(); ++i) {
        if (query.pbar[i] == 0) continue;
        const ConjugateValue c = phi_conjugate(kind, -alpha * query.b[i] + zeta);
        if (!c.in_domain || std::isinf(c.value)) return -INFTY;
        sum += query.pbar[i] * c.value;
    }
    return -query.beta * alpha + zeta - sum;
}

}  // namespace phimdp
