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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phimdp {

using prec_t = double;
using numvec = std::vector<prec_t>;
using numvecvec = std::vector<numvec>;

constexpr prec_t INFTY = std::numeric_limits<prec_t>::infinity();

/// Tolerance on row sums of probability vectors accepted on input. Rows within
/// this tolerance are renormalized exactly once at load time; all solver code
/// may then assume exact simplex membership.
constexpr prec_t SIMPLEX_INPUT_TOL = 1e-12;

/// The four supported phi-divergences.
enum class DivergenceKind { KL, Burg, Variation, ChiSquared };

constexpr std::array<DivergenceKind, 4> all_divergence_kinds = {
    DivergenceKind::KL, DivergenceKind::Burg, DivergenceKind::Variation,
    DivergenceKind::ChiSquared};

inline const char* to_string(DivergenceKind kind) {
    switch (kind) {
    case DivergenceKind::KL: return "kl";
    case DivergenceKind::Burg: return "burg";
    case DivergenceKind::Variation: return "variation";
    case DivergenceKind::ChiSquared: return "chi2";
    }
    return "?";
}

inline std::optional<DivergenceKind> divergence_from_string(std::string_view name) {
    for (auto kind : all_divergence_kinds)
        if (name == to_string(kind)) return kind;
    return std::nullopt;
}

inline prec_t dot(std::span<const prec_t> a, std::span<const prec_t> b) {
    prec_t r = 0;
    for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}

inline prec_t linf_diff(const numvec& a, const numvec& b) {
    prec_t r = 0;
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}

/// Checks non-negativity and unit sum within the given tolerance.
inline bool is_distribution(std::span<const prec_t> p, prec_t tol = 1e-9) {
    prec_t sum = 0;
    for (prec_t x : p) {
        if (x < 0 || !std::isfinite(x)) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
}

/// One generalized projection instance: minimize the divergence to the nominal
/// distribution pbar subject to b^T p <= beta over the probability simplex.
struct ProjectionQuery {
    numvec pbar;          ///< nominal distribution, must lie in the simplex
    numvec b;             ///< non-negative cost vector, same length as pbar
    prec_t beta = 0;      ///< half-space threshold, non-negative
    prec_t delta = 1e-6;  ///< requested accuracy; ignored by the exact solvers
};

enum class ProjectionStatus {
    Solved,      ///< a delta-accurate (or exact) value interval was computed
    Trivial,     ///< beta >= pbar^T b: the nominal distribution is feasible, value 0
    Infeasible,  ///< beta < min{b}: no feasible distribution, value +infinity
};

/// Record of one dual bisection run. The interval halves every iteration and
/// always contains the maximizer.
struct BisectionTrace {
    long iterations = 0;
    prec_t alpha_lo = 0;
    prec_t alpha_hi = 0;
    std::vector<int> derivative_signs;  ///< sign of the derivative at each midpoint
};

/// Certified value interval [lower, upper] for a projection, together with the
/// (near-)optimal dual multiplier of the half-space constraint where available.
struct ProjectionResult {
    prec_t lower = 0;
    prec_t upper = 0;
    std::optional<prec_t> dual;       ///< alpha* of the half-space constraint
    std::optional<prec_t> dual_zeta;  ///< zeta* of the simplex equality constraint
    ProjectionStatus status = ProjectionStatus::Solved;
    BisectionTrace trace;
};

/// Value-to-go per state.
using ValueVector = numvec;

/// Randomized stationary policy: one row per state, each row in the action simplex.
using Policy = numvecvec;

}  // namespace phimdp
