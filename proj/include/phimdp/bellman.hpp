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

#include "phimdp/instance.hpp"
#include "phimdp/projections.hpp"

// Robust Bellman operator for s-rectangular phi-divergence ambiguity sets.
// Each state update bisects on the candidate value theta; feasibility of a
// candidate is decided by summing delta-accurate projection budgets across
// actions. Value iteration, policy extraction and fixed-policy evaluation are
// layered on top of the state update.

namespace phimdp {

/// Result of one robust Bellman state update.
struct BellmanOutcome {
    enum class Termination {
        IntervalClosed,   ///< the outer bracket shrank below epsilon
        BudgetBracketed,  ///< kappa fell inside [sum lower, sum upper) at theta
    };

    prec_t value = 0;  ///< returned midpoint theta, within epsilon of the exact update
    prec_t lower = 0;  ///< certified bracket on the exact update value
    prec_t upper = 0;
    Termination termination = Termination::IntervalClosed;
    numvec action_duals;      ///< per-action projection duals alpha*_a at the terminal theta
    long outer_iterations = 0;
    prec_t sum_lower = 0;  ///< sum of projection lower bounds at the terminal theta
    prec_t sum_upper = 0;
};

/// Report of a robust value iteration run.
struct VIReport {
    ValueVector value;
    prec_t residual = 0;  ///< sup-norm step length at termination
    long iterations = 0;
    numvec residual_history;
    bool converged = false;
};

/// Worst-case value of a fixed policy. The value is computed with a shared
/// per-action threshold inside each state, which makes it an upper
/// approximation of the exact fixed-policy worst case; the flag records that.
struct PolicyEvaluation {
    ValueVector value;
    bool upper_approximation = false;
};

namespace detail {

inline numvec action_cost_vector(const MdpInstance& instance, const numvec& v,
                                 std::size_t s, std::size_t a) {
    numvec b(instance.states);
    const auto r = instance.reward_row(s, a);
    for (std::size_t sn = 0; sn < instance.states; ++sn)
        b[sn] = r[sn] + instance.discount * v[sn];
    return b;
}

/// max_a min_{s'} { r + lambda v }: initial lower bound of the theta bisection,
/// restricted to the given actions.
inline prec_t theta_lower_bound(const std::vector<numvec>& costs,
                                const std::vector<std::size_t>& actions) {
    prec_t lo = -INFTY;
    for (std::size_t a : actions)
        lo = std::max(lo, *std::min_element(costs[a].begin(), costs[a].end()));
    return lo;
}

/// Projection accuracy prescribed for the state update: epsilon kappa / (2 A Rbar + A epsilon).
inline prec_t inner_delta(const MdpInstance& instance, prec_t epsilon, prec_t rbar) {
    const prec_t a = static_cast<prec_t>(instance.actions);
    return epsilon * instance.kappa / (2.0 * a * rbar + a * epsilon);
}

/// Bisection on theta shared by the Bellman update (all actions) and the
/// fixed-policy evaluation (support actions only).
inline BellmanOutcome theta_bisection(const MdpInstance& instance, std::size_t s,
                                      const std::vector<numvec>& costs,
                                      const std::vector<std::size_t>& actions,
                                      prec_t epsilon, prec_t rbar) {
    const prec_t delta = inner_delta(instance, epsilon, rbar);
    prec_t lo = theta_lower_bound(costs, actions);
    prec_t hi = rbar;
    lo = std::min(lo, hi);

    auto project_all = [&](prec_t theta, numvec& duals, prec_t& sum_lo, prec_t& sum_hi) {
        duals.assign(instance.actions, 0.0);
        sum_lo = sum_hi = 0;
        for (std::size_t a : actions) {
            const ProjectionResult res = detail::project_unchecked(
                instance.kind, instance.nominal_row(s, a), costs[a], theta, delta);
            sum_lo += res.lower;
            sum_hi += res.upper;
            duals[a] = res.dual.value_or(0.0);
        }
    };

    BellmanOutcome out;
    numvec duals;
    prec_t sum_lo = 0, sum_hi = 0;
    bool bracketed = false;
    prec_t theta = 0.5 * (lo + hi);

    while (hi - lo > epsilon) {
        theta = 0.5 * (lo + hi);
        project_all(theta, duals, sum_lo, sum_hi);
        ++out.outer_iterations;
        if (sum_lo <= instance.kappa && instance.kappa < sum_hi) {
            bracketed = true;  // case (ii): theta solves a kappa-perturbed instance exactly
            break;
        }
        if (sum_hi <= instance.kappa)
            hi = theta;
        else
            lo = theta;
    }

    out.lower = lo;
    out.upper = hi;
    if (bracketed) {
        out.termination = BellmanOutcome::Termination::BudgetBracketed;
        out.value = theta;
    } else {
        out.termination = BellmanOutcome::Termination::IntervalClosed;
        out.value = 0.5 * (lo + hi);
        project_all(out.value, duals, sum_lo, sum_hi);
    }
    out.action_duals = std::move(duals);
    out.sum_lower = sum_lo;
    out.sum_upper = sum_hi;
    return out;
}

inline std::vector<std::size_t> all_actions(const MdpInstance& instance) {
    std::vector<std::size_t> actions(instance.actions);
    std::iota(actions.begin(), actions.end(), std::size_t(0));
    return actions;
}

}  // namespace detail

/// Exact non-robust Bellman value of one state: max_a pbar_{sa}^T (r_{sa} + lambda v).
inline prec_t nominal_state_value(const MdpInstance& instance, const numvec& v,
                                  std::size_t s) {
    prec_t best = -INFTY;
    for (std::size_t a = 0; a < instance.actions; ++a) {
        const numvec b = detail::action_cost_vector(instance, v, s, a);
        best = std::max(best, dot(instance.nominal_row(s, a), b));
    }
    return best;
}

/// Exact non-robust Bellman operator applied to all states.
inline ValueVector nominal_bellman(const MdpInstance& instance, const numvec& v) {
    ValueVector out(instance.states);
    for (std::size_t s = 0; s < instance.states; ++s)
        out[s] = nominal_state_value(instance, v, s);
    return out;
}

/**
 * @brief Robust Bellman update of one state to accuracy epsilon.
 *
 * Bisects theta over [max_a min(r_{sa} + lambda v), max{r}/(1-lambda)]. At each
 * midpoint the per-action projections with b_a = r_{sa} + lambda v and
 * threshold theta are solved to accuracy delta = epsilon kappa / (2 A Rbar +
 * A epsilon); theta becomes the new upper bound when the summed upper budgets
 * stay within kappa and the new lower bound when the summed lower budgets
 * exceed it. Terminates when the bracket closes below epsilon or when kappa is
 * bracketed by the budget sums; either way the returned midpoint is within
 * epsilon of the exact update. Expects 0 <= v <= Rbar componentwise.
 *
 * A zero budget short-circuits to the exact nominal update (the prescribed
 * projection accuracy degenerates at kappa = 0).
 *
 * @throw std::invalid_argument for epsilon <= 0.
 */
inline BellmanOutcome robust_bellman_state(const MdpInstance& instance, const numvec& v,
                                           std::size_t s, prec_t epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("robust_bellman_state: epsilon must be positive");
    if (v.size() != instance.states)
        throw std::invalid_argument("robust_bellman_state: value vector has wrong length");

    if (instance.kappa == 0) {
        BellmanOutcome out;
        out.value = out.lower = out.upper = nominal_state_value(instance, v, s);
        out.action_duals.assign(instance.actions, 0.0);
        return out;
    }

    const prec_t rbar = instance.value_upper_bound();
    std::vector<numvec> costs(instance.actions);
    for (std::size_t a = 0; a < instance.actions; ++a)
        costs[a] = detail::action_cost_vector(instance, v, s, a);
    return detail::theta_bisection(instance, s, costs, detail::all_actions(instance),
                                   epsilon, rbar);
}

/// Robust Bellman operator applied to every state (s-rectangularity makes the
/// states independent, so they may also be evaluated concurrently).
inline std::pair<ValueVector, std::vector<BellmanOutcome>>
robust_bellman(const MdpInstance& instance, const numvec& v, prec_t epsilon) {
    ValueVector values(instance.states);
    std::vector<BellmanOutcome> outcomes;
    outcomes.reserve(instance.states);
    for (std::size_t s = 0; s < instance.states; ++s) {
        outcomes.push_back(robust_bellman_state(instance, v, s, epsilon));
        values[s] = outcomes.back().value;
    }
    return {std::move(values), std::move(outcomes)};
}

/**
 * @brief Robust value iteration from v = 0 to accuracy epsilon.
 *
 * Every sweep applies the robust Bellman operator at per-sweep accuracy
 * epsilon (1 - lambda) / 4 and clamps the iterate to [0, Rbar] (the upper
 * bisection bound is only valid on lower estimates of the optimal value).
 * Stops once the sup-norm step drops to epsilon (1 - lambda) / (2 lambda),
 * which guarantees the returned vector is within epsilon of the optimum.
 * Hitting max_iters is reported in the converged flag, not as a fault.
 */
inline VIReport robust_value_iteration(const MdpInstance& instance, prec_t epsilon,
                                       long max_iters = 100000) {
    if (!(epsilon > 0)) throw std::invalid_argument("robust_value_iteration: epsilon must be positive");
    const prec_t rbar = instance.value_upper_bound();
    const prec_t sweep_eps = epsilon * (1.0 - instance.discount) / 4.0;
    const prec_t stop = epsilon * (1.0 - instance.discount) / (2.0 * instance.discount);

    VIReport report;
    report.value.assign(instance.states, 0.0);
    for (long t = 0; t < max_iters; ++t) {
        ValueVector next(instance.states);
        for (std::size_t s = 0; s < instance.states; ++s) {
            const prec_t val = robust_bellman_state(instance, report.value, s, sweep_eps).value;
            next[s] = std::clamp(val, prec_t(0), rbar);
        }
        report.residual = linf_diff(next, report.value);
        report.residual_history.push_back(report.residual);
        report.value = std::move(next);
        ++report.iterations;
        if (report.residual <= stop) {
            report.converged = true;
            break;
        }
    }
    return report;
}

/**
 * @brief Recovers a randomized policy from a converged value vector.
 *
 * Re-runs the state update at v and weights each action by its projection dual
 * alpha*_a at the terminal theta (the dual weights of the equivalent dual
 * program live in the action simplex). When every dual is zero, which includes
 * the nominal kappa = 0 path, the policy falls back to the deterministic
 * argmax of pbar_{sa}^T (r_{sa} + lambda v). The extraction is validated by
 * the policy-evaluation cross-check rather than asserted optimal.
 */
inline Policy extract_policy(const MdpInstance& instance, const numvec& v, prec_t epsilon) {
    Policy policy(instance.states, numvec(instance.actions, 0.0));
    for (std::size_t s = 0; s < instance.states; ++s) {
        const BellmanOutcome out = robust_bellman_state(instance, v, s, epsilon);
        prec_t dual_sum = 0;
        for (prec_t d : out.action_duals) dual_sum += d;
        if (dual_sum > 0) {
            for (std::size_t a = 0; a < instance.actions; ++a)
                policy[s][a] = out.action_duals[a] / dual_sum;
        } else {
            std::size_t best = 0;
            prec_t best_val = -INFTY;
            for (std::size_t a = 0; a < instance.actions; ++a) {
                const numvec b = detail::action_cost_vector(instance, v, s, a);
                const prec_t val = dot(instance.nominal_row(s, a), b);
                if (val > best_val) {
                    best_val = val;
                    best = a;
                }
            }
            policy[s][best] = 1.0;
        }
    }
    return policy;
}

/**
 * @brief Worst-case value of a fixed policy to accuracy epsilon.
 *
 * kappa = 0 reduces to classical policy evaluation, solved exactly by
 * fixed-point iteration. Otherwise every sweep bisects theta per state with
 * the same budget-bracketing rule as the Bellman update, restricted to the
 * policy's support actions and imposing the shared per-action threshold
 * theta_a = theta. The shared threshold makes the result conservative; the
 * returned flag marks it as an upper approximation of the exact worst case.
 *
 * @throw std::invalid_argument when a policy row is not a distribution.
 */
inline PolicyEvaluation evaluate_policy_robust(const MdpInstance& instance,
                                               const Policy& policy, prec_t epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("evaluate_policy_robust: epsilon must be positive");
    if (policy.size() != instance.states)
        throw std::invalid_argument("evaluate_policy_robust: policy must have one row per state");
    for (const auto& row : policy)
        if (row.size() != instance.actions || !is_distribution(row))
            throw std::invalid_argument("evaluate_policy_robust: policy rows must lie in the "
                                        "action simplex");

    const prec_t rbar = instance.value_upper_bound();
    const prec_t sweep_eps = epsilon * (1.0 - instance.discount) / 4.0;
    const prec_t stop = epsilon * (1.0 - instance.discount) / (2.0 * instance.discount);
    const long max_iters = 100000;

    PolicyEvaluation eval;
    eval.upper_approximation = instance.kappa > 0;
    eval.value.assign(instance.states, 0.0);

    for (long t = 0; t < max_iters; ++t) {
        ValueVector next(instance.states);
        for (std::size_t s = 0; s < instance.states; ++s) {
            if (instance.kappa == 0) {
                prec_t val = 0;
                for (std::size_t a = 0; a < instance.actions; ++a) {
                    if (policy[s][a] == 0) continue;
                    const numvec b = detail::action_cost_vector(instance, eval.value, s, a);
                    val += policy[s][a] * dot(instance.nominal_row(s, a), b);
                }
                next[s] = val;
            } else {
                std::vector<std::size_t> support;
                std::vector<numvec> costs(instance.actions);
                for (std::size_t a = 0; a < instance.actions; ++a)
                    if (policy[s][a] > 1e-15) {
                        support.push_back(a);
                        costs[a] = detail::action_cost_vector(instance, eval.value, s, a);
                    }
                const prec_t val =
                    detail::theta_bisection(instance, s, costs, support, sweep_eps, rbar).value;
                next[s] = std::clamp(val, prec_t(0), rbar);
            }
        }
        const prec_t residual = linf_diff(next, eval.value);
        eval.value = std::move(next);
        if (residual <= stop) break;
    }
    return eval;
}

}  // namespace phimdp
