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

#include <catch2/catch_amalgamated.hpp>

#include "phimdp/bellman.hpp"
#include "phimdp/instancegen.hpp"
#include "phimdp/oracle.hpp"

using namespace phimdp;
using Catch::Approx;

namespace {

numvec random_value(const MdpInstance& instance, std::uint64_t seed) {
    Rng rng(seed, 21);
    numvec v(instance.states);
    const prec_t rbar = instance.value_upper_bound();
    for (auto& x : v) x = rng.uniform(0.0, rbar);
    return v;
}

MdpInstance deterministic_chain() {
    MdpInstance instance;
    instance.states = 2;
    instance.actions = 1;
    instance.discount = 0.5;
    instance.kappa = 0.0;
    instance.kind = DivergenceKind::KL;
    instance.rewards = {0.0, 1.0, 0.0, 0.0};
    instance.nominal = {0.0, 1.0, 0.0, 1.0};
    return instance;
}

MdpInstance single_state(DivergenceKind kind, prec_t reward, prec_t discount, prec_t kappa) {
    MdpInstance instance;
    instance.states = 1;
    instance.actions = 1;
    instance.discount = discount;
    instance.kappa = kappa;
    instance.kind = kind;
    instance.rewards = {reward};
    instance.nominal = {1.0};
    return instance;
}

}  // namespace

TEST_CASE("zero budget short-circuits to the nominal update", "[bellman]") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        auto instance = random_rmdp(3, 2, 100 + seed, 0.9, DivergenceKind::KL);
        instance.kappa = 0.0;
        const numvec v = random_value(instance, seed);
        const auto robust = robust_bellman(instance, v, 1e-5).first;
        const auto nominal = nominal_bellman(instance, v);
        CHECK(linf_diff(robust, nominal) <= 1e-5);
    }
}

TEST_CASE("huge variation budget reaches the per-state lower bound", "[bellman]") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        auto instance = random_rmdp(3, 2, 200 + seed, 0.9, DivergenceKind::Variation);
        instance.kappa = 2.0 * static_cast<prec_t>(instance.actions) + 0.25;
        const numvec v = random_value(instance, seed);
        const auto out = robust_bellman_state(instance, v, 0, 1e-4);
        prec_t lower = -INFTY;
        for (std::size_t a = 0; a < instance.actions; ++a) {
            const auto b = detail::action_cost_vector(instance, v, 0, a);
            lower = std::max(lower, *std::min_element(b.begin(), b.end()));
        }
        CHECK(out.value == Approx(lower).margin(1e-4));
    }
}

TEST_CASE("state update lies inside the brute-force bracket", "[bellman]") {
    int budget_bracketed = 0;
    for (auto kind : all_divergence_kinds) {
        for (unsigned i = 0; i < 10; ++i) {
            const auto instance = random_rmdp(2, 2, 300 + i, 0.95, kind);
            const numvec v = random_value(instance, 300 + i);
            const auto out = robust_bellman_state(instance, v, 0, 1e-3);
            const auto [lo, hi] = oracle_bellman(instance, v, 0, 1e-3);
            CHECK(lo <= out.value);
            CHECK(out.value <= hi);
            CHECK(out.lower <= out.value);
            CHECK(out.value <= out.upper);
            if (out.termination == BellmanOutcome::Termination::BudgetBracketed) {
                ++budget_bracketed;
                CHECK(out.sum_lower <= instance.kappa);
                CHECK(instance.kappa < out.sum_upper);
            } else {
                CHECK(out.upper - out.lower <= 1e-3);
            }
        }
    }
    INFO("budget-bracketed terminations: " << budget_bracketed);
}

TEST_CASE("operator structure on random pairs", "[bellman]") {
    const prec_t eps = 1e-3;
    for (auto kind : all_divergence_kinds) {
        for (unsigned i = 0; i < 5; ++i) {
            const auto instance = random_rmdp(5, 3, 400 + i, 0.95, kind);
            const prec_t rbar = instance.value_upper_bound();
            const numvec v = random_value(instance, 41 + i);
            const numvec w = random_value(instance, 97 + i);
            const auto Jv = robust_bellman(instance, v, eps).first;
            const auto Jw = robust_bellman(instance, w, eps).first;

            // contraction
            CHECK(linf_diff(Jv, Jw) <= instance.discount * linf_diff(v, w) + 2 * eps);
            // robust never exceeds nominal
            const auto nominal = nominal_bellman(instance, v);
            for (std::size_t s = 0; s < instance.states; ++s)
                CHECK(Jv[s] <= nominal[s] + eps);
            // larger budget means smaller worst case
            auto wider = instance;
            wider.kappa += 0.5;
            const auto Jv_wider = robust_bellman(wider, v, eps).first;
            for (std::size_t s = 0; s < instance.states; ++s)
                CHECK(Jv[s] >= Jv_wider[s] - 2 * eps);
            // monotonicity
            numvec vmax(instance.states), vmin(instance.states);
            for (std::size_t s = 0; s < instance.states; ++s) {
                vmax[s] = std::max(v[s], w[s]);
                vmin[s] = std::min(v[s], w[s]);
            }
            const auto Jmax = robust_bellman(instance, vmax, eps).first;
            const auto Jmin = robust_bellman(instance, vmin, eps).first;
            for (std::size_t s = 0; s < instance.states; ++s)
                CHECK(Jmin[s] <= Jmax[s] + 2 * eps);
            // constant shift moves the image by lambda times the shift
            const prec_t c = 0.25;
            bool in_range = true;
            for (prec_t x : vmax)
                if (x + c > rbar) in_range = false;
            if (in_range) {
                numvec shifted(instance.states);
                for (std::size_t s = 0; s < instance.states; ++s) shifted[s] = vmax[s] + c;
                const auto Jshift = robust_bellman(instance, shifted, eps).first;
                for (std::size_t s = 0; s < instance.states; ++s)
                    CHECK(Jshift[s] == Approx(Jmax[s] + instance.discount * c).margin(2 * eps));
            }
        }
    }
}

TEST_CASE("upper-bound updates are confirmed by the lattice oracle", "[bellman]") {
    // whenever the summed projection upper budgets certify a candidate theta,
    // an independent feasible lattice kernel with the same budget must exist
    for (auto kind : all_divergence_kinds) {
        for (unsigned i = 0; i < 5; ++i) {
            const auto instance = random_rmdp(2, 2, 350 + i, 0.95, kind);
            const numvec v = random_value(instance, 350 + i);
            const prec_t rbar = instance.value_upper_bound();
            prec_t lo = -INFTY;
            std::vector<numvec> costs(instance.actions);
            for (std::size_t a = 0; a < instance.actions; ++a) {
                costs[a] = detail::action_cost_vector(instance, v, 0, a);
                lo = std::max(lo, *std::min_element(costs[a].begin(), costs[a].end()));
            }
            for (int k = 1; k <= 5; ++k) {
                const prec_t theta = lo + (rbar - lo) * static_cast<prec_t>(k) / 6.0;
                prec_t sum_upper = 0, grid_sum = 0, slack_sum = 0;
                const prec_t h = 1.0 / 256;
                for (std::size_t a = 0; a < instance.actions; ++a) {
                    ProjectionQuery q;
                    q.pbar.assign(instance.nominal_row(0, a).begin(),
                                  instance.nominal_row(0, a).end());
                    q.b = costs[a];
                    q.beta = theta;
                    q.delta = 1e-6;
                    sum_upper += project(instance.kind, q).upper;
                    grid_sum += oracle_project_grid(instance.kind, q, h);
                    slack_sum += oracle_grid_slack(instance.kind, q, h);
                }
                if (sum_upper <= instance.kappa)
                    CHECK(grid_sum <= instance.kappa + slack_sum);
            }
        }
    }
}

TEST_CASE("argument validation", "[bellman]") {
    const auto instance = random_rmdp(3, 2, 1, 0.9, DivergenceKind::KL);
    const numvec v(3, 0.0);
    CHECK_THROWS_AS(robust_bellman_state(instance, v, 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(robust_bellman_state(instance, numvec(2, 0.0), 0, 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(robust_value_iteration(instance, -1.0), std::invalid_argument);
}

TEST_CASE("value iteration analytic fixed points", "[bellman]") {
    SECTION("single state converges to r/(1-lambda) for every kind") {
        for (auto kind : all_divergence_kinds) {
            const auto instance = single_state(kind, 0.8, 0.7, 0.4);
            const auto report = robust_value_iteration(instance, 1e-5);
            REQUIRE(report.converged);
            CHECK(report.value[0] == Approx(0.8 / 0.3).margin(1e-5));
        }
    }
    SECTION("deterministic two-state chain") {
        const auto report = robust_value_iteration(deterministic_chain(), 1e-6);
        REQUIRE(report.converged);
        CHECK(report.value[0] == Approx(1.0).margin(1e-6));
        CHECK(report.value[1] == Approx(0.0).margin(1e-6));
    }
    SECTION("non-convergence is a flag, not a fault") {
        const auto report = robust_value_iteration(deterministic_chain(), 1e-9, 1);
        CHECK_FALSE(report.converged);
        CHECK(report.iterations == 1);
    }
}

TEST_CASE("value iteration fixed-point residual and decay", "[bellman]") {
    const prec_t eps = 1e-4;
    for (auto kind : all_divergence_kinds) {
        const auto instance = random_rmdp(4, 3, 555, 0.9, kind);
        const auto report = robust_value_iteration(instance, eps);
        REQUIRE(report.converged);
        const auto image = robust_bellman(instance, report.value, eps).first;
        CHECK(linf_diff(image, report.value) <= 2 * eps);

        const prec_t rbar = instance.value_upper_bound();
        for (std::size_t t = 0; t < report.residual_history.size(); ++t)
            CHECK(report.residual_history[t] <=
                  std::pow(instance.discount, static_cast<prec_t>(t)) * rbar + 4 * eps);
        // the step lengths keep shrinking once iteration has settled
        for (std::size_t t = 1; t < report.residual_history.size(); ++t)
            CHECK(report.residual_history[t] <= report.residual_history[t - 1] + 2 * eps);
        CHECK(report.residual == report.residual_history.back());
    }
}

TEST_CASE("policy extraction", "[bellman]") {
    SECTION("zero budget gives the deterministic argmax policy") {
        auto instance = random_rmdp(3, 3, 777, 0.9, DivergenceKind::KL);
        instance.kappa = 0.0;
        const auto report = robust_value_iteration(instance, 1e-5);
        const auto policy = extract_policy(instance, report.value, 1e-5);
        for (std::size_t s = 0; s < instance.states; ++s) {
            prec_t best = -INFTY;
            std::size_t best_a = 0;
            for (std::size_t a = 0; a < instance.actions; ++a) {
                const auto b = detail::action_cost_vector(instance, report.value, s, a);
                const prec_t val = dot(instance.nominal_row(s, a), b);
                if (val > best) {
                    best = val;
                    best_a = a;
                }
            }
            CHECK(policy[s][best_a] == 1.0);
        }
    }
    SECTION("single action always selects it") {
        const auto instance = random_rmdp(3, 1, 778, 0.9, DivergenceKind::Variation);
        const auto report = robust_value_iteration(instance, 1e-4);
        const auto policy = extract_policy(instance, report.value, 1e-4);
        for (const auto& row : policy) CHECK(row[0] == Approx(1.0));
    }
    SECTION("rows are distributions and the policy nearly attains the optimum") {
        for (auto kind : all_divergence_kinds) {
            const prec_t eps = 1e-4;
            const auto instance = random_rmdp(3, 2, 779, 0.9, kind);
            const auto report = robust_value_iteration(instance, eps);
            const auto policy = extract_policy(instance, report.value, eps);
            for (const auto& row : policy) CHECK(is_distribution(row, 1e-12));
            const auto eval = evaluate_policy_robust(instance, policy, eps);
            for (std::size_t s = 0; s < instance.states; ++s)
                CHECK(eval.value[s] >= report.value[s] - 4 * eps);
        }
    }
}

TEST_CASE("fixed-policy evaluation", "[bellman]") {
    SECTION("zero budget is classical policy evaluation") {
        auto instance = random_rmdp(3, 2, 888, 0.9, DivergenceKind::KL);
        instance.kappa = 0.0;
        const Policy uniform(3, numvec(2, 0.5));
        const auto eval = evaluate_policy_robust(instance, uniform, 1e-6);
        CHECK_FALSE(eval.upper_approximation);
        // verify the fixed point of the policy-averaged nominal operator
        numvec image(instance.states, 0.0);
        for (std::size_t s = 0; s < instance.states; ++s)
            for (std::size_t a = 0; a < instance.actions; ++a) {
                const auto b = detail::action_cost_vector(instance, eval.value, s, a);
                image[s] += uniform[s][a] * dot(instance.nominal_row(s, a), b);
            }
        CHECK(linf_diff(image, eval.value) <= 1e-5);
    }
    SECTION("single action matches value iteration") {
        const auto instance = random_rmdp(3, 1, 889, 0.9, DivergenceKind::ChiSquared);
        const prec_t eps = 1e-4;
        const auto report = robust_value_iteration(instance, eps);
        const auto eval = evaluate_policy_robust(instance, Policy(3, numvec{1.0}), eps);
        CHECK(eval.upper_approximation);
        CHECK(linf_diff(eval.value, report.value) <= 2 * eps);
    }
    SECTION("symmetric instance yields a symmetric value") {
        // swapping the two states maps the instance onto itself
        MdpInstance instance;
        instance.states = 2;
        instance.actions = 2;
        instance.discount = 0.8;
        instance.kappa = 0.3;
        instance.kind = DivergenceKind::Variation;
        instance.rewards = {0.5, 1.0, 1.0, 0.5, 1.0, 0.5, 0.5, 1.0};
        instance.nominal = {0.25, 0.75, 0.5, 0.5, 0.75, 0.25, 0.5, 0.5};
        const Policy uniform(2, numvec(2, 0.5));
        const auto eval = evaluate_policy_robust(instance, uniform, 1e-5);
        CHECK(eval.value[0] == Approx(eval.value[1]).margin(1e-4));
    }
    SECTION("invalid policies are rejected") {
        const auto instance = random_rmdp(2, 2, 890, 0.9, DivergenceKind::KL);
        CHECK_THROWS_AS(evaluate_policy_robust(instance, Policy(2, numvec{0.7, 0.7}), 1e-4),
                        std::invalid_argument);
        CHECK_THROWS_AS(evaluate_policy_robust(instance, Policy(1, numvec{0.5, 0.5}), 1e-4),
                        std::invalid_argument);
    }
}
