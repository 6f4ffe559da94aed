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
#include "phimdp/instance.hpp"

// Deterministic seeded generators for random projection queries and random
// RMDP instances. The generator is a named, platform-independent 64-bit one
// (xoshiro256++ seeded through splitmix64) with an explicit stream per tensor,
// so the same seed yields bit-identical output everywhere.

namespace phimdp {

/// Identifier of the generator algorithm, recorded in output metadata.
inline constexpr const char* rng_algorithm_id = "splitmix64+xoshiro256++/v1";

namespace rngstream {
constexpr std::uint64_t costs = 1;    ///< b vectors of projection queries
constexpr std::uint64_t nominal = 2;  ///< pbar vectors and nominal kernel rows
constexpr std::uint64_t beta = 3;
constexpr std::uint64_t rewards = 4;
constexpr std::uint64_t kappa = 5;
}  // namespace rngstream

/// xoshiro256++ with splitmix64 seeding; uniform doubles in [0, 1).
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed ^ (stream * 0x9e3779b97f4a7c15ULL);
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    prec_t uniform01() { return static_cast<prec_t>(next() >> 11) * 0x1.0p-53; }

    prec_t uniform(prec_t lo, prec_t hi) { return lo + (hi - lo) * uniform01(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_{};
};

namespace detail {

inline numvec random_simplex_point(Rng& rng, std::size_t S) {
    numvec p(S);
    prec_t sum = 0;
    do {
        sum = 0;
        for (auto& x : p) {
            x = rng.uniform01();
            sum += x;
        }
    } while (sum == 0);
    for (auto& x : p) x /= sum;
    return p;
}

}  // namespace detail

/**
 * @brief Random projection query: b ~ U(0,1)^S, pbar a normalized U(0,1)^S
 * draw, beta ~ U(min{b} + 1e-8, pbar^T b - 1e-8).
 *
 * b and pbar are regenerated whenever the beta interval is empty, so generated
 * queries never hit the trivial or infeasible dispatcher branches. Identical
 * seeds produce identical queries.
 *
 * @throw std::invalid_argument for S < 2.
 */
inline ProjectionQuery random_projection_instance(std::size_t S, std::uint64_t seed,
                                                  prec_t delta = 1e-6) {
    if (S < 2) throw std::invalid_argument("random_projection_instance: S must be at least 2");
    Rng rng_b(seed, rngstream::costs);
    Rng rng_p(seed, rngstream::nominal);
    Rng rng_beta(seed, rngstream::beta);

    ProjectionQuery query;
    query.delta = delta;
    constexpr prec_t margin = 1e-8;
    while (true) {
        query.b.resize(S);
        for (auto& x : query.b) x = rng_b.uniform01();
        query.pbar = detail::random_simplex_point(rng_p, S);
        const prec_t lo = *std::min_element(query.b.begin(), query.b.end()) + margin;
        const prec_t hi = dot(query.pbar, query.b) - margin;
        if (lo < hi) {
            query.beta = rng_beta.uniform(lo, hi);
            return query;
        }
    }
}

/**
 * @brief Random RMDP: nominal rows via the normalized-uniform procedure,
 * rewards ~ U(0,1), kappa ~ U(0,1); deterministic in the seed.
 *
 * The discount default of 0.95 and the U(0,1) rewards are generation defaults
 * of this library, recorded alongside the RNG id in output metadata.
 *
 * @throw std::invalid_argument for S < 2 or A < 1.
 */
inline MdpInstance random_rmdp(std::size_t S, std::size_t A, std::uint64_t seed,
                               prec_t discount = 0.95,
                               DivergenceKind kind = DivergenceKind::KL) {
    if (S < 2) throw std::invalid_argument("random_rmdp: S must be at least 2");
    if (A < 1) throw std::invalid_argument("random_rmdp: A must be at least 1");
    if (!(discount > 0 && discount < 1))
        throw std::invalid_argument("random_rmdp: discount must lie in (0,1)");

    MdpInstance instance;
    instance.states = S;
    instance.actions = A;
    instance.discount = discount;
    instance.kind = kind;

    Rng rng_rewards(seed, rngstream::rewards);
    Rng rng_nominal(seed, rngstream::nominal);
    Rng rng_kappa(seed, rngstream::kappa);

    instance.rewards.resize(S * A * S);
    for (auto& r : instance.rewards) r = rng_rewards.uniform01();
    instance.nominal.resize(S * A * S);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) {
            const numvec row = detail::random_simplex_point(rng_nominal, S);
            std::copy(row.begin(), row.end(),
                      instance.nominal.begin() + static_cast<long>(instance.index(s, a, 0)));
        }
    instance.kappa = rng_kappa.uniform01();
    return instance;
}

}  // namespace phimdp
