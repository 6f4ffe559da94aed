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

#include "phimdp/instance.hpp"
#include "phimdp/instancegen.hpp"
#include "phimdp/projections.hpp"

using namespace phimdp;
using Catch::Approx;

TEST_CASE("projection queries are reproducible and in range", "[instancegen]") {
    SECTION("identical seeds give identical queries") {
        const auto a = random_projection_instance(6, 42);
        const auto b = random_projection_instance(6, 42);
        CHECK(a.pbar == b.pbar);
        CHECK(a.b == b.b);
        CHECK(a.beta == b.beta);
        const auto c = random_projection_instance(6, 43);
        CHECK(a.beta != c.beta);
    }
    SECTION("beta avoids the trivial and infeasible branches by construction") {
        for (unsigned seed = 0; seed < 500; ++seed) {
            const auto q = random_projection_instance(2 + seed % 4, seed);
            const prec_t bmin = *std::min_element(q.b.begin(), q.b.end());
            CHECK(q.beta >= bmin + 1e-8);
            CHECK(q.beta <= dot(q.pbar, q.b) - 1e-8);
            CHECK(std::abs(std::accumulate(q.pbar.begin(), q.pbar.end(), 0.0) - 1.0) <= 1e-12);
            CHECK(project(DivergenceKind::Variation, q).status == ProjectionStatus::Solved);
        }
    }
    SECTION("S below 2 is rejected") {
        CHECK_THROWS_AS(random_projection_instance(1, 0), std::invalid_argument);
    }
}

TEST_CASE("cost components have the uniform mean", "[instancegen]") {
    const std::size_t S = 3;
    numvec mean(S, 0.0);
    const int samples = 10000;
    for (int i = 0; i < samples; ++i) {
        const auto q = random_projection_instance(S, 50000 + static_cast<unsigned>(i));
        for (std::size_t k = 0; k < S; ++k) mean[k] += q.b[k];
    }
    for (std::size_t k = 0; k < S; ++k) {
        mean[k] /= samples;
        CHECK(mean[k] >= 0.48);
        CHECK(mean[k] <= 0.52);
    }
}

TEST_CASE("random instances are valid and reproducible", "[instancegen]") {
    SECTION("reproducibility") {
        const auto a = random_rmdp(4, 3, 42, 0.95, DivergenceKind::Burg);
        const auto b = random_rmdp(4, 3, 42, 0.95, DivergenceKind::Burg);
        CHECK(a.rewards == b.rewards);
        CHECK(a.nominal == b.nominal);
        CHECK(a.kappa == b.kappa);
    }
    SECTION("validity across seeds") {
        for (unsigned seed = 0; seed < 50; ++seed) {
            const auto instance = random_rmdp(3, 2, seed, 0.95, DivergenceKind::ChiSquared);
            CHECK(validate(instance).empty());
            CHECK(instance.kappa >= 0.0);
            CHECK(instance.kappa <= 1.0);
            CHECK(instance.discount == 0.95);
            for (std::size_t s = 0; s < instance.states; ++s)
                for (std::size_t a = 0; a < instance.actions; ++a)
                    CHECK(is_distribution(instance.nominal_row(s, a), 1e-12));
        }
    }
    SECTION("size validation") {
        CHECK_THROWS_AS(random_rmdp(1, 2, 0), std::invalid_argument);
        CHECK_THROWS_AS(random_rmdp(3, 0, 0), std::invalid_argument);
    }
}
