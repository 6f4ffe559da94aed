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
#include "phimdp/instance.hpp"
#include "phimdp/instancegen.hpp"

using namespace phimdp;
using Catch::Approx;

namespace {

MdpInstance two_state_instance() {
    MdpInstance instance;
    instance.states = 2;
    instance.actions = 1;
    instance.discount = 0.9;
    instance.kappa = 0.2;
    instance.kind = DivergenceKind::KL;
    instance.rewards = {1.0, 0.5, 0.25, 0.0};
    instance.nominal = {0.5, 0.5, 0.25, 0.75};
    return instance;
}

}  // namespace

TEST_CASE("validation accepts a well-formed instance", "[instance]") {
    CHECK(validate(two_state_instance()).empty());
}

TEST_CASE("validation reports field and index", "[instance]") {
    SECTION("nominal row sum") {
        auto instance = two_state_instance();
        instance.nominal[0] = 0.4;  // row (0,0) now sums to 0.9
        const auto violations = validate(instance);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].find("nominal[0,0") != std::string::npos);
        CHECK(violations[0].find("0.9") != std::string::npos);
    }
    SECTION("discount range") {
        auto instance = two_state_instance();
        instance.discount = 1.0;
        const auto violations = validate(instance);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].find("discount") != std::string::npos);
    }
    SECTION("negative reward") {
        auto instance = two_state_instance();
        instance.rewards[2] = -0.25;
        const auto violations = validate(instance);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].find("rewards[1,0,0]") != std::string::npos);
    }
    SECTION("bad initial distribution") {
        auto instance = two_state_instance();
        instance.initial_dist = numvec{0.4, 0.4};
        const auto violations = validate(instance);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].find("initial_dist") != std::string::npos);
    }
}

TEST_CASE("minimal single-state document", "[instance]") {
    const std::string doc = R"({"states":1,"actions":1,"discount":0.9,"kappa":0.0,
        "divergence":"kl","rewards":[0.5],"nominal":[1.0]})";
    const MdpInstance instance = read_instance(doc);
    CHECK(instance.states == 1);
    CHECK(instance.actions == 1);
    CHECK(instance.nominal == numvec{1.0});
    CHECK(instance.value_upper_bound() == Approx(5.0));
}

TEST_CASE("parse errors name the offending field", "[instance]") {
    SECTION("missing discount") {
        const std::string doc = R"({"states":1,"actions":1,"kappa":0.0,
            "divergence":"kl","rewards":[0.5],"nominal":[1.0]})";
        CHECK_THROWS_WITH(read_instance(doc), Catch::Matchers::ContainsSubstring("discount"));
    }
    SECTION("malformed JSON") {
        CHECK_THROWS_WITH(read_instance("{\"states\": 1,"),
                          Catch::Matchers::ContainsSubstring("instance document"));
    }
    SECTION("unknown divergence") {
        const std::string doc = R"({"states":1,"actions":1,"discount":0.9,"kappa":0.0,
            "divergence":"hellinger","rewards":[0.5],"nominal":[1.0]})";
        CHECK_THROWS_WITH(read_instance(doc), Catch::Matchers::ContainsSubstring("divergence"));
    }
    SECTION("validation failure surfaces the violation") {
        const std::string doc = R"({"states":1,"actions":1,"discount":0.9,"kappa":0.0,
            "divergence":"kl","rewards":[0.5],"nominal":[0.9]})";
        CHECK_THROWS_WITH(read_instance(doc), Catch::Matchers::ContainsSubstring("nominal"));
    }
}

TEST_CASE("write then read round trip", "[instance]") {
    for (unsigned seed : {1u, 2u, 3u}) {
        auto instance = random_rmdp(4, 3, seed, 0.9, DivergenceKind::ChiSquared);
        instance.initial_dist = numvec{0.25, 0.25, 0.25, 0.25};
        const MdpInstance again = read_instance(write_instance(instance));
        REQUIRE(again.states == instance.states);
        REQUIRE(again.actions == instance.actions);
        CHECK(again.discount == instance.discount);
        CHECK(again.kappa == instance.kappa);
        CHECK(again.kind == instance.kind);
        for (std::size_t i = 0; i < instance.rewards.size(); ++i) {
            CHECK(std::abs(again.rewards[i] - instance.rewards[i]) <= 1e-15);
            CHECK(std::abs(again.nominal[i] - instance.nominal[i]) <= 1e-15);
        }
        // further cycles stay within the same per-entry tolerance
        const MdpInstance third = read_instance(write_instance(again));
        for (std::size_t i = 0; i < instance.nominal.size(); ++i)
            CHECK(std::abs(third.nominal[i] - again.nominal[i]) <= 1e-15);
    }
}

TEST_CASE("value upper bound dominates the nominal Bellman image", "[instance]") {
    Rng rng(5, 9);
    for (unsigned seed = 0; seed < 10; ++seed) {
        const auto instance = random_rmdp(4, 2, 900 + seed, 0.85, DivergenceKind::Burg);
        const prec_t rbar = instance.value_upper_bound();
        numvec v(instance.states);
        for (auto& x : v) x = rng.uniform(0.0, rbar);
        const auto image = nominal_bellman(instance, v);
        for (prec_t x : image) CHECK(x <= rbar + 1e-12);
    }
}
