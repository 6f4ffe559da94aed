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

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "phimdp/definitions.hpp"

namespace phimdp {

/**
 * @brief A robust MDP instance with an s-rectangular phi-divergence ambiguity set.
 *
 * Rewards and the nominal transition kernel are stored as flat tensors of
 * shape S x A x S in (s, a, s') order, s-major. All types in this library are
 * immutable after construction in the sense that no operation mutates a shared
 * instance; sharing across threads is safe.
 */
struct MdpInstance {
    std::size_t states = 0;   ///< S, number of states
    std::size_t actions = 0;  ///< A, number of actions (all admissible everywhere)
    numvec rewards;           ///< r[s,a,s'] >= 0, flat length S*A*S
    numvec nominal;           ///< nominal kernel, each row nominal[s,a,.] in the simplex
    prec_t discount = 0;      ///< lambda in (0,1)
    prec_t kappa = 0;         ///< uncertainty budget, >= 0
    DivergenceKind kind = DivergenceKind::KL;
    std::optional<numvec> initial_dist;  ///< optional initial distribution, length S

    std::size_t index(std::size_t s, std::size_t a, std::size_t snext) const {
        return (s * actions + a) * states + snext;
    }
    std::span<const prec_t> nominal_row(std::size_t s, std::size_t a) const {
        return {nominal.data() + index(s, a, 0), states};
    }
    std::span<const prec_t> reward_row(std::size_t s, std::size_t a) const {
        return {rewards.data() + index(s, a, 0), states};
    }

    prec_t max_reward() const {
        prec_t m = 0;
        for (prec_t r : rewards) m = std::max(m, r);
        return m;
    }

    /// Global upper bound max{r} / (1 - lambda) on all values reachable from
    /// value estimates below the optimum.
    prec_t value_upper_bound() const { return max_reward() / (1.0 - discount); }
};

/**
 * @brief Checks all instance invariants and reports violations as data.
 *
 * Returns an empty list iff the instance is well-formed. Each violation names
 * the offending field and index. Validation never throws.
 */
inline std::vector<std::string> validate(const MdpInstance& instance) {
    std::vector<std::string> violations;
    auto report = [&violations](const std::string& msg) { violations.push_back(msg); };

    if (instance.states < 1) report("states: must be a positive count");
    if (instance.actions < 1) report("actions: must be a positive count");
    if (!(instance.discount > 0.0 && instance.discount < 1.0))
        report("discount: must lie strictly inside (0,1), got " + std::to_string(instance.discount));
    if (!(instance.kappa >= 0.0)) report("kappa: must be non-negative");

    const std::size_t expected = instance.states * instance.actions * instance.states;
    if (instance.rewards.size() != expected)
        report("rewards: expected length " + std::to_string(expected) + ", got " +
               std::to_string(instance.rewards.size()));
    if (instance.nominal.size() != expected)
        report("nominal: expected length " + std::to_string(expected) + ", got " +
               std::to_string(instance.nominal.size()));
    if (!violations.empty()) return violations;

    for (std::size_t s = 0; s < instance.states; ++s) {
        for (std::size_t a = 0; a < instance.actions; ++a) {
            prec_t row_sum = 0;
            for (std::size_t sn = 0; sn < instance.states; ++sn) {
                const prec_t p = instance.nominal[instance.index(s, a, sn)];
                const prec_t r = instance.rewards[instance.index(s, a, sn)];
                if (!(p >= 0) || !std::isfinite(p))
                    report("nominal[" + std::to_string(s) + "," + std::to_string(a) + "," +
                           std::to_string(sn) + "]: must be a finite non-negative probability");
                if (!(r >= 0) || !std::isfinite(r))
                    report("rewards[" + std::to_string(s) + "," + std::to_string(a) + "," +
                           std::to_string(sn) + "]: must be finite and non-negative");
                row_sum += p;
            }
            if (std::abs(row_sum - 1.0) > SIMPLEX_INPUT_TOL)
                report("nominal[" + std::to_string(s) + "," + std::to_string(a) +
                       ",.]: row sums to " + std::to_string(row_sum) +
                       ", outside 1e-12 of 1");
        }
    }
    if (instance.initial_dist) {
        if (instance.initial_dist->size() != instance.states)
            report("initial_dist: expected length " + std::to_string(instance.states));
        else if (!is_distribution(*instance.initial_dist, SIMPLEX_INPUT_TOL))
            report("initial_dist: not a probability distribution within 1e-12");
    }
    return violations;
}

/// Rescales every nominal row (and the initial distribution) to sum to one
/// exactly once, so solver code can assume exact simplex membership downstream.
inline void renormalize_rows(MdpInstance& instance) {
    for (std::size_t s = 0; s < instance.states; ++s)
        for (std::size_t a = 0; a < instance.actions; ++a) {
            prec_t sum = 0;
            for (std::size_t sn = 0; sn < instance.states; ++sn)
                sum += instance.nominal[instance.index(s, a, sn)];
            if (sum > 0)
                for (std::size_t sn = 0; sn < instance.states; ++sn)
                    instance.nominal[instance.index(s, a, sn)] /= sum;
        }
    if (instance.initial_dist) {
        prec_t sum = std::accumulate(instance.initial_dist->begin(),
                                     instance.initial_dist->end(), prec_t(0));
        if (sum > 0)
            for (prec_t& p : *instance.initial_dist) p /= sum;
    }
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end())
        throw std::runtime_error(std::string("instance document: missing field \"") + key + "\"");
    return *it;
}

inline numvec read_numvec(const nlohmann::json& node, const char* key) {
    if (!node.is_array())
        throw std::runtime_error(std::string("instance document: field \"") + key +
                                 "\" must be an array of numbers");
    numvec out;
    out.reserve(node.size());
    for (const auto& x : node) {
        if (!x.is_number())
            throw std::runtime_error(std::string("instance document: field \"") + key +
                                     "\" must contain only numbers");
        out.push_back(x.get<prec_t>());
    }
    return out;
}

}  // namespace detail

/**
 * @brief Parses an instance document (UTF-8 JSON) and validates it.
 *
 * Expected keys: "states", "actions", "discount", "kappa", "divergence"
 * (one of "kl", "burg", "variation", "chi2"), "rewards" and "nominal" (flat
 * arrays of length S*A*S in s-major (s, a, s') order) and optionally
 * "initial_dist". Nominal rows are renormalized exactly once after validation.
 *
 * @throw std::runtime_error with field context on parse or validation failure.
 */
inline MdpInstance read_instance(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("instance document: ") + e.what());
    }
    if (!doc.is_object())
        throw std::runtime_error("instance document: top level must be a JSON object");

    MdpInstance instance;
    const auto& states_node = detail::require_field(doc, "states");
    const auto& actions_node = detail::require_field(doc, "actions");
    if (!states_node.is_number_integer() || !actions_node.is_number_integer())
        throw std::runtime_error("instance document: \"states\" and \"actions\" must be integers");
    const long long states = states_node.get<long long>();
    const long long actions = actions_node.get<long long>();
    if (states < 1 || actions < 1)
        throw std::runtime_error("instance document: \"states\" and \"actions\" must be positive");
    instance.states = static_cast<std::size_t>(states);
    instance.actions = static_cast<std::size_t>(actions);

    const auto& discount_node = detail::require_field(doc, "discount");
    const auto& kappa_node = detail::require_field(doc, "kappa");
    if (!discount_node.is_number() || !kappa_node.is_number())
        throw std::runtime_error("instance document: \"discount\" and \"kappa\" must be numbers");
    instance.discount = discount_node.get<prec_t>();
    instance.kappa = kappa_node.get<prec_t>();

    const auto& div_node = detail::require_field(doc, "divergence");
    if (!div_node.is_string())
        throw std::runtime_error("instance document: \"divergence\" must be a string");
    const auto kind = divergence_from_string(div_node.get<std::string>());
    if (!kind)
        throw std::runtime_error("instance document: \"divergence\" must be one of "
                                 "kl, burg, variation, chi2");
    instance.kind = *kind;

    instance.rewards = detail::read_numvec(detail::require_field(doc, "rewards"), "rewards");
    instance.nominal = detail::read_numvec(detail::require_field(doc, "nominal"), "nominal");
    if (doc.contains("initial_dist"))
        instance.initial_dist = detail::read_numvec(doc["initial_dist"], "initial_dist");

    const auto violations = validate(instance);
    if (!violations.empty()) {
        std::string msg = "instance document failed validation:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw std::runtime_error(msg);
    }
    renormalize_rows(instance);
    return instance;
}

/// Serializes an instance to the JSON document format with full round-trip
/// float precision. write then read is the identity on well-formed instances.
inline std::string write_instance(const MdpInstance& instance) {
    nlohmann::json doc;
    doc["states"] = instance.states;
    doc["actions"] = instance.actions;
    doc["discount"] = instance.discount;
    doc["kappa"] = instance.kappa;
    doc["divergence"] = to_string(instance.kind);
    doc["rewards"] = instance.rewards;
    doc["nominal"] = instance.nominal;
    if (instance.initial_dist) doc["initial_dist"] = *instance.initial_dist;
    return doc.dump();
}

inline MdpInstance load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return read_instance(buffer.str());
}

inline void save_instance(const MdpInstance& instance, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << write_instance(instance);
    out << '\n';
}

}  // namespace phimdp
