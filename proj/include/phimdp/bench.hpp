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

#include <chrono>
#include <iomanip>
#include <sstream>

#include "phimdp/bellman.hpp"
#include "phimdp/instancegen.hpp"
#include "phimdp/oracle.hpp"
#include "phimdp/projections.hpp"

// Benchmark harness. Timings bracket the solver call only (instance generation
// and I/O are excluded), use a monotonic clock, and are preceded by one
// untimed warm-up trial per configuration.

namespace phimdp {

/// One timing measurement row of the benchmark CSV.
struct BenchRecord {
    DivergenceKind divergence = DivergenceKind::KL;
    std::string operation;  ///< "projection" or "bellman"
    std::size_t S = 0;
    std::size_t A = 0;      ///< 0 for projection rows
    std::string solver;     ///< "fast" or "oracle"
    long trials = 0;
    prec_t mean_ms = 0;
    prec_t std_ms = 0;
    prec_t p50_ms = 0;
    std::uint64_t seed = 0;
    prec_t tol = 0;  ///< delta for projections, epsilon for Bellman updates
};

inline std::string bench_csv_header() {
    return "divergence,operation,S,A,solver,trials,mean_ms,std_ms,p50_ms,seed,tol";
}

inline std::string to_csv(const BenchRecord& rec) {
    std::ostringstream out;
    out << to_string(rec.divergence) << ',' << rec.operation << ',' << rec.S << ','
        << rec.A << ',' << rec.solver << ',' << rec.trials << ',' << std::fixed
        << std::setprecision(6) << rec.mean_ms << ',' << rec.std_ms << ',' << rec.p50_ms
        << std::defaultfloat << ',' << rec.seed << ',' << rec.tol;
    return out.str();
}

namespace detail {

inline void timing_stats(numvec times_ms, BenchRecord& rec) {
    const std::size_t n = times_ms.size();
    rec.trials = static_cast<long>(n);
    prec_t mean = 0;
    for (prec_t t : times_ms) mean += t;
    mean /= static_cast<prec_t>(n);
    prec_t var = 0;
    for (prec_t t : times_ms) var += (t - mean) * (t - mean);
    rec.mean_ms = mean;
    rec.std_ms = n > 1 ? std::sqrt(var / static_cast<prec_t>(n - 1)) : 0.0;
    std::sort(times_ms.begin(), times_ms.end());
    rec.p50_ms = n % 2 == 1 ? times_ms[n / 2]
                            : 0.5 * (times_ms[n / 2 - 1] + times_ms[n / 2]);
}

template <typename Work>
inline prec_t time_ms(Work&& work) {
    const auto start = std::chrono::steady_clock::now();
    work();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<prec_t, std::milli>(stop - start).count();
}

inline std::uint64_t trial_seed(std::uint64_t seed, long trial) {
    return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1));
}

}  // namespace detail

/**
 * @brief Times the projection solver on random queries of dimension S.
 *
 * One fresh seeded query per trial; the oracle variant times the lattice
 * enumeration instead and is limited to S <= 4.
 */
inline BenchRecord bench_projection(DivergenceKind kind, std::size_t S, long trials,
                                    std::uint64_t seed, prec_t delta,
                                    bool oracle_solver = false, prec_t oracle_h = 1.0 / 64) {
    BenchRecord rec;
    rec.divergence = kind;
    rec.operation = "projection";
    rec.S = S;
    rec.A = 0;
    rec.solver = oracle_solver ? "oracle" : "fast";
    rec.seed = seed;
    rec.tol = delta;

    numvec times;
    times.reserve(static_cast<std::size_t>(trials));
    for (long t = -1; t < trials; ++t) {
        const ProjectionQuery query =
            random_projection_instance(S, detail::trial_seed(seed, std::max(t, 0L)), delta);
        prec_t elapsed;
        if (oracle_solver) {
            volatile prec_t sink;
            elapsed = detail::time_ms([&] { sink = oracle_project_grid(kind, query, oracle_h); });
            (void)sink;
        } else {
            volatile prec_t sink;
            elapsed = detail::time_ms([&] { sink = project(kind, query).lower; });
            (void)sink;
        }
        if (t >= 0) times.push_back(elapsed);  // trial -1 is the warm-up
    }
    detail::timing_stats(std::move(times), rec);
    return rec;
}

/**
 * @brief Times one robust Bellman state update (state 0) on random square
 * instances with S = A, at accuracy epsilon and a random value vector.
 *
 * Timing a single state keeps the grid of 50-trial measurements tractable; the
 * full-operator cost is the per-state cost summed over S independent states.
 */
inline BenchRecord bench_bellman(DivergenceKind kind, std::size_t S, long trials,
                                 std::uint64_t seed, prec_t epsilon) {
    BenchRecord rec;
    rec.divergence = kind;
    rec.operation = "bellman";
    rec.S = S;
    rec.A = S;
    rec.solver = "fast";
    rec.seed = seed;
    rec.tol = epsilon;

    numvec times;
    times.reserve(static_cast<std::size_t>(trials));
    for (long t = -1; t < trials; ++t) {
        const std::uint64_t s = detail::trial_seed(seed, std::max(t, 0L));
        const MdpInstance instance = random_rmdp(S, S, s, 0.95, kind);
        const prec_t rbar = instance.value_upper_bound();
        Rng rng(s, 77);
        numvec v(S);
        for (auto& x : v) x = rng.uniform(0.0, rbar);
        volatile prec_t sink;
        const prec_t elapsed =
            detail::time_ms([&] { sink = robust_bellman_state(instance, v, 0, epsilon).value; });
        (void)sink;
        if (t >= 0) times.push_back(elapsed);
    }
    detail::timing_stats(std::move(times), rec);
    return rec;
}

/// Least-squares slope of log(p50_ms) against log(S) across records. The
/// median is used because single scheduling hiccups skew small-sample means.
inline prec_t loglog_slope(const std::vector<BenchRecord>& records) {
    prec_t sx = 0, sy = 0, sxx = 0, sxy = 0;
    const prec_t n = static_cast<prec_t>(records.size());
    for (const auto& rec : records) {
        const prec_t x = std::log(static_cast<prec_t>(rec.S));
        const prec_t y = std::log(std::max(rec.p50_ms, prec_t(1e-9)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace phimdp
