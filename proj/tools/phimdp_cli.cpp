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

// Command-line front end: solve projections, run robust value iteration,
// benchmark the solvers, and generate random instances.
//
// Exit codes: 0 success (Solved/Trivial projections included), 1 usage or
// input error, 2 infeasible projection, 3 value iteration did not converge.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "phimdp/phimdp.hpp"

namespace {

using namespace phimdp;

DivergenceKind parse_kind(const std::string& name) {
    const auto kind = divergence_from_string(name);
    if (!kind)
        throw CLI::ValidationError("--div", "must be one of kl, burg, variation, chi2");
    return *kind;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Projection-query document: {"pbar": [...], "b": [...], "beta": x, "delta": d}.
ProjectionQuery read_projection_query(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("query document: ") + e.what());
    }
    ProjectionQuery query;
    for (const char* key : {"pbar", "b", "beta"})
        if (!doc.contains(key))
            throw std::runtime_error(std::string("query document: missing field \"") + key + "\"");
    query.pbar = doc["pbar"].get<numvec>();
    query.b = doc["b"].get<numvec>();
    query.beta = doc["beta"].get<prec_t>();
    if (doc.contains("delta")) query.delta = doc["delta"].get<prec_t>();
    return query;
}

const char* status_name(ProjectionStatus status) {
    switch (status) {
    case ProjectionStatus::Solved: return "solved";
    case ProjectionStatus::Trivial: return "trivial";
    case ProjectionStatus::Infeasible: return "infeasible";
    }
    return "?";
}

int cmd_project(const std::string& div, const std::string& instance_path, bool random,
                std::size_t states, std::uint64_t seed, prec_t delta, bool json_out) {
    const DivergenceKind kind = parse_kind(div);
    ProjectionQuery query;
    if (!instance_path.empty())
        query = read_projection_query(read_file(instance_path));
    else if (random)
        query = random_projection_instance(states, seed, delta);
    else {
        std::cerr << "project: either --instance or --random is required\n";
        return 1;
    }
    query.delta = delta;

    const ProjectionResult res = project(kind, query);
    if (json_out) {
        nlohmann::json out;
        out["divergence"] = to_string(kind);
        out["status"] = status_name(res.status);
        out["lower"] = res.lower;
        out["upper"] = res.upper;
        if (res.dual) out["alpha"] = *res.dual;
        if (res.dual_zeta) out["zeta"] = *res.dual_zeta;
        out["iterations"] = res.trace.iterations;
        out["rng"] = rng_algorithm_id;
        out["seed"] = seed;
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "divergence: " << to_string(kind) << "\n"
                  << "status:     " << status_name(res.status) << "\n"
                  << "value:      [" << res.lower << ", " << res.upper << "]\n";
        if (res.dual) std::cout << "alpha*:     " << *res.dual << "\n";
        std::cout << "iterations: " << res.trace.iterations << "\n";
    }
    return res.status == ProjectionStatus::Infeasible ? 2 : 0;
}

int cmd_vi(const std::string& instance_path, prec_t epsilon, long max_iters,
           const std::string& policy_out, bool json_out, bool check_nominal) {
    const MdpInstance instance = load_instance(instance_path);
    const VIReport report = robust_value_iteration(instance, epsilon, max_iters);

    prec_t vmin = INFTY, vmax = -INFTY, vmean = 0;
    for (prec_t x : report.value) {
        vmin = std::min(vmin, x);
        vmax = std::max(vmax, x);
        vmean += x;
    }
    vmean /= static_cast<prec_t>(report.value.size());
    std::optional<prec_t> initial_value;
    if (instance.initial_dist) initial_value = dot(*instance.initial_dist, report.value);

    std::optional<prec_t> nominal_gap;
    if (check_nominal) {
        // classical value iteration on the nominal kernel, same stopping rule
        MdpInstance nominal = instance;
        nominal.kappa = 0;
        const VIReport classical = robust_value_iteration(nominal, epsilon, max_iters);
        nominal_gap = linf_diff(classical.value, report.value);
    }

    if (json_out) {
        nlohmann::json out;
        out["states"] = instance.states;
        out["iterations"] = report.iterations;
        out["residual"] = report.residual;
        out["converged"] = report.converged;
        out["value_min"] = vmin;
        out["value_max"] = vmax;
        out["value_mean"] = vmean;
        if (initial_value) out["initial_value"] = *initial_value;
        if (nominal_gap) out["nominal_gap"] = *nominal_gap;
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "iterations: " << report.iterations << "\n"
                  << "residual:   " << report.residual << "\n"
                  << "v* min/max/mean: " << vmin << " / " << vmax << " / " << vmean << "\n";
        if (initial_value) std::cout << "p0^T v*:    " << *initial_value << "\n";
        if (nominal_gap) std::cout << "nominal-VI gap: " << *nominal_gap << "\n";
        if (!report.converged) std::cout << "warning: hit max-iters before convergence\n";
    }

    if (!policy_out.empty()) {
        const Policy policy = extract_policy(instance, report.value, epsilon);
        nlohmann::json doc;
        doc["states"] = instance.states;
        doc["actions"] = instance.actions;
        numvec flat;
        flat.reserve(instance.states * instance.actions);
        for (const auto& row : policy) flat.insert(flat.end(), row.begin(), row.end());
        doc["policy"] = flat;
        std::ofstream out(policy_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write policy file: " + policy_out);
        out << doc.dump() << '\n';
    }
    return report.converged ? 0 : 3;
}

int cmd_bench(const std::string& op, const std::string& div, std::vector<std::size_t> sizes,
              long trials, std::uint64_t seed, prec_t delta, prec_t epsilon, bool oracle,
              const std::string& out_path) {
    const DivergenceKind kind = parse_kind(div);
    if (sizes.empty())
        sizes = op == "projection" ? std::vector<std::size_t>{1000, 1500, 2000, 2500, 3000}
                                   : std::vector<std::size_t>{100, 150, 200, 250, 300};
    if (oracle) {
        if (op != "projection") {
            std::cerr << "bench: --oracle is only available for --op projection\n";
            return 1;
        }
        for (std::size_t s : sizes)
            if (s > 4) {
                std::cerr << "bench: --oracle uses the lattice oracle, which supports "
                             "S <= 4 only (got " << s << ")\n";
                return 1;
            }
    }

    std::vector<BenchRecord> records;
    for (std::size_t s : sizes) {
        if (op == "projection") {
            records.push_back(bench_projection(kind, s, trials, seed, delta, false));
            if (oracle) records.push_back(bench_projection(kind, s, trials, seed, delta, true));
        } else {
            records.push_back(bench_bellman(kind, s, trials, seed, epsilon));
        }
    }

    std::ostringstream csv;
    csv << bench_csv_header() << '\n';
    for (const auto& rec : records) csv << to_csv(rec) << '\n';
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write CSV file: " + out_path);
        out << csv.str();
    }
    return 0;
}

int cmd_gen(std::size_t states, std::size_t actions, std::uint64_t seed,
            const std::string& div, prec_t discount, const std::string& out_path) {
    const DivergenceKind kind = parse_kind(div);
    const MdpInstance instance = random_rmdp(states, actions, seed, discount, kind);
    save_instance(instance, out_path);
    std::cout << "wrote " << out_path << " (S=" << states << ", A=" << actions
              << ", divergence=" << to_string(kind) << ", discount=" << discount
              << ", rng=" << rng_algorithm_id << ", seed=" << seed << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver for s-rectangular robust MDPs with phi-divergence ambiguity sets"};
    app.require_subcommand(1);

    // project
    std::string p_div, p_instance;
    bool p_random = false, p_json = false;
    std::size_t p_states = 10;
    std::uint64_t p_seed = 0;
    prec_t p_delta = 1e-6;
    auto* project_cmd = app.add_subcommand("project", "Solve one generalized projection");
    project_cmd->add_option("--div", p_div, "Divergence: kl|burg|variation|chi2")->required();
    project_cmd->add_option("--instance", p_instance, "Projection-query JSON document");
    project_cmd->add_flag("--random", p_random, "Generate a random query instead");
    project_cmd->add_option("--states", p_states, "Dimension of the random query");
    project_cmd->add_option("--seed", p_seed, "Seed of the random query");
    project_cmd->add_option("--delta", p_delta, "Target interval width");
    project_cmd->add_flag("--json", p_json, "Emit a JSON report");

    // vi
    std::string v_instance, v_policy_out;
    prec_t v_epsilon = 1e-4;
    long v_max_iters = 10000;
    bool v_json = false, v_check_nominal = false;
    auto* vi_cmd = app.add_subcommand("vi", "Robust value iteration on an instance file");
    vi_cmd->add_option("--instance", v_instance, "Instance JSON document")->required();
    vi_cmd->add_option("--epsilon", v_epsilon, "Accuracy of the returned value");
    vi_cmd->add_option("--max-iters", v_max_iters, "Sweep limit");
    vi_cmd->add_option("--policy-out", v_policy_out, "Write the extracted policy here");
    vi_cmd->add_flag("--json", v_json, "Emit a JSON report");
    vi_cmd->add_flag("--check-nominal", v_check_nominal,
                     "Also run classical VI on the nominal kernel and report the gap");

    // bench
    std::string b_op, b_div, b_out;
    std::vector<std::size_t> b_sizes;
    long b_trials = 50;
    std::uint64_t b_seed = 0;
    prec_t b_delta = 1e-6, b_epsilon = 1e-2;
    bool b_oracle = false;
    auto* bench_cmd = app.add_subcommand("bench", "Time solver kernels, CSV output");
    bench_cmd->add_option("--op", b_op, "projection|bellman")
        ->required()
        ->check(CLI::IsMember({"projection", "bellman"}));
    bench_cmd->add_option("--div", b_div, "Divergence: kl|burg|variation|chi2")->required();
    bench_cmd->add_option("--sizes", b_sizes, "Sizes (S; S=A for bellman)")->delimiter(',');
    bench_cmd->add_option("--trials", b_trials, "Timed trials per size");
    bench_cmd->add_option("--seed", b_seed, "Base seed");
    bench_cmd->add_option("--delta", b_delta, "Projection accuracy");
    bench_cmd->add_option("--epsilon", b_epsilon, "Bellman accuracy");
    bench_cmd->add_flag("--oracle", b_oracle, "Also time the lattice oracle (S <= 4)");
    bench_cmd->add_option("--out", b_out, "Write CSV here instead of stdout");

    // gen
    std::size_t g_states = 0, g_actions = 0;
    std::uint64_t g_seed = 0;
    std::string g_div = "kl", g_out;
    prec_t g_discount = 0.95;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a random instance file");
    gen_cmd->add_option("--states", g_states, "Number of states (>= 2)")->required();
    gen_cmd->add_option("--actions", g_actions, "Number of actions (>= 1)")->required();
    gen_cmd->add_option("--seed", g_seed, "Seed");
    gen_cmd->add_option("--div", g_div, "Divergence: kl|burg|variation|chi2");
    gen_cmd->add_option("--discount", g_discount, "Discount factor");
    gen_cmd->add_option("--out", g_out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 1;
    }

    try {
        if (project_cmd->parsed())
            return cmd_project(p_div, p_instance, p_random, p_states, p_seed, p_delta, p_json);
        if (vi_cmd->parsed())
            return cmd_vi(v_instance, v_epsilon, v_max_iters, v_policy_out, v_json,
                          v_check_nominal);
        if (bench_cmd->parsed())
            return cmd_bench(b_op, b_div, b_sizes, b_trials, b_seed, b_delta, b_epsilon,
                             b_oracle, b_out);
        if (gen_cmd->parsed())
            return cmd_gen(g_states, g_actions, g_seed, g_div, g_discount, g_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
