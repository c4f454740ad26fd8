// kqlearn command-line driver: design, run, sweep, oracle, validate, make-mdp.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kqlearn/design.hpp"
#include "kqlearn/errors.hpp"
#include "kqlearn/harness.hpp"
#include "kqlearn/io.hpp"
#include "kqlearn/kqlearn.hpp"
#include "kqlearn/mdp.hpp"

namespace {

using namespace kqlearn;

/// Writes to path, or stdout for "" / "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    fn(out);
}

/// --seed wins; otherwise KQLEARN_SEED; otherwise the fallback.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
    if (flag) return *flag;
    if (const char* env = std::getenv("KQLEARN_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InputError(std::string("KQLEARN_SEED is not an integer: ") + env);
        }
    }
    return fallback;
}

CandidateGrid lattice(std::size_t per_axis, std::size_t d) {
    CandidateGrid g;
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_axis;
    for (std::size_t idx = 0; idx < total; ++idx) {
        Point z(static_cast<Eigen::Index>(d));
        std::size_t rest = idx;
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t c = rest % per_axis;
            rest /= per_axis;
            z[static_cast<Eigen::Index>(k)] = per_axis == 1 ? 0.0 : static_cast<double>(c) / static_cast<double>(per_axis - 1);
        }
        g.points.push_back(std::move(z));
    }
    return g;
}

void write_sidecar(const std::string& out_path, const Json& meta) {
    if (out_path.empty() || out_path == "-") return;
    write_text_file(out_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel-based Q-learning with a generative model"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    // design
    auto* design_cmd = app.add_subcommand("design", "Greedy max-uncertainty design; CSV step,grid_index,sigma2,info_gain_prefix");
    std::string design_kernel = R"({"kind":"se","lengthscale":0.2})", design_mdp, design_grid, design_out;
    std::size_t design_j = 20, lattice_n = 0, lattice_d = 1;
    double design_lambda = 1.0;
    design_cmd->add_option("--kernel", design_kernel, "Kernel JSON (inline or file)");
    auto* mdp_src = design_cmd->add_option("--mdp", design_mdp, "Use the state-action embedding of this MDP file");
    auto* grid_src = design_cmd->add_option("--grid", design_grid, "CSV of candidate points, one per row");
    auto* lattice_src = design_cmd->add_option("--lattice", lattice_n, "Regular lattice with this many points per axis");
    design_cmd->add_option("--dim", lattice_d, "Lattice dimension");
    mdp_src->excludes(grid_src)->excludes(lattice_src);
    grid_src->excludes(lattice_src);
    design_cmd->add_option("--j", design_j, "Design size")->check(CLI::PositiveNumber);
    design_cmd->add_option("--lambda", design_lambda, "Regularization")->check(CLI::PositiveNumber);
    design_cmd->add_option("--out", design_out, "Output CSV (default stdout)");

    // run
    auto* run_cmd = app.add_subcommand("run", "Run KQLearn on an MDP file");
    std::string run_mdp, run_kernel = R"({"kind":"se","lengthscale":0.2})", run_out;
    KqlearnConfig run_cfg;
    std::optional<double> run_gamma;
    std::optional<std::uint64_t> run_seed;
    double oracle_tol = 1e-8;
    run_cmd->add_option("--mdp", run_mdp, "MDP JSON file")->required();
    run_cmd->add_option("--kernel", run_kernel, "Kernel JSON (inline or file)");
    run_cmd->add_option("--j", run_cfg.J, "Design size J")->check(CLI::PositiveNumber);
    run_cmd->add_option("--l", run_cfg.L, "Rounds L")->check(CLI::PositiveNumber);
    run_cmd->add_option("--lambda", run_cfg.lambda, "Regularization")->check(CLI::PositiveNumber);
    run_cmd->add_option("--gamma", run_gamma, "Discount factor (overrides the MDP file)");
    run_cmd->add_option("--delta", run_cfg.delta, "Confidence level for beta");
    run_cmd->add_option("--seed", run_seed, "Sampler seed (env KQLEARN_SEED when absent)");
    run_cmd->add_option("--oracle-tol", oracle_tol, "Sup-norm tolerance for the value oracles");
    run_cmd->add_option("--out", run_out, "Output CSV (default stdout)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Seeded sweep over sample budgets from a JSON config");
    std::string sweep_config, sweep_out;
    std::optional<std::uint64_t> sweep_seed;
    sweep_cmd->add_option("--config", sweep_config, "Experiment JSON config")->required();
    sweep_cmd->add_option("--seed", sweep_seed, "Master seed (env KQLEARN_SEED when absent)");
    sweep_cmd->add_option("--out", sweep_out, "Output CSV (overrides config \"output\")");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Print V* and Q* of an MDP file");
    std::string oracle_mdp, oracle_out;
    oracle_cmd->add_option("--mdp", oracle_mdp, "MDP JSON file")->required();
    oracle_cmd->add_option("--tol", oracle_tol, "Sup-norm tolerance");
    oracle_cmd->add_option("--out", oracle_out, "Output CSV (default stdout)");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Run invariant suites and print a JSON report");
    std::string suite = "all", validate_out;
    validate_cmd->add_option("--suite", suite, "krr, design, mdp, kqlearn or all");
    validate_cmd->add_option("--out", validate_out, "Output JSON (default stdout)");

    // make-mdp
    auto* make_cmd = app.add_subcommand("make-mdp", "Generate an RKHS-compliant synthetic MDP as JSON");
    std::string make_kernel = R"({"kind":"se","lengthscale":0.2})", make_out;
    RkhsMdpParams make_params;
    std::optional<double> make_mix;
    double make_fraction = 0.9;
    std::optional<std::uint64_t> make_seed;
    make_cmd->add_option("--kernel", make_kernel, "Kernel JSON (inline or file)");
    make_cmd->add_option("--states", make_params.n_states, "Number of states");
    make_cmd->add_option("--actions", make_params.n_actions, "Number of actions");
    make_cmd->add_option("--dim", make_params.d, "Embedding dimension");
    make_cmd->add_option("--gamma", make_params.gamma, "Discount factor");
    make_cmd->add_option("--mix", make_mix, "Transition mixing weight (default: fraction of the feasible limit)");
    make_cmd->add_option("--mix-fraction", make_fraction, "Fraction of the feasible mix limit");
    make_cmd->add_option("--seed", make_seed, "Generator seed (env KQLEARN_SEED when absent)");
    make_cmd->add_option("--out", make_out, "Output JSON (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*design_cmd) {
            const KernelSpec k = kernel_from_json(json_from_text_or_file(design_kernel));
            CandidateGrid grid;
            if (!design_mdp.empty()) {
                grid = mdp_from_json(read_json_file(design_mdp)).grid();
            } else if (!design_grid.empty()) {
                std::ifstream in(design_grid);
                if (!in) throw InputError("cannot open " + design_grid);
                grid.points = read_points_csv(in);
            } else {
                grid = lattice(lattice_n == 0 ? 101 : lattice_n, lattice_d);
            }
            const GreedyDesign d = build_max_uncertainty_design(k, grid, design_j, design_lambda);
            emit(design_out, [&](std::ostream& os) { write_design_csv(os, d.trace, info_gain_prefix(d.factor, design_lambda)); });
        } else if (*run_cmd) {
            FiniteMdp mdp = mdp_from_json(read_json_file(run_mdp));
            if (run_gamma) mdp = mdp.with_gamma(*run_gamma);
            const KernelSpec k = kernel_from_json(json_from_text_or_file(run_kernel));
            run_cfg.gamma = mdp.gamma();
            run_cfg.seed = resolve_seed(run_seed, 0);
            const RunResult res = run(mdp, k, run_cfg);
            const OptimalValues opt = refined_optimal_values(mdp, oracle_tol);
            const double err = sup_norm(policy_value(mdp, res.policy, oracle_tol) - opt.v);
            emit(run_out, [&](std::ostream& os) {
                os << "round,j,y_value\n";
                for (const auto& st : res.y_history)
                    for (Eigen::Index j = 0; j < st.y.size(); ++j)
                        os << st.round_index << ',' << j << ',' << format_double(st.y[j]) << '\n';
                os << "final_error,theorem1_bound,samples_used\n";
                os << format_double(err) << ',' << format_double(res.theorem1_bound) << ',' << res.samples_used << '\n';
            });
            Json meta{{"library_version", library_version()},
                      {"beta", res.beta},
                      {"c", run_cfg.volume_constant},
                      {"lambda", run_cfg.lambda},
                      {"delta", run_cfg.delta},
                      {"gamma", run_cfg.gamma},
                      {"J", run_cfg.J},
                      {"L", run_cfg.L},
                      {"seed", run_cfg.seed},
                      {"info_gain", res.info_gain},
                      {"kernel", kernel_to_json(k)}};
            meta["config_hash"] = std::to_string(fnv1a(meta.dump()));
            write_sidecar(run_out, meta);
        } else if (*sweep_cmd) {
            const Json raw = read_json_file(sweep_config);
            ExperimentConfig cfg = experiment_config_from_json(raw);
            cfg.master_seed = resolve_seed(sweep_seed, cfg.master_seed);
            if (!sweep_out.empty()) cfg.output = sweep_out;
            const auto records = sweep(cfg);
            emit(cfg.output, [&](std::ostream& os) { write_records_csv(os, records); });
            const Json meta = sweep_metadata(cfg, raw, records);
            write_sidecar(cfg.output, meta);
            if (meta.contains("loglog_slope")) std::cerr << "log-log slope: " << meta["loglog_slope"] << '\n';
        } else if (*oracle_cmd) {
            const FiniteMdp mdp = mdp_from_json(read_json_file(oracle_mdp));
            const OptimalValues opt = refined_optimal_values(mdp, oracle_tol);
            emit(oracle_out, [&](std::ostream& os) { write_oracle_csv(os, opt); });
        } else if (*validate_cmd) {
            const ValidationReport rep = validate(suite);
            emit(validate_out, [&](std::ostream& os) { os << rep.to_json().dump(2) << '\n'; });
            return rep.all_passed() ? 0 : 1;
        } else if (*make_cmd) {
            const KernelSpec k = kernel_from_json(json_from_text_or_file(make_kernel));
            make_params.seed = resolve_seed(make_seed, 0);
            make_params.mix = make_mix ? *make_mix : std::min(make_fraction * feasible_mix_limit(k, make_params), 0.999);
            const RkhsMdpInstance inst = build_rkhs_mdp_instance(k, make_params);
            emit(make_out, [&](std::ostream& os) { os << mdp_to_json(inst.mdp).dump() << '\n'; });
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
