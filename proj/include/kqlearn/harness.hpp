#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kqlearn/io.hpp"
#include "kqlearn/kernels.hpp"
#include "kqlearn/kqlearn.hpp"
#include "kqlearn/mdp.hpp"

namespace kqlearn {

/// Generator parameters for a per-seed synthetic MDP.  mix_fraction, when set,
/// picks mix = mix_fraction * feasible_mix_limit(...) instead of a fixed mix.
struct MdpGenerator {
    std::size_t n_states = 20;
    std::size_t n_actions = 4;
    std::size_t d = 2;
    double gamma = 0.8;
    double mix = 0.0;
    std::optional<double> mix_fraction = 0.9;
};

/// theorem2: L from suggest_jl(epsilon, ...), J = floor(N / L).
struct SuggestedSplit {
    double epsilon = 0.1;
};

/// One (J, L) per entry of n_values; J * L must equal N.
struct ExplicitSplit {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct ExperimentConfig {
    std::variant<MdpGenerator, FiniteMdp> mdp = MdpGenerator{};
    KernelSpec kernel = KernelSpec::squared_exponential(0.2);
    std::vector<std::size_t> n_values;
    std::variant<SuggestedSplit, ExplicitSplit> split = SuggestedSplit{};
    std::vector<std::uint64_t> seeds;
    std::uint64_t master_seed = 0;
    double delta = 0.1;
    double lambda = 1.0;
    double oracle_tol = 1e-8;
    double volume_constant = 1.0;
    std::string output;
    std::optional<std::pair<double, double>> slope_band;
    bool record_timing = false;

    /// (J, L) for a nominal sample budget N.
    std::pair<std::size_t, std::size_t> split_for(std::size_t index) const;
    double gamma() const;
    void validate() const;
};

ExperimentConfig experiment_config_from_json(const Json& j);

struct ExperimentRecord {
    std::uint64_t seed = 0;
    std::size_t J = 0;
    std::size_t L = 0;
    std::size_t N = 0;
    double measured_error = 0.0;
    double theorem1_bound = 0.0;
    double info_gain = 0.0;
    double wall_time_seconds = 0.0;
    std::size_t samples_used = 0;
    double beta = 0.0;
    double mix = 0.0;
    std::size_t clip_violations = 0;    // Y entries outside [0, 1/(1-gamma)]
    std::size_t oracle_violations = 0;  // V*, V^pi entries outside [0, 1/(1-gamma)] (1e-9 slack)
    std::string error;                  // nonempty marks a failed job

    bool ok() const { return error.empty(); }
    bool operator==(const ExperimentRecord&) const = default;
};

/// Builds the MDP the sweep uses for a seed.
RkhsMdpInstance sweep_mdp(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs one (N, seed) job.  Module errors are caught into record.error.
ExperimentRecord run_experiment(const ExperimentConfig& cfg, std::size_t n_index, std::uint64_t seed);

/// All (N, seed) jobs, sorted by (N, seed).
std::vector<ExperimentRecord> sweep(const ExperimentConfig& cfg);

/// Least-squares slope of log(median error) against log N; errors are
/// floored at 1e-12.  Needs >= 4 distinct N among successful records.
double fit_loglog_slope(const std::vector<ExperimentRecord>& records);

/// (N, median error) per distinct N, ascending.
std::vector<std::pair<std::size_t, double>> median_error_by_n(const std::vector<ExperimentRecord>& records);

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records_csv(std::istream& in);

/// Sidecar with config hash, beta, c, lambda and library version.
Json sweep_metadata(const ExperimentConfig& cfg, const Json& raw_config, const std::vector<ExperimentRecord>& records);

struct ValidationCheck {
    std::string suite;
    std::string check;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const;
    Json to_json() const;
};

/// Invariant suites: "krr", "design", "mdp", "kqlearn" or "all".
ValidationReport validate(const std::string& suite);

std::string library_version();

}  // namespace kqlearn
