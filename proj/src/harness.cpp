#include "kqlearn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "kqlearn/errors.hpp"
#include "kqlearn/rng.hpp"

namespace kqlearn {

std::string library_version() { return KQLEARN_VERSION; }

double ExperimentConfig::gamma() const {
    if (const auto* g = std::get_if<MdpGenerator>(&mdp)) return g->gamma;
    return std::get<FiniteMdp>(mdp).gamma();
}

std::pair<std::size_t, std::size_t> ExperimentConfig::split_for(std::size_t index) const {
    if (index >= n_values.size()) throw InputError("N index out of range");
    const std::size_t n = n_values[index];
    if (const auto* ex = std::get_if<ExplicitSplit>(&split)) return ex->pairs.at(index);

    const auto& t2 = std::get<SuggestedSplit>(split);
    const std::size_t d = std::holds_alternative<MdpGenerator>(mdp) ? std::get<MdpGenerator>(mdp).d
                                                                     : std::get<FiniteMdp>(mdp).dimension();
    EigendecayProfile profile = ExponentialDecay{};
    try {
        profile = eigendecay_of(kernel, d);
    } catch (const InputError&) {
        // L does not depend on the profile; linear kernels fall back to the default
    }
    const std::size_t L = suggest_jl(t2.epsilon, gamma(), profile, delta, lambda, d, volume_constant).second;
    return {std::max<std::size_t>(n / L, 1), L};
}

void ExperimentConfig::validate() const {
    if (n_values.empty()) throw InputError("experiment config needs at least one N");
    if (seeds.empty()) throw InputError("experiment config needs at least one seed");
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (!(oracle_tol > 0.0)) throw InputError("oracle tolerance must be positive");
    if (const auto* ex = std::get_if<ExplicitSplit>(&split)) {
        if (ex->pairs.size() != n_values.size()) throw InputError("explicit split needs one (J, L) per N");
        for (std::size_t i = 0; i < n_values.size(); ++i)
            if (ex->pairs[i].first * ex->pairs[i].second != n_values[i] || ex->pairs[i].first == 0)
                throw InputError("explicit split: J * L must equal N = " + std::to_string(n_values[i]));
    }
    if (const auto* g = std::get_if<MdpGenerator>(&mdp)) {
        if (!(g->gamma > 0.0 && g->gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
        if (g->mix_fraction && !(*g->mix_fraction >= 0.0 && *g->mix_fraction < 1.0))
            throw InputError("mix_fraction must lie in [0, 1)");
    }
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    ExperimentConfig cfg;
    try {
        const auto& m = j.at("mdp");
        if (m.contains("file")) {
            cfg.mdp = mdp_from_json(read_json_file(m.at("file").get<std::string>()));
        } else if (m.contains("n_states") && m.contains("transition")) {
            cfg.mdp = mdp_from_json(m);
        } else {
            MdpGenerator g;
            g.n_states = m.value("n_states", g.n_states);
            g.n_actions = m.value("n_actions", g.n_actions);
            g.d = m.value("d", g.d);
            g.gamma = m.value("gamma", g.gamma);
            if (m.contains("mix") && m.at("mix").is_number()) {
                g.mix = m.at("mix").get<double>();
                g.mix_fraction.reset();
            } else {
                g.mix_fraction = m.value("mix_fraction", *g.mix_fraction);
            }
            cfg.mdp = g;
        }
        cfg.kernel = kernel_from_json(j.at("kernel"));
        cfg.n_values = j.at("n_values").get<std::vector<std::size_t>>();
        const auto& split = j.value("split", Json{{"rule", "theorem2"}});
        const auto rule = split.value("rule", std::string("theorem2"));
        if (rule == "theorem2") {
            cfg.split = SuggestedSplit{split.value("epsilon", 0.1)};
        } else if (rule == "explicit") {
            cfg.split = ExplicitSplit{split.at("pairs").get<std::vector<std::pair<std::size_t, std::size_t>>>()};
        } else {
            throw InputError("unknown split rule \"" + rule + "\"");
        }
        cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.master_seed = j.value("master_seed", cfg.master_seed);
        cfg.delta = j.value("delta", cfg.delta);
        cfg.lambda = j.value("lambda", cfg.lambda);
        cfg.oracle_tol = j.value("oracle_tol", cfg.oracle_tol);
        cfg.volume_constant = j.value("volume_constant", cfg.volume_constant);
        cfg.output = j.value("output", std::string());
        cfg.record_timing = j.value("record_timing", false);
        if (j.contains("slope_band")) {
            const auto band = j.at("slope_band").get<std::vector<double>>();
            if (band.size() != 2) throw InputError("slope_band must be [lo, hi]");
            cfg.slope_band = std::make_pair(band[0], band[1]);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RkhsMdpInstance sweep_mdp(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (const auto* fixed = std::get_if<FiniteMdp>(&cfg.mdp)) return RkhsMdpInstance{*fixed, {}, 0.0, {}};
    const auto& g = std::get<MdpGenerator>(cfg.mdp);
    RkhsMdpParams p{g.n_states, g.n_actions, g.d, g.gamma, g.mix, derive_seed({cfg.master_seed, seed})};
    if (g.mix_fraction) p.mix = std::min(*g.mix_fraction * feasible_mix_limit(cfg.kernel, p), 0.999);
    return build_rkhs_mdp_instance(cfg.kernel, p);
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg, std::size_t n_index, std::uint64_t seed) {
    ExperimentRecord rec;
    rec.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto [J, L] = cfg.split_for(n_index);
        rec.J = J;
        rec.L = L;
        rec.N = J * L;
        const RkhsMdpInstance inst = sweep_mdp(cfg, seed);
        const FiniteMdp& mdp = inst.mdp;
        rec.mix = inst.mix_used;

        KqlearnConfig kc;
        kc.J = J;
        kc.L = L;
        kc.lambda = cfg.lambda;
        kc.delta = cfg.delta;
        kc.gamma = mdp.gamma();
        kc.seed = derive_seed({cfg.master_seed, cfg.n_values[n_index], seed});
        kc.volume_constant = cfg.volume_constant;
        const RunResult res = run(mdp, cfg.kernel, kc);

        const double cap = mdp.v_max();
        for (const auto& st : res.y_history)
            for (double y : st.y)
                if (!(y >= 0.0 && y <= cap)) ++rec.clip_violations;

        const OptimalValues opt = refined_optimal_values(mdp, cfg.oracle_tol);
        const ValueFunction v_pi = policy_value(mdp, res.policy, cfg.oracle_tol);
        constexpr double slack = 1e-9;
        for (const auto* v : {&opt.v, &v_pi})
            for (double x : *v)
                if (!(x >= -slack && x <= cap + slack)) ++rec.oracle_violations;

        rec.measured_error = sup_norm(v_pi - opt.v);
        rec.theorem1_bound = res.theorem1_bound;
        rec.info_gain = res.info_gain;
        rec.samples_used = res.samples_used;
        rec.beta = res.beta;
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    if (cfg.record_timing)
        rec.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::vector<ExperimentRecord> sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> n_order(cfg.n_values.size());
    for (std::size_t i = 0; i < n_order.size(); ++i) n_order[i] = i;
    std::stable_sort(n_order.begin(), n_order.end(),
                     [&](std::size_t a, std::size_t b) { return cfg.n_values[a] < cfg.n_values[b]; });
    std::vector<std::uint64_t> seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());

    std::vector<ExperimentRecord> out;
    out.reserve(n_order.size() * seeds.size());
    for (auto i : n_order)
        for (auto seed : seeds) out.push_back(run_experiment(cfg, i, seed));
    return out;
}

std::vector<std::pair<std::size_t, double>> median_error_by_n(const std::vector<ExperimentRecord>& records) {
    std::map<std::size_t, std::vector<double>> by_n;
    for (const auto& r : records)
        if (r.ok()) by_n[r.N].push_back(r.measured_error);
    std::vector<std::pair<std::size_t, double>> out;
    for (auto& [n, errs] : by_n) {
        std::sort(errs.begin(), errs.end());
        const std::size_t m = errs.size();
        const double med = m % 2 == 1 ? errs[m / 2] : 0.5 * (errs[m / 2 - 1] + errs[m / 2]);
        out.emplace_back(n, med);
    }
    return out;
}

double fit_loglog_slope(const std::vector<ExperimentRecord>& records) {
    const auto medians = median_error_by_n(records);
    if (medians.size() < 4) throw InputError("slope fit needs at least 4 distinct N values");
    double mx = 0, my = 0;
    std::vector<std::pair<double, double>> xy;
    for (const auto& [n, e] : medians) {
        xy.emplace_back(std::log(static_cast<double>(n)), std::log(std::max(e, 1e-12)));
        mx += xy.back().first;
        my += xy.back().second;
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxy = 0, sxx = 0;
    for (const auto& [x, y] : xy) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxy / sxx;
}

namespace {

constexpr const char* kRecordHeader =
    "seed,J,L,N,measured_error,theorem1_bound,info_gain,wall_time_seconds,samples_used,beta,mix,"
    "clip_violations,oracle_violations,error";

std::string sanitize(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
    out << kRecordHeader << '\n';
    for (const auto& r : records)
        out << r.seed << ',' << r.J << ',' << r.L << ',' << r.N << ',' << format_double(r.measured_error) << ','
            << format_double(r.theorem1_bound) << ',' << format_double(r.info_gain) << ','
            << format_double(r.wall_time_seconds) << ',' << r.samples_used << ',' << format_double(r.beta) << ','
            << format_double(r.mix) << ',' << r.clip_violations << ',' << r.oracle_violations << ','
            << sanitize(r.error) << '\n';
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordHeader) throw InputError("unexpected sweep CSV header");
    std::vector<ExperimentRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 14) throw InputError("sweep CSV row has " + std::to_string(f.size()) + " fields");
        ExperimentRecord r;
        r.seed = std::stoull(f[0]);
        r.J = std::stoull(f[1]);
        r.L = std::stoull(f[2]);
        r.N = std::stoull(f[3]);
        r.measured_error = parse_double(f[4]);
        r.theorem1_bound = parse_double(f[5]);
        r.info_gain = parse_double(f[6]);
        r.wall_time_seconds = parse_double(f[7]);
        r.samples_used = std::stoull(f[8]);
        r.beta = parse_double(f[9]);
        r.mix = parse_double(f[10]);
        r.clip_violations = std::stoull(f[11]);
        r.oracle_violations = std::stoull(f[12]);
        r.error = f[13];
        out.push_back(std::move(r));
    }
    return out;
}

Json sweep_metadata(const ExperimentConfig& cfg, const Json& raw_config, const std::vector<ExperimentRecord>& records) {
    Json meta;
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a(raw_config.dump())));
    meta["config_hash"] = hash;
    meta["library_version"] = library_version();
    meta["lambda"] = cfg.lambda;
    meta["delta"] = cfg.delta;
    meta["c"] = cfg.volume_constant;
    meta["gamma"] = cfg.gamma();
    meta["master_seed"] = cfg.master_seed;
    meta["kernel"] = kernel_to_json(cfg.kernel);
    for (const auto& r : records)
        if (r.ok()) {
            meta["beta"] = r.beta;
            break;
        }
    std::size_t failures = 0;
    for (const auto& r : records) failures += r.ok() ? 0 : 1;
    meta["failed_records"] = failures;
    Json med = Json::array();
    for (const auto& [n, e] : median_error_by_n(records)) med.push_back({{"N", n}, {"median_error", e}});
    meta["median_error_by_N"] = med;
    if (median_error_by_n(records).size() >= 4) {
        const double slope = fit_loglog_slope(records);
        meta["loglog_slope"] = slope;
        if (cfg.slope_band) {
            meta["slope_band"] = {cfg.slope_band->first, cfg.slope_band->second};
            meta["slope_in_band"] = slope >= cfg.slope_band->first && slope <= cfg.slope_band->second;
        }
    }
    meta["note"] = "acceptance bands are defined by this project, not by reported experiments";
    return meta;
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

Json ValidationReport::to_json() const {
    Json arr = Json::array();
    for (const auto& c : checks)
        arr.push_back({{"suite", c.suite},
                       {"check", c.check},
                       {"measured", c.measured},
                       {"threshold", c.threshold},
                       {"passed", c.passed}});
    return Json{{"all_passed", all_passed()}, {"checks", arr}};
}

}  // namespace kqlearn
