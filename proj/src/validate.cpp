#include <algorithm>
#include <cmath>
#include <string>

#include "kqlearn/errors.hpp"
#include "kqlearn/harness.hpp"
#include "kqlearn/rng.hpp"

namespace kqlearn {

namespace {

Point random_point(Rng& rng, std::size_t d) {
    Point z(static_cast<Eigen::Index>(d));
    for (auto& x : z) x = rng.uniform();
    return z;
}

PointList random_points(Rng& rng, std::size_t n, std::size_t d) {
    PointList pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(random_point(rng, d));
    return pts;
}

std::vector<std::pair<KernelSpec, std::size_t>> suite_kernels() {
    return {{KernelSpec::squared_exponential(0.2), 2},
            {KernelSpec::matern(0.5, 0.2), 2},
            {KernelSpec::finite_rank({0.5, 0.2, 0.1, 0.05, 0.02, 0.01}), 1}};
}

void add(ValidationReport& r, const std::string& suite, const std::string& check, double measured, double threshold,
         bool passed) {
    r.checks.push_back({suite, check, measured, threshold, passed});
}

void krr_suite(ValidationReport& rep) {
    Rng rng(101);
    double eq2 = 0.0;
    std::size_t monotone = 0, y_dependence = 0;
    const auto kernels = suite_kernels();
    for (std::size_t inst = 0; inst < 24; ++inst) {
        const auto& [k, d] = kernels[inst % kernels.size()];
        const std::size_t J = 1 + rng.below(30);
        const double lambda = 0.5 + rng.uniform();
        const PointList pts = random_points(rng, J, d);
        Eigen::VectorXd y(static_cast<Eigen::Index>(J));
        for (auto& v : y) v = rng.uniform(-2.0, 2.0);
        const RegressionModel m = fit(k, DesignSet{pts, lambda}, y);

        Eigen::MatrixXd a = gram(k, pts);
        a.diagonal().array() += lambda * lambda;
        const Eigen::MatrixXd inv = a.inverse();
        const RegressionModel other = m.with_observations(Eigen::VectorXd::Constant(y.size(), 3.0));
        for (int q = 0; q < 10; ++q) {
            const Point z = random_point(rng, d);
            const Eigen::VectorXd kv = m.kernel_vector(z);
            const double mean = kv.dot(inv * y);
            const double var = std::max(k(z, z) - kv.dot(inv * kv), 0.0);
            eq2 = std::max({eq2, std::abs(mean - m.predict(z)), std::abs(std::sqrt(var) - m.posterior_std(z))});
            if (m.posterior_std(z) != other.posterior_std(z)) ++y_dependence;
        }
    }
    add(rep, "krr", "eq2_max_abs_diff", eq2, 1e-9, eq2 <= 1e-9);

    for (std::size_t cfg = 0; cfg < 6; ++cfg) {
        const auto& [k, d] = kernels[cfg % kernels.size()];
        const PointList grid = random_points(rng, 100, d);
        RegressionModel m(k, 1.0);
        std::vector<double> prev(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) prev[g] = m.posterior_std(grid[g]);
        for (std::size_t j = 0; j < 20; ++j) {
            m = m.add_point(random_point(rng, d));
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double s = m.posterior_std(grid[g]);
                if (s > prev[g] + 1e-9) ++monotone;
                prev[g] = s;
            }
        }
    }
    add(rep, "krr", "variance_monotonicity_violations", static_cast<double>(monotone), 0.0, monotone == 0);
    add(rep, "krr", "posterior_std_y_dependence", static_cast<double>(y_dependence), 0.0, y_dependence == 0);
}

void design_suite(ValidationReport& rep) {
    Rng rng(202);
    std::size_t violations = 0, greedy_violations = 0;
    for (const auto& [k, d] : suite_kernels()) {
        CandidateGrid grid;
        grid.points = random_points(rng, 60, d);
        for (double lambda : {0.5, 1.0, 2.0}) {
            const GreedyTrace full = build_max_uncertainty_set(k, grid, 50, lambda);
            for (std::size_t J = 1; J <= 50; ++J) {
                GreedyTrace prefix{{full.selected.begin(), full.selected.begin() + static_cast<std::ptrdiff_t>(J)},
                                   {full.sigma2_at_selection.begin(),
                                    full.sigma2_at_selection.begin() + static_cast<std::ptrdiff_t>(J)}};
                if (!verify_uncertainty_sum(prefix, k, grid, lambda).holds) ++violations;
            }
            RegressionModel m(k, lambda);
            for (std::size_t j = 0; j < full.selected.size(); ++j) {
                for (const auto& z : grid.points)
                    if (full.sigma2_at_selection[j] < m.posterior_variance(z) - 1e-12) ++greedy_violations;
                m = m.add_point(grid.points[full.selected[j]]);
            }
        }
    }
    add(rep, "design", "lemma2_violations", static_cast<double>(violations), 0.0, violations == 0);
    add(rep, "design", "greedy_max_violations", static_cast<double>(greedy_violations), 0.0, greedy_violations == 0);

    CandidateGrid one;
    one.points = random_points(rng, 10, 2);
    const auto k = KernelSpec::squared_exponential(0.2);
    const auto r = verify_uncertainty_sum(build_max_uncertainty_set(k, one, 1, 1.0), k, one, 1.0);
    const double gap = std::abs(r.lhs - r.rhs);
    add(rep, "design", "lemma2_equality_gap_J1", gap, 1e-12, gap <= 1e-12);
}

void mdp_suite(ValidationReport& rep) {
    const auto k = KernelSpec::squared_exponential(0.2);
    double row_dev = 0.0, min_entry = 1.0, max_norm = 0.0, max_contraction = 0.0, max_z = 0.0;
    Rng rng(303);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RkhsMdpParams p{20, 4, 2, 0.8, 0.0, seed};
        p.mix = 0.9 * feasible_mix_limit(k, p);
        const auto inst = build_rkhs_mdp_instance(k, p);
        const FiniteMdp& m = inst.mdp;
        for (std::size_t s = 0; s < m.n_states(); ++s)
            for (std::size_t a = 0; a < m.n_actions(); ++a) {
                double sum = 0.0;
                for (std::size_t s2 = 0; s2 < m.n_states(); ++s2) {
                    sum += m.p(s, a, s2);
                    min_entry = std::min(min_entry, m.p(s, a, s2));
                }
                row_dev = std::max(row_dev, std::abs(sum - 1.0));
            }
        for (double n : inst.slice_norms) max_norm = std::max(max_norm, n);

        for (int t = 0; t < 10; ++t) {
            ValueFunction v1(20), v2(20);
            for (auto& x : v1) x = rng.uniform(0.0, m.v_max());
            for (auto& x : v2) x = rng.uniform(0.0, m.v_max());
            const double ratio = sup_norm(bellman_optimality(m, v1) - bellman_optimality(m, v2)) / sup_norm(v1 - v2);
            max_contraction = std::max(max_contraction, ratio / m.gamma());
        }

        ValueFunction v(20);
        for (auto& x : v) x = rng.uniform(0.0, m.v_max());
        GenerativeModel gen(m, seed + 17);
        const std::size_t s = rng.below(20), a = rng.below(4);
        const int draws = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double x = v[static_cast<Eigen::Index>(gen.sample_transition(s, a))];
            sum += x;
            sum2 += x * x;
        }
        const double mean = sum / draws;
        const double sd = std::sqrt(std::max(sum2 / draws - mean * mean, 1e-300));
        const double truth = m.expected_next(v)(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
        max_z = std::max(max_z, std::abs(mean - truth) / (sd / std::sqrt(static_cast<double>(draws))));
    }
    add(rep, "mdp", "row_sum_max_deviation", row_dev, 1e-12, row_dev <= 1e-12);
    add(rep, "mdp", "min_transition_entry", min_entry, 0.0, min_entry >= 0.0);
    add(rep, "mdp", "max_slice_rkhs_norm", max_norm, 1.0, max_norm <= 1.0 + 1e-12);
    add(rep, "mdp", "contraction_ratio_over_gamma", max_contraction, 1.0, max_contraction <= 1.0 + 1e-12);
    add(rep, "mdp", "unbiasedness_max_z", max_z, 4.0, max_z <= 4.0);
}

void kqlearn_suite(ValidationReport& rep) {
    ExperimentConfig cfg;
    cfg.mdp = MdpGenerator{10, 3, 2, 0.7, 0.0, 0.9};
    cfg.n_values = {600};
    cfg.split = ExplicitSplit{{{60, 10}}};
    cfg.seeds = {1, 2, 3, 4, 5};
    std::size_t accounting = 0, clip = 0, oracle = 0, bound = 0, failed = 0;
    for (const auto& r : sweep(cfg)) {
        if (!r.ok()) {
            ++failed;
            continue;
        }
        if (r.samples_used != r.J * r.L) ++accounting;
        clip += r.clip_violations;
        oracle += r.oracle_violations;
        if (r.measured_error > r.theorem1_bound) ++bound;
    }
    add(rep, "kqlearn", "failed_runs", static_cast<double>(failed), 0.0, failed == 0);
    add(rep, "kqlearn", "sample_accounting_mismatches", static_cast<double>(accounting), 0.0, accounting == 0);
    add(rep, "kqlearn", "clip_violations", static_cast<double>(clip), 0.0, clip == 0);
    add(rep, "kqlearn", "oracle_range_violations", static_cast<double>(oracle), 0.0, oracle == 0);
    add(rep, "kqlearn", "bound_violations", static_cast<double>(bound), 0.0, bound == 0);
}

}  // namespace

ValidationReport validate(const std::string& suite) {
    ValidationReport rep;
    const bool all = suite == "all";
    if (!all && suite != "krr" && suite != "design" && suite != "mdp" && suite != "kqlearn")
        throw InputError("unknown validation suite \"" + suite + "\" (expected krr, design, mdp, kqlearn or all)");
    if (all || suite == "krr") krr_suite(rep);
    if (all || suite == "design") design_suite(rep);
    if (all || suite == "mdp") mdp_suite(rep);
    if (all || suite == "kqlearn") kqlearn_suite(rep);
    return rep;
}

}  // namespace kqlearn
