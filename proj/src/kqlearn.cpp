#include "kqlearn/kqlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "kqlearn/errors.hpp"

namespace kqlearn {

void KqlearnConfig::validate() const {
    if (J == 0 || L == 0) throw InputError("J and L must be positive");
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
    if (!(volume_constant >= 0.0)) throw InputError("volume constant must be nonnegative");
}

ApproximateBellman::ApproximateBellman(const FiniteMdp& mdp, RegressionModel model, Eigen::MatrixXd grid_cross,
                                       std::vector<std::size_t> design_indices)
    : mdp_(&mdp),
      model_(std::move(model)),
      grid_cross_(std::move(grid_cross)),
      design_indices_(std::move(design_indices)) {
    const auto J = static_cast<Eigen::Index>(model_.size());
    if (design_indices_.size() != model_.size()) throw InputError("design index list does not match the model");
    if (grid_cross_.rows() != static_cast<Eigen::Index>(mdp.n_state_actions()) || grid_cross_.cols() != J)
        throw InputError("grid cross-kernel matrix has the wrong shape");
    for (auto i : design_indices_)
        if (i >= mdp.n_state_actions()) throw InputError("design index outside the state-action set");
}

Eigen::VectorXd ApproximateBellman::regress(const Eigen::VectorXd& y) const { return grid_cross_ * model_.solve(y); }

RoundState ApproximateBellman::next(const RoundState& prev, GenerativeModel& gen) const {
    const auto J = static_cast<Eigen::Index>(design_indices_.size());
    if (prev.y.size() != J) throw InputError("round state has the wrong length");
    const std::size_t A = mdp_->n_actions();
    const double gamma = mdp_->gamma();
    const double cap = mdp_->v_max();

    const Eigen::VectorXd pv = regress(prev.y);
    RoundState out{Eigen::VectorXd(J), prev.round_index + 1};
    for (Eigen::Index j = 0; j < J; ++j) {
        const std::size_t sa = design_indices_[static_cast<std::size_t>(j)];
        const std::size_t s_next = gen.sample_transition(sa / A, sa % A);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < A; ++a)
            best = std::max(best, mdp_->r(s_next, a) + gamma * pv[static_cast<Eigen::Index>(s_next * A + a)]);
        out.y[j] = std::clamp(best, 0.0, cap);
    }
    return out;
}

RoundState bellman_round(const RoundState& prev, const ApproximateBellman& op, GenerativeModel& gen) {
    return op.next(prev, gen);
}

ProxyQ::ProxyQ(KernelSpec kernel, DesignSet design, Eigen::VectorXd weights, Eigen::MatrixXd reward, double gamma,
               PointList embedding)
    : kernel_(std::move(kernel)),
      design_(std::move(design)),
      weights_(std::move(weights)),
      reward_(std::move(reward)),
      gamma_(gamma),
      embedding_(std::move(embedding)) {
    if (static_cast<std::size_t>(weights_.size()) != design_.points.size())
        throw InputError("proxy weights do not match the design");
    if (embedding_.size() != static_cast<std::size_t>(reward_.size()))
        throw InputError("proxy embedding does not match the reward table");
}

double ProxyQ::operator()(std::size_t s, std::size_t a) const {
    const auto A = static_cast<std::size_t>(reward_.cols());
    if (s >= static_cast<std::size_t>(reward_.rows()) || a >= A) throw InputError("state-action index out of range");
    const Point& z = embedding_[s * A + a];
    double pv = 0.0;
    for (std::size_t j = 0; j < design_.points.size(); ++j)
        pv += kernel_(z, design_.points[j]) * weights_[static_cast<Eigen::Index>(j)];
    return reward_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) + gamma_ * pv;
}

QFunction ProxyQ::table() const {
    QFunction q(reward_.rows(), reward_.cols());
    for (Eigen::Index s = 0; s < q.rows(); ++s)
        for (Eigen::Index a = 0; a < q.cols(); ++a)
            q(s, a) = (*this)(static_cast<std::size_t>(s), static_cast<std::size_t>(a));
    return q;
}

double pv_confidence_width(const KqlearnConfig& cfg, std::size_t n_candidates) {
    const double horizon = 1.0 / (1.0 - cfg.gamma);
    return confidence_width(cfg.volume_constant * horizon, 0.5 * horizon, cfg.lambda, n_candidates, cfg.delta);
}

RunResult run(const FiniteMdp& mdp, const KernelSpec& k, const KqlearnConfig& cfg) {
    cfg.validate();
    if (cfg.gamma != mdp.gamma())
        throw InputError("config gamma " + std::to_string(cfg.gamma) + " differs from the MDP's " +
                         std::to_string(mdp.gamma()));
    const CandidateGrid grid = mdp.grid();

    // design phase: fixed before any transition is sampled
    GreedyDesign design = build_max_uncertainty_design(k, grid, cfg.J, cfg.lambda);
    DesignSet design_set{selected_points(design.trace, grid), cfg.lambda};
    const double gain = info_gain_prefix(design.factor, cfg.lambda).back();
    RegressionModel model = RegressionModel::from_factor(k, design_set, std::move(design.factor));

    ApproximateBellman op(mdp, std::move(model), std::move(design.grid_cross), design.trace.selected);
    GenerativeModel gen(mdp, cfg.seed);

    std::vector<RoundState> history;
    history.reserve(cfg.L + 1);
    history.push_back(RoundState{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.J)), 0});
    for (std::size_t l = 0; l < cfg.L; ++l) history.push_back(op.next(history.back(), gen));

    Eigen::VectorXd weights = op.model().solve(history.back().y);
    ProxyQ proxy(k, design_set, std::move(weights), mdp.reward(), mdp.gamma(), mdp.embedding());
    Policy policy = greedy_policy(proxy.table());

    const double beta = pv_confidence_width(cfg, grid.size());
    RunResult out{std::move(proxy),
                  std::move(policy),
                  std::move(design.trace),
                  gen.sample_count(),
                  std::move(history),
                  beta,
                  gain,
                  theorem1_bound(cfg, beta, gain)};
    return out;
}

double theorem1_bound(const KqlearnConfig& cfg, double beta, double gamma_info) {
    const double g = cfg.gamma;
    const double horizon = 1.0 / (1.0 - g);
    const double ratio = g * horizon;
    const double spread = std::sqrt(2.0 * gamma_info /
                                    (static_cast<double>(cfg.J) * std::log1p(1.0 / (cfg.lambda * cfg.lambda))));
    return 2.0 * beta * ratio * ratio * spread +
           2.0 * std::pow(g, static_cast<double>(cfg.L) - 1.0) * horizon * horizon;
}

double epsilon_exponent(const EigendecayProfile& profile) {
    if (const auto* p = std::get_if<PolynomialDecay>(&profile)) return 2.0 * p->beta_p / (p->beta_p - 1.0);
    return 2.0;
}

std::pair<std::size_t, std::size_t> suggest_jl(double epsilon, double gamma, const EigendecayProfile& profile,
                                               double delta, double lambda, std::size_t d, double volume_constant) {
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    if (!(lambda > 0.0) || d == 0) throw InputError("lambda and d must be positive");
    const double one_minus = 1.0 - gamma;

    const double l_real = (std::log(1.0 / epsilon) + 2.0 * std::log(1.0 / one_minus) + std::log(4.0)) / one_minus;
    const auto L = static_cast<std::size_t>(std::max(1.0, std::ceil(l_real)));

    const double c = volume_constant;
    const double width = c + std::sqrt(static_cast<double>(d) * std::max(std::log(c / (one_minus * delta)), 0.0)) / lambda;
    const double log_term = std::max(std::log(1.0 / (epsilon * one_minus)), 1.0);
    double j_real = 0.0;
    if (const auto* p = std::get_if<PolynomialDecay>(&profile)) {
        if (!(p->beta_p > 1.0)) throw InputError("polynomial eigendecay needs beta_p > 1");
        const double e = epsilon_exponent(profile);
        const double b = p->beta_p;
        j_real = std::pow(gamma / epsilon, e) * std::pow(one_minus, -6.0 * b / (b - 1.0)) * std::pow(width, e) *
                 std::pow(log_term, b / (b - 1.0));
    } else {
        const auto& x = std::get<ExponentialDecay>(profile);
        j_real = std::pow(gamma / epsilon, 2.0) * std::pow(one_minus, -6.0) * width * width *
                 std::pow(log_term, 2.0 + 1.0 / x.beta_e);
    }
    const double capped = std::min(std::ceil(j_real), 1e15);
    return {static_cast<std::size_t>(std::max(capped, 1.0)), L};
}

}  // namespace kqlearn
