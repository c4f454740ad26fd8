#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kqlearn/design.hpp"
#include "kqlearn/kernels.hpp"
#include "kqlearn/krr.hpp"
#include "kqlearn/mdp.hpp"

namespace kqlearn {

struct KqlearnConfig {
    std::size_t J = 200;
    std::size_t L = 40;
    double lambda = 1.0;
    double delta = 0.1;
    double gamma = 0.8;
    std::uint64_t seed = 0;
    /// Constant c bounding ||PV|| <= c / (1 - gamma); 1 on the normalized domain.
    double volume_constant = 1.0;

    std::size_t samples() const { return J * L; }
    void validate() const;
};

/// Observation vector Y^(l) on the design after round l.
struct RoundState {
    Eigen::VectorXd y;
    std::size_t round_index = 0;
};

/// Approximate Bellman update on a fixed design.  The design factor is reused
/// across rounds; each round costs one pair of triangular solves plus a
/// grid-by-design matrix-vector product.
class ApproximateBellman {
public:
    /// design_indices[j] is the flat state-action index of design point j;
    /// grid_cross is (n_state_actions x J) with K(z_{sa}, u_j).
    ApproximateBellman(const FiniteMdp& mdp, RegressionModel model, Eigen::MatrixXd grid_cross,
                       std::vector<std::size_t> design_indices);

    /// PV regressor k(z)' (K + lambda^2 I)^{-1} y evaluated on every state-action.
    Eigen::VectorXd regress(const Eigen::VectorXd& y) const;

    /// One round: one generative-model draw per design point, then
    /// y[j] = clip(max_a r(s', a) + gamma * regress(prev.y)(s', a), 0, 1/(1-gamma)).
    RoundState next(const RoundState& prev, GenerativeModel& gen) const;

    const RegressionModel& model() const { return model_; }
    const std::vector<std::size_t>& design_indices() const { return design_indices_; }
    const Eigen::MatrixXd& grid_cross() const { return grid_cross_; }

private:
    const FiniteMdp* mdp_;
    RegressionModel model_;
    Eigen::MatrixXd grid_cross_;
    std::vector<std::size_t> design_indices_;
};

RoundState bellman_round(const RoundState& prev, const ApproximateBellman& op, GenerativeModel& gen);

/// Qhat(s,a) = r(s,a) + gamma k_U(z_{sa})' weights, weights = (K + lambda^2 I)^{-1} Y^(L).
class ProxyQ {
public:
    ProxyQ(KernelSpec kernel, DesignSet design, Eigen::VectorXd weights, Eigen::MatrixXd reward, double gamma,
           PointList embedding);

    double operator()(std::size_t s, std::size_t a) const;
    QFunction table() const;

    const DesignSet& design() const { return design_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    double gamma() const { return gamma_; }

private:
    KernelSpec kernel_;
    DesignSet design_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd reward_;
    double gamma_;
    PointList embedding_;
};

struct RunResult {
    ProxyQ proxy;
    Policy policy;
    GreedyTrace trace;
    std::size_t samples_used = 0;
    std::vector<RoundState> y_history;  // Y^(0) .. Y^(L)
    double beta = 0.0;
    double info_gain = 0.0;
    double theorem1_bound = 0.0;
};

/// Design phase, L approximate Bellman rounds from Y^(0) = 0, proxy Q and its
/// greedy policy.  cfg.gamma must equal mdp.gamma().
RunResult run(const FiniteMdp& mdp, const KernelSpec& k, const KqlearnConfig& cfg);

/// Certified confidence width used for the PV regression: C_K = c/(1-gamma),
/// R = 1/(2(1-gamma)), union bound over n_candidates.
double pv_confidence_width(const KqlearnConfig& cfg, std::size_t n_candidates);

/// 2 beta (gamma/(1-gamma))^2 sqrt(2 Gamma / (J log(1 + 1/lambda^2))) + 2 gamma^(L-1) / (1-gamma)^2.
double theorem1_bound(const KqlearnConfig& cfg, double beta, double gamma_info);

/// Exponent of 1/epsilon in the sample-size rule for this eigendecay profile.
double epsilon_exponent(const EigendecayProfile& profile);

/// Experiment sizing with unit implied constants.  L = ceil((ln(1/eps) +
/// 2 ln(1/(1-gamma)) + ln 4) / (1-gamma)); J follows the eigendecay-specific
/// rule (polynomial or exponential).  Not a certified guarantee.
std::pair<std::size_t, std::size_t> suggest_jl(double epsilon, double gamma, const EigendecayProfile& profile,
                                               double delta, double lambda = 1.0, std::size_t d = 1,
                                               double volume_constant = 1.0);

}  // namespace kqlearn
