#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kqlearn/design.hpp"
#include "kqlearn/kernels.hpp"
#include "kqlearn/rng.hpp"

namespace kqlearn {

using ValueFunction = Eigen::VectorXd;
using QFunction = Eigen::MatrixXd;  // n_states x n_actions

/// Deterministic policy: action_of[s] in [0, n_actions).
struct Policy {
    std::vector<std::size_t> action_of;
};

/// Tabular discounted MDP whose state-action pairs are embedded in [0,1]^d.
/// State-action (s, a) has flat index s * n_actions + a.
class FiniteMdp {
public:
    /// transition is laid out [s][a][s'] in a flat vector.  Throws InputError
    /// when any invariant fails (row sums, reward range, gamma, embedding).
    FiniteMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
              Eigen::MatrixXd reward, double gamma, PointList embedding);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t n_state_actions() const { return n_states_ * n_actions_; }
    double gamma() const { return gamma_; }
    double v_max() const { return 1.0 / (1.0 - gamma_); }

    double p(std::size_t s, std::size_t a, std::size_t s_next) const {
        return transition_[(s * n_actions_ + a) * n_states_ + s_next];
    }
    /// Pointer to the n_states successor probabilities of (s, a).
    const double* row(std::size_t s, std::size_t a) const {
        return transition_.data() + (s * n_actions_ + a) * n_states_;
    }
    const std::vector<double>& transition() const { return transition_; }
    const Eigen::MatrixXd& reward() const { return reward_; }
    double r(std::size_t s, std::size_t a) const { return reward_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)); }
    const PointList& embedding() const { return embedding_; }
    const Point& point(std::size_t s, std::size_t a) const { return embedding_[s * n_actions_ + a]; }
    std::size_t dimension() const { return static_cast<std::size_t>(embedding_.front().size()); }

    /// The embedded state-action set as a candidate grid for design.
    CandidateGrid grid() const;

    FiniteMdp with_gamma(double gamma) const;
    FiniteMdp with_reward(Eigen::MatrixXd reward) const;

    /// sum_{s'} P(s'|s,a) V(s') for all (s, a).
    QFunction expected_next(const ValueFunction& v) const;

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> transition_;
    Eigen::MatrixXd reward_;
    double gamma_;
    PointList embedding_;
};

struct RkhsMdpParams {
    std::size_t n_states = 20;
    std::size_t n_actions = 4;
    std::size_t d = 2;
    double gamma = 0.8;
    double mix = 0.0;
    std::uint64_t seed = 0;
};

/// Generated MDP plus the construction data needed to audit it.
struct RkhsMdpInstance {
    FiniteMdp mdp;
    PointList anchors;              // c_{s'}
    double mix_used = 0.0;          // requested mix, shrunk if the norm cap bound
    std::vector<double> slice_norms;  // RKHS norm of z -> P(s'|z) for each s'
};

/// Largest mix that keeps every transition entry nonnegative for these
/// parameters (embedding, anchors and rewards depend only on the seed).
double feasible_mix_limit(const KernelSpec& k, const RkhsMdpParams& params);

/// P(s'|z) = 1/S + mix (K(z, c_{s'}) - mean_{s''} K(z, c_{s''})).  Each slice is
/// 1/S plus a finite kernel expansion; its norm is sqrt(w' G w + 1/S^2) with
/// the constant carried by a unit-norm constant feature, and mix is shrunk
/// until every slice norm is at most 1.  ConstructionError when the
/// requested mix would produce negative probabilities.
RkhsMdpInstance build_rkhs_mdp_instance(const KernelSpec& k, const RkhsMdpParams& params);
FiniteMdp build_rkhs_mdp(const KernelSpec& k, const RkhsMdpParams& params);

/// Halton sequence with a seeded Cranley-Patterson rotation.
PointList scrambled_halton(std::size_t n, std::size_t d, std::uint64_t seed);

/// Sampling oracle for s' ~ P(.|s,a).  Single owner; counts every draw.
class GenerativeModel {
public:
    GenerativeModel(const FiniteMdp& mdp, std::uint64_t seed);

    std::size_t sample_transition(std::size_t s, std::size_t a);
    std::size_t sample_count() const { return sample_count_; }
    const FiniteMdp& mdp() const { return *mdp_; }

private:
    const FiniteMdp* mdp_;
    Rng rng_;
    std::vector<double> cdf_;
    std::size_t sample_count_ = 0;
};

struct OptimalValues {
    ValueFunction v;
    QFunction q;
    std::size_t iterations = 0;
};

/// [T V](s) = max_a r(s,a) + gamma sum_{s'} P(s'|s,a) V(s').
ValueFunction bellman_optimality(const FiniteMdp& m, const ValueFunction& v);

/// Value iteration stopped when ||V_{t+1} - V_t|| <= tol (1-gamma) / (2 gamma),
/// which certifies ||V - V*||_inf <= tol.
OptimalValues exact_value_iteration(const FiniteMdp& m, double tol);

/// Value iteration followed by policy iteration from its greedy policy.  The
/// returned V is the exact value of the final policy, so it matches V* to
/// solver roundoff rather than to tol.
OptimalValues refined_optimal_values(const FiniteMdp& m, double tol);

/// V^pi.  Direct LU solve of (I - gamma P_pi) V = r_pi up to 1000 states,
/// iterative evaluation (same stopping contract as value iteration) beyond.
ValueFunction policy_value(const FiniteMdp& m, const Policy& pi, double tol);

/// argmax_a q(s, a), lowest action index on ties.
Policy greedy_policy(const QFunction& q);

double sup_norm(const Eigen::VectorXd& v);

}  // namespace kqlearn
