#include "kqlearn/mdp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "kqlearn/errors.hpp"

namespace kqlearn {

namespace {

constexpr std::array<unsigned, 20> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                              31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(std::size_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, x = 0.0;
    while (i > 0) {
        x += static_cast<double>(i % base) * f;
        i /= base;
        f *= inv;
    }
    return x;
}

enum StreamTag : std::uint64_t { kEmbedding = 1, kAnchors = 2, kRewards = 3 };

struct Layout {
    PointList embedding;
    PointList anchors;
    Eigen::MatrixXd reward;
    Eigen::MatrixXd k_za;  // state-action x anchor kernel values
};

Layout make_layout(const KernelSpec& k, const RkhsMdpParams& p) {
    if (p.n_states == 0 || p.n_actions == 0 || p.d == 0)
        throw InputError("n_states, n_actions and d must be positive");
    Layout l;
    l.embedding = scrambled_halton(p.n_states * p.n_actions, p.d, derive_seed({p.seed, kEmbedding}));

    Rng anchor_rng(derive_seed({p.seed, kAnchors}));
    for (std::size_t s = 0; s < p.n_states; ++s) {
        Point c(static_cast<Eigen::Index>(p.d));
        for (auto& x : c) x = anchor_rng.uniform();
        l.anchors.push_back(std::move(c));
    }

    Rng reward_rng(derive_seed({p.seed, kRewards}));
    l.reward.resize(static_cast<Eigen::Index>(p.n_states), static_cast<Eigen::Index>(p.n_actions));
    for (Eigen::Index s = 0; s < l.reward.rows(); ++s)
        for (Eigen::Index a = 0; a < l.reward.cols(); ++a) l.reward(s, a) = reward_rng.uniform();

    l.k_za = cross_gram(k, l.embedding, l.anchors);
    return l;
}

double nonnegativity_limit(const Layout& l) {
    const double uniform = 1.0 / static_cast<double>(l.anchors.size());
    double limit = std::numeric_limits<double>::infinity();
    for (Eigen::Index z = 0; z < l.k_za.rows(); ++z) {
        const double mean = l.k_za.row(z).mean();
        const double worst_drop = mean - l.k_za.row(z).minCoeff();
        if (worst_drop > 0.0) limit = std::min(limit, uniform / worst_drop);
    }
    return limit;
}

}  // namespace

FiniteMdp::FiniteMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
                     Eigen::MatrixXd reward, double gamma, PointList embedding)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      gamma_(gamma),
      embedding_(std::move(embedding)) {
    if (n_states_ == 0 || n_actions_ == 0) throw InputError("MDP needs at least one state and one action");
    if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw InputError("gamma must lie in (0, 1)");
    if (transition_.size() != n_states_ * n_actions_ * n_states_)
        throw InputError("transition tensor has the wrong size");
    if (reward_.rows() != static_cast<Eigen::Index>(n_states_) || reward_.cols() != static_cast<Eigen::Index>(n_actions_))
        throw InputError("reward matrix has the wrong shape");
    if (!((reward_.array() >= 0.0).all() && (reward_.array() <= 1.0).all()))
        throw InputError("rewards must lie in [0, 1]");
    for (std::size_t sa = 0; sa < n_states_ * n_actions_; ++sa) {
        double sum = 0.0;
        for (std::size_t s2 = 0; s2 < n_states_; ++s2) {
            const double v = transition_[sa * n_states_ + s2];
            if (!(v >= 0.0)) throw InputError("transition probabilities must be nonnegative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw InputError("transition row " + std::to_string(sa) + " sums to " + std::to_string(sum));
    }
    if (embedding_.size() != n_states_ * n_actions_) throw InputError("embedding needs one point per state-action");
    const auto d = embedding_.front().size();
    for (const auto& z : embedding_)
        if (z.size() != d || d == 0 || !z.allFinite()) throw InputError("embedding points must be finite with equal dimension");
    // injectivity: sort a copy lexicographically and compare neighbours
    std::vector<std::size_t> order(embedding_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto lex_less = [&](std::size_t i, std::size_t j) {
        return std::lexicographical_compare(embedding_[i].begin(), embedding_[i].end(), embedding_[j].begin(),
                                            embedding_[j].end());
    };
    std::sort(order.begin(), order.end(), lex_less);
    for (std::size_t i = 1; i < order.size(); ++i)
        if (embedding_[order[i]] == embedding_[order[i - 1]]) throw InputError("embedding must be injective");
}

CandidateGrid FiniteMdp::grid() const {
    CandidateGrid g;
    g.points = embedding_;
    g.state_action.reserve(embedding_.size());
    for (std::size_t s = 0; s < n_states_; ++s)
        for (std::size_t a = 0; a < n_actions_; ++a) g.state_action.emplace_back(s, a);
    return g;
}

FiniteMdp FiniteMdp::with_gamma(double gamma) const {
    return FiniteMdp(n_states_, n_actions_, transition_, reward_, gamma, embedding_);
}

FiniteMdp FiniteMdp::with_reward(Eigen::MatrixXd reward) const {
    return FiniteMdp(n_states_, n_actions_, transition_, std::move(reward), gamma_, embedding_);
}

QFunction FiniteMdp::expected_next(const ValueFunction& v) const {
    if (v.size() != static_cast<Eigen::Index>(n_states_)) throw InputError("value function has the wrong length");
    QFunction out(static_cast<Eigen::Index>(n_states_), static_cast<Eigen::Index>(n_actions_));
    for (std::size_t s = 0; s < n_states_; ++s)
        for (std::size_t a = 0; a < n_actions_; ++a) {
            const Eigen::Map<const Eigen::VectorXd> p(row(s, a), static_cast<Eigen::Index>(n_states_));
            out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = p.dot(v);
        }
    return out;
}

PointList scrambled_halton(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (d == 0 || d > kPrimes.size())
        throw InputError("embedding dimension must lie in [1, " + std::to_string(kPrimes.size()) + "]");
    Rng rng(seed);
    std::vector<double> shift(d);
    for (auto& s : shift) s = rng.uniform();
    PointList pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Point z(static_cast<Eigen::Index>(d));
        for (std::size_t k = 0; k < d; ++k) {
            double x = radical_inverse(i + 1, kPrimes[k]) + shift[k];
            z[static_cast<Eigen::Index>(k)] = x >= 1.0 ? x - 1.0 : x;
        }
        pts.push_back(std::move(z));
    }
    return pts;
}

double feasible_mix_limit(const KernelSpec& k, const RkhsMdpParams& params) {
    return nonnegativity_limit(make_layout(k, params));
}

RkhsMdpInstance build_rkhs_mdp_instance(const KernelSpec& k, const RkhsMdpParams& params) {
    if (!(params.mix >= 0.0 && params.mix < 1.0)) throw InputError("mix must lie in [0, 1)");
    Layout l = make_layout(k, params);
    const std::size_t S = params.n_states;
    const double uniform = 1.0 / static_cast<double>(S);

    const double limit = nonnegativity_limit(l);
    if (params.mix > limit)
        throw ConstructionError("mix " + std::to_string(params.mix) +
                                " makes transition probabilities negative; use mix <= " + std::to_string(limit));

    // slice s' has weights mix * (e_{s'} - 1/S) over the anchors
    const Eigen::MatrixXd g = gram(k, l.anchors);
    double worst_quad = 0.0;
    std::vector<double> quad(S);
    for (std::size_t s2 = 0; s2 < S; ++s2) {
        Eigen::VectorXd q = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(S), -uniform);
        q[static_cast<Eigen::Index>(s2)] += 1.0;
        quad[s2] = std::max(q.dot(g * q), 0.0);
        worst_quad = std::max(worst_quad, quad[s2]);
    }
    double mix = params.mix;
    const double budget = 1.0 - uniform * uniform;
    if (worst_quad > 0.0 && mix * mix * worst_quad > budget) mix = std::sqrt(budget / worst_quad);

    const std::size_t SA = S * params.n_actions;
    std::vector<double> transition(SA * S);
    for (std::size_t z = 0; z < SA; ++z) {
        const auto zi = static_cast<Eigen::Index>(z);
        const double mean = l.k_za.row(zi).mean();
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            const double v = uniform + mix * (l.k_za(zi, static_cast<Eigen::Index>(s2)) - mean);
            transition[z * S + s2] = std::max(v, 0.0);
        }
    }

    std::vector<double> norms(S);
    for (std::size_t s2 = 0; s2 < S; ++s2) norms[s2] = std::sqrt(mix * mix * quad[s2] + uniform * uniform);

    FiniteMdp mdp(S, params.n_actions, std::move(transition), std::move(l.reward), params.gamma,
                  std::move(l.embedding));
    return RkhsMdpInstance{std::move(mdp), std::move(l.anchors), mix, std::move(norms)};
}

FiniteMdp build_rkhs_mdp(const KernelSpec& k, const RkhsMdpParams& params) {
    return build_rkhs_mdp_instance(k, params).mdp;
}

GenerativeModel::GenerativeModel(const FiniteMdp& mdp, std::uint64_t seed) : mdp_(&mdp), rng_(seed) {
    const std::size_t S = mdp.n_states();
    cdf_.resize(mdp.transition().size());
    for (std::size_t sa = 0; sa < mdp.n_state_actions(); ++sa) {
        double acc = 0.0;
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            acc += mdp.transition()[sa * S + s2];
            cdf_[sa * S + s2] = acc;
        }
    }
}

std::size_t GenerativeModel::sample_transition(std::size_t s, std::size_t a) {
    const std::size_t S = mdp_->n_states();
    if (s >= S || a >= mdp_->n_actions()) throw InputError("state-action index out of range");
    const auto first = cdf_.begin() + static_cast<std::ptrdiff_t>((s * mdp_->n_actions() + a) * S);
    const auto last = first + static_cast<std::ptrdiff_t>(S);
    const double u = rng_.uniform() * *(last - 1);
    auto it = std::upper_bound(first, last, u);
    if (it == last) {
        // u landed on the rounded total; take the last successor with mass
        it = last - 1;
        while (it != first && *it == *(it - 1)) --it;
    }
    ++sample_count_;
    return static_cast<std::size_t>(it - first);
}

ValueFunction bellman_optimality(const FiniteMdp& m, const ValueFunction& v) {
    const QFunction q = m.reward() + m.gamma() * m.expected_next(v);
    return q.rowwise().maxCoeff();
}

OptimalValues exact_value_iteration(const FiniteMdp& m, double tol) {
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");
    const double stop = tol * (1.0 - m.gamma()) / (2.0 * m.gamma());
    OptimalValues out;
    out.v = ValueFunction::Zero(static_cast<Eigen::Index>(m.n_states()));
    for (;;) {
        ValueFunction next = bellman_optimality(m, out.v);
        ++out.iterations;
        const double change = sup_norm(next - out.v);
        out.v = std::move(next);
        if (change <= stop) break;
    }
    out.q = m.reward() + m.gamma() * m.expected_next(out.v);
    return out;
}

OptimalValues refined_optimal_values(const FiniteMdp& m, double tol) {
    OptimalValues out = exact_value_iteration(m, tol);
    Policy pi = greedy_policy(out.q);
    // switch only on clear improvements so roundoff cannot make it cycle
    constexpr double margin = 1e-12;
    for (;;) {
        out.v = policy_value(m, pi, tol);
        out.q = m.reward() + m.gamma() * m.expected_next(out.v);
        bool changed = false;
        for (std::size_t s = 0; s < m.n_states(); ++s) {
            const auto row = static_cast<Eigen::Index>(s);
            Eigen::Index best = 0;
            out.q.row(row).maxCoeff(&best);
            if (out.q(row, best) > out.q(row, static_cast<Eigen::Index>(pi.action_of[s])) + margin) {
                pi.action_of[s] = static_cast<std::size_t>(best);
                changed = true;
            }
        }
        ++out.iterations;
        if (!changed) return out;
    }
}

ValueFunction policy_value(const FiniteMdp& m, const Policy& pi, double tol) {
    const std::size_t S = m.n_states();
    if (pi.action_of.size() != S) throw InputError("policy length does not match the state count");
    for (auto a : pi.action_of)
        if (a >= m.n_actions()) throw InputError("policy action out of range");
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");

    const auto n = static_cast<Eigen::Index>(S);
    Eigen::VectorXd r_pi(n);
    for (std::size_t s = 0; s < S; ++s) r_pi[static_cast<Eigen::Index>(s)] = m.r(s, pi.action_of[s]);

    if (S <= 1000) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
        for (std::size_t s = 0; s < S; ++s) {
            const double* p = m.row(s, pi.action_of[s]);
            for (std::size_t s2 = 0; s2 < S; ++s2)
                a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) -= m.gamma() * p[s2];
        }
        return a.partialPivLu().solve(r_pi);
    }

    const double stop = tol * (1.0 - m.gamma()) / (2.0 * m.gamma());
    ValueFunction v = ValueFunction::Zero(n);
    for (;;) {
        ValueFunction next = r_pi;
        for (std::size_t s = 0; s < S; ++s) {
            const Eigen::Map<const Eigen::VectorXd> p(m.row(s, pi.action_of[s]), n);
            next[static_cast<Eigen::Index>(s)] += m.gamma() * p.dot(v);
        }
        const double change = sup_norm(next - v);
        v = std::move(next);
        if (change <= stop) return v;
    }
}

Policy greedy_policy(const QFunction& q) {
    Policy pi;
    pi.action_of.resize(static_cast<std::size_t>(q.rows()));
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        Eigen::Index best = 0;
        for (Eigen::Index a = 1; a < q.cols(); ++a)
            if (q(s, a) > q(s, best)) best = a;
        pi.action_of[static_cast<std::size_t>(s)] = static_cast<std::size_t>(best);
    }
    return pi;
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace kqlearn
