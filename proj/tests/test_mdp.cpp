#include <gtest/gtest.h>

#include <cmath>

#include "kqlearn/errors.hpp"
#include "kqlearn/mdp.hpp"
#include "oracles.hpp"

using namespace kqlearn;

namespace {

PointList line_embedding(std::size_t n) {
    PointList e;
    for (std::size_t i = 0; i < n; ++i) e.push_back(Point::Constant(1, (i + 0.5) / n));
    return e;
}

// Random dense MDP with a random 1-d embedding.
FiniteMdp random_mdp(Rng& rng, std::size_t S, std::size_t A, double gamma) {
    std::vector<double> p(S * A * S);
    for (std::size_t sa = 0; sa < S * A; ++sa) {
        double total = 0.0;
        for (std::size_t t = 0; t < S; ++t) total += p[sa * S + t] = rng.uniform() + 1e-3;
        for (std::size_t t = 0; t < S; ++t) p[sa * S + t] /= total;
    }
    Eigen::MatrixXd r(S, A);
    for (auto& x : r.reshaped()) x = rng.uniform();
    return FiniteMdp(S, A, std::move(p), r, gamma, line_embedding(S * A));
}

FiniteMdp two_state_chain() {
    // s0 -> s1 with r = 0; s1 self-loop with r = 1
    return FiniteMdp(2, 1, {0.0, 1.0, 0.0, 1.0}, (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished(), 0.5,
                     line_embedding(2));
}

}  // namespace

TEST(FiniteMdpCtor, RejectsInvalidData) {
    const Eigen::MatrixXd r = Eigen::MatrixXd::Zero(1, 1);
    EXPECT_THROW(FiniteMdp(1, 1, {0.9}, r, 0.5, line_embedding(1)), InputError);
    EXPECT_THROW(FiniteMdp(1, 1, {1.0}, r, 1.0, line_embedding(1)), InputError);
    EXPECT_THROW(FiniteMdp(1, 1, {1.0}, Eigen::MatrixXd::Constant(1, 1, 1.5), 0.5, line_embedding(1)), InputError);
    EXPECT_THROW(FiniteMdp(2, 1, {1.5, -0.5, 0.5, 0.5}, Eigen::MatrixXd::Zero(2, 1), 0.5, line_embedding(2)),
                 InputError);
    const PointList dup = {Point::Constant(1, 0.3), Point::Constant(1, 0.3)};
    EXPECT_THROW(FiniteMdp(2, 1, {0.5, 0.5, 0.5, 0.5}, Eigen::MatrixXd::Zero(2, 1), 0.5, dup), InputError);
}

TEST(RkhsMdp, ZeroMixIsUniform) {
    const auto inst = build_rkhs_mdp_instance(KernelSpec::squared_exponential(0.2), RkhsMdpParams{6, 3, 2, 0.8, 0.0, 4});
    for (double p : inst.mdp.transition()) EXPECT_EQ(p, 1.0 / 6);
}

TEST(RkhsMdp, RowsAreDistributionsAndSlicesAreInTheUnitBall) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        for (const auto& k : {KernelSpec::squared_exponential(0.2), KernelSpec::matern(1.5, 0.2)}) {
            RkhsMdpParams params{20, 4, 2, 0.8, 0.0, seed};
            params.mix = 0.9 * feasible_mix_limit(k, params);
            const auto inst = build_rkhs_mdp_instance(k, params);
            const auto& m = inst.mdp;
            for (std::size_t s = 0; s < m.n_states(); ++s)
                for (std::size_t a = 0; a < m.n_actions(); ++a) {
                    double total = 0.0;
                    for (std::size_t t = 0; t < m.n_states(); ++t) {
                        EXPECT_GE(m.p(s, a, t), 0.0);
                        total += m.p(s, a, t);
                    }
                    EXPECT_NEAR(total, 1.0, 1e-12);
                }
            ASSERT_EQ(inst.slice_norms.size(), 20u);
            // recompute each slice norm from the anchors directly
            const Eigen::MatrixXd g = oracle::dense_gram(k, inst.anchors);
            for (std::size_t t = 0; t < 20; ++t) {
                Eigen::VectorXd w = Eigen::VectorXd::Constant(20, -inst.mix_used / 20);
                w[static_cast<Eigen::Index>(t)] += inst.mix_used;
                const double norm = std::sqrt(w.dot(g * w) + 1.0 / 400);
                EXPECT_NEAR(inst.slice_norms[t], norm, 1e-12);
                EXPECT_LE(norm, 1.0 + 1e-12);
            }
        }
    }
}

TEST(RkhsMdp, ExcessiveMixIsConstructionError) {
    const auto k = KernelSpec::squared_exponential(0.2);
    RkhsMdpParams params{10, 2, 2, 0.8, 0.0, 1};
    params.mix = 1.5 * feasible_mix_limit(k, params);
    EXPECT_THROW(build_rkhs_mdp(k, params), ConstructionError);
}

TEST(RkhsMdp, SeedDeterminesInstance) {
    const auto k = KernelSpec::squared_exponential(0.2);
    const RkhsMdpParams params{8, 2, 2, 0.8, 0.05, 3};
    const auto a = build_rkhs_mdp(k, params), b = build_rkhs_mdp(k, params);
    EXPECT_EQ(a.transition(), b.transition());
    EXPECT_EQ(a.reward(), b.reward());
    auto other = params;
    other.seed = 4;
    EXPECT_NE(a.reward(), build_rkhs_mdp(k, other).reward());
}

TEST(Halton, InUnitCubeAndDistinct) {
    const auto pts = scrambled_halton(500, 3, 17);
    for (const auto& p : pts) {
        EXPECT_GE(p.minCoeff(), 0.0);
        EXPECT_LT(p.maxCoeff(), 1.0);
    }
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_NE(pts[i], pts[0]);
}

TEST(Sampler, DeterministicRow) {
    const auto m = two_state_chain();
    GenerativeModel gen(m, 1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(gen.sample_transition(0, 0), 1u);
    EXPECT_EQ(gen.sample_count(), 100u);
}

TEST(Sampler, UniformFrequencies) {
    std::vector<double> p(4 * 4, 0.25);
    const FiniteMdp m(4, 1, p, Eigen::MatrixXd::Zero(4, 1), 0.5, line_embedding(4));
    GenerativeModel gen(m, 2);
    std::vector<int> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[gen.sample_transition(2, 0)];
    for (int c : counts) EXPECT_NEAR(c / double(n), 0.25, 0.01);
    EXPECT_EQ(gen.sample_count(), static_cast<std::size_t>(n));
}

TEST(Sampler, InvalidIndicesAndCountUnchanged) {
    const auto m = two_state_chain();
    GenerativeModel gen(m, 3);
    EXPECT_THROW(gen.sample_transition(2, 0), InputError);
    EXPECT_THROW(gen.sample_transition(0, 1), InputError);
    EXPECT_EQ(gen.sample_count(), 0u);
}

TEST(Sampler, UnbiasedForFixedValue) {
    Rng rng(4);
    const auto m = random_mdp(rng, 7, 2, 0.8);
    Eigen::VectorXd v(7);
    for (auto& x : v) x = rng.uniform(0, 5);
    const QFunction pv = m.expected_next(v);
    GenerativeModel gen(m, 5);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = v[static_cast<Eigen::Index>(gen.sample_transition(3, 1))];
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    EXPECT_LE(std::abs(mean - pv(3, 1)), 4 * sd / std::sqrt(double(n)));
}

TEST(ValueIteration, SingleStateClosedForm) {
    const FiniteMdp m(1, 1, {1.0}, Eigen::MatrixXd::Ones(1, 1), 0.5, line_embedding(1));
    const auto opt = exact_value_iteration(m, 1e-12);
    EXPECT_NEAR(opt.v[0], 2.0, 1e-12);
}

TEST(ValueIteration, ZeroRewardGivesZero) {
    Rng rng(6);
    const auto m = random_mdp(rng, 5, 3, 0.9).with_reward(Eigen::MatrixXd::Zero(5, 3));
    EXPECT_EQ(sup_norm(exact_value_iteration(m, 1e-10).v), 0.0);
}

TEST(ValueIteration, TwoStateChain) {
    const auto opt = exact_value_iteration(two_state_chain(), 1e-12);
    EXPECT_NEAR(opt.v[0], 1.0, 1e-12);
    EXPECT_NEAR(opt.v[1], 2.0, 1e-12);
    EXPECT_NEAR(opt.q(1, 0), 2.0, 1e-12);
}

TEST(ValueIteration, CertifiedAgainstFixedPoint) {
    Rng rng(7);
    for (int inst = 0; inst < 10; ++inst) {
        const auto m = random_mdp(rng, 6, 3, 0.5 + 0.45 * rng.uniform());
        const double tol = 1e-6;
        const auto opt = exact_value_iteration(m, tol);
        // the optimal policy's exact value is V*
        const Policy pi = greedy_policy(exact_value_iteration(m, 1e-13).q);
        const ValueFunction v_star = policy_value(m, pi, 1e-13);
        EXPECT_LE(sup_norm(opt.v - v_star), tol);
        for (double x : opt.v) {
            EXPECT_GE(x, 0.0);
            EXPECT_LE(x, m.v_max());
        }
    }
}

TEST(PolicyValue, MatchesDirectSolve) {
    Rng rng(8);
    const auto m = random_mdp(rng, 5, 3, 0.9);
    Policy pi;
    for (int s = 0; s < 5; ++s) pi.action_of.push_back(rng.below(3));
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(5, 5);
    Eigen::VectorXd r(5);
    for (std::size_t s = 0; s < 5; ++s) {
        r[static_cast<Eigen::Index>(s)] = m.r(s, pi.action_of[s]);
        for (std::size_t t = 0; t < 5; ++t)
            a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) -= 0.9 * m.p(s, pi.action_of[s], t);
    }
    const Eigen::VectorXd direct = a.inverse() * r;
    EXPECT_LE(sup_norm(policy_value(m, pi, 1e-10) - direct), 1e-8);
}

TEST(PolicyValue, OptimalPolicyConsistent) {
    Rng rng(9);
    const auto m = random_mdp(rng, 8, 4, 0.8);
    const double tol = 1e-8;
    const auto opt = exact_value_iteration(m, tol);
    EXPECT_LE(sup_norm(policy_value(m, greedy_policy(opt.q), tol) - opt.v), 2 * tol);
}

TEST(PolicyValue, ZeroRewardAbsorbingAction) {
    // action 0 stays put with reward 0; action 1 pays 1
    std::vector<double> p = {1, 0, 0.5, 0.5, 0, 1, 0.5, 0.5};
    Eigen::MatrixXd r(2, 2);
    r << 0, 1, 0, 1;
    const FiniteMdp m(2, 2, p, r, 0.7, line_embedding(4));
    EXPECT_EQ(sup_norm(policy_value(m, Policy{{0, 0}}, 1e-10)), 0.0);
}

TEST(PolicyValue, RejectsInvalidPolicy) {
    const auto m = two_state_chain();
    EXPECT_THROW(policy_value(m, Policy{{0}}, 1e-8), InputError);
    EXPECT_THROW(policy_value(m, Policy{{0, 3}}, 1e-8), InputError);
}

TEST(Bellman, IsGammaContraction) {
    Rng rng(10);
    for (int inst = 0; inst < 20; ++inst) {
        const auto m = random_mdp(rng, 6, 3, 0.3 + 0.6 * rng.uniform());
        Eigen::VectorXd v1(6), v2(6);
        for (auto& x : v1) x = rng.uniform(-5, 5);
        for (auto& x : v2) x = rng.uniform(-5, 5);
        EXPECT_LE(sup_norm(bellman_optimality(m, v1) - bellman_optimality(m, v2)),
                  m.gamma() * sup_norm(v1 - v2) + 1e-12);
    }
}

TEST(GreedyPolicy, LowestIndexOnTies) {
    QFunction q(2, 3);
    q << 1, 1, 0, 0, 2, 2;
    EXPECT_EQ(greedy_policy(q).action_of, (std::vector<std::size_t>{0, 1}));
}

TEST(RefinedValues, AgreesWithValueIterationAndIsExactOnConstantReward) {
    Rng rng(11);
    for (int inst = 0; inst < 10; ++inst) {
        const auto m = random_mdp(rng, 7, 3, 0.5 + 0.45 * rng.uniform());
        EXPECT_LE(sup_norm(refined_optimal_values(m, 1e-8).v - exact_value_iteration(m, 1e-8).v), 1e-8);
        const auto ones = m.with_reward(Eigen::MatrixXd::Ones(7, 3));
        const auto v = refined_optimal_values(ones, 1e-8).v;
        EXPECT_LE(sup_norm(v - ValueFunction::Constant(7, ones.v_max())), 1e-12);
    }
}
