#include <gtest/gtest.h>

#include <cmath>

#include "kqlearn/errors.hpp"
#include "kqlearn/krr.hpp"
#include "oracles.hpp"

using namespace kqlearn;

TEST(Fit, SinglePointClosedForm) {
    const auto k = KernelSpec::squared_exponential(0.2);
    const Point z = Point::Constant(2, 0.5);
    const auto m = fit(k, DesignSet{{z}, 1.0}, Eigen::VectorXd::Constant(1, 2.0));
    EXPECT_NEAR(predict(m, z), 1.0, 1e-15);
    const auto m1 = fit(k, DesignSet{{z}, 1.0}, Eigen::VectorXd::Constant(1, 1.0));
    EXPECT_NEAR(predict(m1, z), 0.5, 1e-15);
}

TEST(Fit, ZeroObservationsPredictZero) {
    Rng rng(3);
    const auto k = KernelSpec::matern(1.5, 0.2);
    const auto m = fit(k, DesignSet{oracle::random_points(rng, 8, 2), 1.0}, Eigen::VectorXd::Zero(8));
    for (int i = 0; i < 20; ++i) EXPECT_EQ(predict(m, oracle::random_point(rng, 2)), 0.0);
}

TEST(Fit, MatchesDenseSolve) {
    Rng rng(7);
    const auto k = KernelSpec::squared_exponential(0.3);
    const PointList pts = oracle::random_points(rng, 4, 2);
    Eigen::VectorXd y(4);
    for (auto& v : y) v = rng.uniform(-1, 1);
    Eigen::MatrixXd a = oracle::dense_gram(k, pts) + Eigen::MatrixXd::Identity(4, 4);
    const Eigen::VectorXd alpha = a.fullPivLu().solve(y);
    const auto m = fit(k, DesignSet{pts, 1.0}, y);
    for (int i = 0; i < 10; ++i) {
        const Point z = oracle::random_point(rng, 2);
        EXPECT_NEAR(predict(m, z), oracle::kvec(k, pts, z).dot(alpha), 1e-10);
    }
}

TEST(Fit, Errors) {
    const auto k = KernelSpec::squared_exponential(0.2);
    EXPECT_THROW(fit(k, DesignSet{{Point::Zero(1)}, 1.0}, Eigen::VectorXd::Zero(2)), InputError);
    EXPECT_THROW(fit(k, DesignSet{{}, 1.0}, Eigen::VectorXd::Zero(0)), InputError);
    EXPECT_THROW(RegressionModel(k, 0.0), InputError);
    const RegressionModel design_only(k, DesignSet{{Point::Zero(1)}, 1.0});
    EXPECT_THROW(design_only.predict(Point::Zero(1)), StateError);
}

TEST(Predict, FarFromDesignIsNearZero) {
    const auto k = KernelSpec::squared_exponential(0.05);
    Eigen::VectorXd y(2);
    y << 3.0, -4.0;
    const auto m = fit(k, DesignSet{{Point::Constant(1, 0.0), Point::Constant(1, 0.05)}, 1.0}, y);
    EXPECT_LE(std::abs(predict(m, Point::Constant(1, 1.0))), 1e-6 * y.norm());
}

TEST(Predict, LinearInObservations) {
    Rng rng(8);
    const auto k = KernelSpec::matern(2.5, 0.2);
    const PointList pts = oracle::random_points(rng, 6, 2);
    Eigen::VectorXd y(6);
    for (auto& v : y) v = rng.uniform(0, 2);
    const RegressionModel base(k, DesignSet{pts, 1.0});
    const auto m = base.with_observations(y);
    const auto m3 = base.with_observations(3.0 * y);
    for (int i = 0; i < 10; ++i) {
        const Point z = oracle::random_point(rng, 2);
        EXPECT_NEAR(m3.predict(z), 3.0 * m.predict(z), 1e-12);
    }
}

TEST(PosteriorStd, EmptyDesignIsPriorStd) {
    const RegressionModel m(KernelSpec::squared_exponential(0.2), 1.0);
    EXPECT_EQ(posterior_std(m, Point::Constant(2, 0.3)), 1.0);
}

TEST(PosteriorStd, SinglePointClosedForm) {
    const Point z = Point::Constant(2, 0.3);
    const RegressionModel m(KernelSpec::squared_exponential(0.2), DesignSet{{z}, 1.0});
    EXPECT_NEAR(m.posterior_variance(z), 0.5, 1e-15);
    EXPECT_NEAR(posterior_std(m, z), 0.7071067811865476, 1e-15);
}

TEST(PosteriorStd, IndependentOfObservationsBitwise) {
    Rng rng(12);
    const auto k = KernelSpec::squared_exponential(0.2);
    const RegressionModel base(k, DesignSet{oracle::random_points(rng, 10, 2), 0.7});
    const auto a = base.with_observations(Eigen::VectorXd::Random(10));
    const auto b = base.with_observations(Eigen::VectorXd::Constant(10, 42.0));
    for (int i = 0; i < 50; ++i) {
        const Point z = oracle::random_point(rng, 2);
        EXPECT_EQ(a.posterior_std(z), b.posterior_std(z));
    }
}

TEST(PosteriorStd, MonotoneUnderAddedPoints) {
    Rng rng(13);
    for (const auto& k : {KernelSpec::squared_exponential(0.2), KernelSpec::matern(0.5, 0.2)}) {
        const PointList grid = oracle::random_points(rng, 100, 2);
        RegressionModel m(k, 1.0);
        std::vector<double> prev;
        for (const auto& z : grid) prev.push_back(m.posterior_std(z));
        for (int j = 0; j < 20; ++j) {
            m = m.add_point(oracle::random_point(rng, 2));
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double s = m.posterior_std(grid[g]);
                ASSERT_LE(s, prev[g] + 1e-9);
                prev[g] = s;
            }
        }
    }
}

TEST(AddPoint, ToEmptyModel) {
    for (double lambda : {0.5, 1.0, 2.0}) {
        const Point z = Point::Constant(1, 0.4);
        const auto m = add_point(RegressionModel(KernelSpec::squared_exponential(0.2), lambda), z);
        EXPECT_NEAR(m.posterior_std(z), lambda / std::sqrt(1 + lambda * lambda), 1e-15);
    }
}

TEST(AddPoint, DuplicateTwice) {
    const Point z = Point::Constant(1, 0.4);
    const auto m = RegressionModel(KernelSpec::squared_exponential(0.2), 1.0).add_point(z).add_point(z);
    EXPECT_NEAR(m.posterior_variance(z), 1.0 / 3.0, 1e-15);
}

TEST(AddPoint, IncrementalMatchesFromScratch) {
    Rng rng(21);
    const auto k = KernelSpec::matern(1.5, 0.25);
    const PointList grid = oracle::random_points(rng, 100, 2);
    RegressionModel inc(k, 1.0);
    PointList pts;
    for (int j = 0; j < 20; ++j) {
        pts.push_back(oracle::random_point(rng, 2));
        inc = inc.add_point(pts.back());
    }
    const RegressionModel scratch(k, DesignSet{pts, 1.0});
    double worst = 0.0;
    for (const auto& z : grid) worst = std::max(worst, std::abs(inc.posterior_std(z) - scratch.posterior_std(z)));
    EXPECT_LE(worst, 1e-9);
}

TEST(Factor, ReconstructsRegularizedGram) {
    Rng rng(22);
    const auto k = KernelSpec::squared_exponential(0.2);
    const PointList pts = oracle::random_points(rng, 40, 2);
    const RegressionModel m(k, DesignSet{pts, 0.8});
    Eigen::MatrixXd a = oracle::dense_gram(k, pts) + 0.64 * Eigen::MatrixXd::Identity(40, 40);
    const Eigen::MatrixXd rec = m.factor() * m.factor().transpose();
    EXPECT_LE((rec - a).norm() / a.norm(), 1e-9);
}

TEST(Eq2, MatchesNaiveDenseInverse) {
    Rng rng(31);
    const std::vector<std::pair<KernelSpec, std::size_t>> kernels = {
        {KernelSpec::squared_exponential(0.2), 2}, {KernelSpec::matern(0.5, 0.2), 2},
        {KernelSpec::finite_rank({0.4, 0.2, 0.1, 0.05}), 1}};
    double worst = 0.0;
    for (int inst = 0; inst < 30; ++inst) {
        const auto& [k, d] = kernels[static_cast<std::size_t>(inst) % kernels.size()];
        const std::size_t J = 1 + rng.below(50);
        const double lambda = 0.5 + rng.uniform();
        const PointList pts = oracle::random_points(rng, J, d);
        Eigen::VectorXd y(static_cast<Eigen::Index>(J));
        for (auto& v : y) v = rng.uniform(-3, 3);
        const auto m = fit(k, DesignSet{pts, lambda}, y);
        for (int q = 0; q < 5; ++q) {
            const Point z = oracle::random_point(rng, d);
            worst = std::max(worst, std::abs(m.predict(z) - oracle::dense_mean(k, pts, lambda, y, z)));
            worst = std::max(worst, std::abs(m.posterior_std(z) -
                                             std::sqrt(std::max(oracle::dense_variance(k, pts, lambda, z), 0.0))));
        }
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(ConfidenceWidth, ClosedForms) {
    EXPECT_NEAR(confidence_width(1, 1, 1, 100, 0.05), 5.0728490372470295, 1e-12);
    EXPECT_EQ(confidence_width(2.5, 0, 1, 100, 0.05), 2.5);
    EXPECT_NEAR(confidence_width(1, 1, 1, 1, 1.0 - 1e-12), 1.0 + std::sqrt(2 * std::log(2.0)), 1e-9);
}

TEST(ConfidenceWidth, Monotonicity) {
    double prev = 0.0;
    for (double delta = 0.95; delta > 0.001; delta *= 0.8) {
        const double b = confidence_width(1, 1, 1, 10, delta);
        EXPECT_GE(b, prev);
        prev = b;
    }
    EXPECT_LE(confidence_width(1, 1, 1, 10, 0.1), confidence_width(1, 1, 1, 11, 0.1));
}

TEST(ConfidenceWidth, RejectsBadDelta) {
    EXPECT_THROW(confidence_width(1, 1, 1, 10, 0.0), InputError);
    EXPECT_THROW(confidence_width(1, 1, 1, 10, 1.0), InputError);
}
