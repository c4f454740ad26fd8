#include "kqlearn/krr.hpp"

#include <cmath>
#include <string>

#include "kqlearn/errors.hpp"

namespace kqlearn {

namespace {

Eigen::MatrixXd factorize(Eigen::MatrixXd a) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    for (double jitter : kJitterLadder) {
        a.diagonal().array() += jitter;
        llt.compute(a);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericError("Cholesky factorization of K + lambda^2 I failed after jitter escalation");
}

}  // namespace

RegressionModel::RegressionModel(KernelSpec kernel, double lambda)
    : kernel_(std::move(kernel)), design_{{}, lambda} {
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
}

RegressionModel::RegressionModel(KernelSpec kernel, DesignSet design)
    : kernel_(std::move(kernel)), design_(std::move(design)) {
    if (!(design_.lambda > 0.0)) throw InputError("lambda must be positive");
    if (design_.points.empty()) return;
    Eigen::MatrixXd a = gram(kernel_, design_.points);
    a.diagonal().array() += design_.lambda * design_.lambda;
    factor_ = factorize(std::move(a));
}

RegressionModel RegressionModel::from_factor(KernelSpec kernel, DesignSet design, Eigen::MatrixXd factor) {
    const auto n = static_cast<Eigen::Index>(design.points.size());
    if (factor.rows() != n || factor.cols() != n) throw InputError("factor shape does not match the design");
    RegressionModel out(std::move(kernel), design.lambda);
    out.design_ = std::move(design);
    out.factor_ = std::move(factor);
    return out;
}

RegressionModel RegressionModel::add_point(const Point& z) const {
    RegressionModel out(kernel_, design_.lambda);
    out.design_.points = design_.points;
    out.design_.points.push_back(z);

    const auto n = static_cast<Eigen::Index>(size());
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    if (n > 0) row = factor_.triangularView<Eigen::Lower>().solve(kernel_vector(z));
    const double base = kernel_(z, z) + design_.lambda * design_.lambda - row.squaredNorm();
    double pivot2 = base;
    for (std::size_t attempt = 0; !(pivot2 > 0.0); ++attempt) {
        if (attempt == std::size(kJitterLadder))
            throw NumericError("non-positive pivot in rank-one factor update");
        pivot2 = base + kJitterLadder[attempt];
    }

    out.factor_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
    out.factor_.topLeftCorner(n, n) = factor_;
    out.factor_.block(n, 0, 1, n) = row.transpose();
    out.factor_(n, n) = std::sqrt(pivot2);
    return out;
}

RegressionModel RegressionModel::with_observations(Eigen::VectorXd y) const {
    if (static_cast<std::size_t>(y.size()) != size())
        throw InputError("observation vector length " + std::to_string(y.size()) +
                         " does not match design size " + std::to_string(size()));
    if (size() == 0) throw InputError("cannot attach observations to an empty design");
    RegressionModel out = *this;
    out.weights_ = solve(y);
    out.y_ = std::move(y);
    return out;
}

const Eigen::VectorXd& RegressionModel::observations() const {
    if (!y_) throw StateError("regression model has no observations");
    return *y_;
}

const Eigen::VectorXd& RegressionModel::weights() const {
    if (!y_) throw StateError("regression model has no observations");
    return weights_;
}

Eigen::VectorXd RegressionModel::kernel_vector(const Point& z) const {
    Eigen::VectorXd k(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) k[static_cast<Eigen::Index>(i)] = kernel_(z, design_.points[i]);
    return k;
}

Eigen::VectorXd RegressionModel::solve(const Eigen::VectorXd& v) const {
    if (static_cast<std::size_t>(v.size()) != size()) throw InputError("solve: length mismatch");
    if (size() == 0) return v;
    Eigen::VectorXd w = factor_.triangularView<Eigen::Lower>().solve(v);
    factor_.triangularView<Eigen::Lower>().transpose().solveInPlace(w);
    return w;
}

double RegressionModel::predict(const Point& z) const {
    if (!y_) throw StateError("predict requires observations");
    return kernel_vector(z).dot(weights_);
}

double RegressionModel::posterior_variance(const Point& z) const {
    const double prior = kernel_(z, z);
    if (size() == 0) return prior;
    const Eigen::VectorXd c = factor_.triangularView<Eigen::Lower>().solve(kernel_vector(z));
    const double v = prior - c.squaredNorm();
    if (v >= 0.0) return v;
    if (v > -kVarianceClampTol) return 0.0;
    throw NumericError("posterior variance " + std::to_string(v) + " is negative beyond tolerance");
}

double RegressionModel::posterior_std(const Point& z) const { return std::sqrt(posterior_variance(z)); }

double RegressionModel::log_det() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < factor_.rows(); ++i) s += std::log(factor_(i, i));
    return 2.0 * s;
}

RegressionModel fit(const KernelSpec& k, DesignSet design, Eigen::VectorXd y) {
    if (design.points.empty()) throw InputError("fit: empty design");
    if (static_cast<std::size_t>(y.size()) != design.points.size())
        throw InputError("fit: observation vector length does not match design size");
    return RegressionModel(k, std::move(design)).with_observations(std::move(y));
}

double predict(const RegressionModel& m, const Point& z) { return m.predict(z); }
double posterior_std(const RegressionModel& m, const Point& z) { return m.posterior_std(z); }
RegressionModel add_point(const RegressionModel& m, const Point& z) { return m.add_point(z); }

double confidence_width(double c_k, double r, double lambda, std::size_t n_candidates, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (n_candidates == 0) throw InputError("n_candidates must be positive");
    if (c_k < 0.0 || r < 0.0) throw InputError("C_K and R must be nonnegative");
    return c_k + (r / lambda) * std::sqrt(2.0 * std::log(2.0 * static_cast<double>(n_candidates) / delta));
}

}  // namespace kqlearn
