#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "kqlearn/kernels.hpp"

namespace kqlearn {

/// Ordered design points U_J (selection order preserved) plus the ridge
/// parameter lambda; the regularized system is K_U + lambda^2 I.
struct DesignSet {
    PointList points;
    double lambda = 1.0;
};

/// Kernel ridge regressor over a fixed design.  Holds the lower Cholesky
/// factor of K_U + lambda^2 I and, once observations are attached, the
/// weights (K_U + lambda^2 I)^{-1} y.  Immutable: add_point and
/// with_observations return new models.
class RegressionModel {
public:
    /// Empty design; posterior_std(z) = sqrt(K(z,z)).
    RegressionModel(KernelSpec kernel, double lambda);

    /// Factorizes the design in one shot.  Throws NumericError when the
    /// jittered factorization fails.
    RegressionModel(KernelSpec kernel, DesignSet design);

    /// Adopts an existing lower factor of K_U + lambda^2 I (e.g. the one grown
    /// during greedy design).  Only the shape is checked.
    static RegressionModel from_factor(KernelSpec kernel, DesignSet design, Eigen::MatrixXd factor);

    RegressionModel add_point(const Point& z) const;
    RegressionModel with_observations(Eigen::VectorXd y) const;

    bool has_observations() const { return y_.has_value(); }
    std::size_t size() const { return design_.points.size(); }
    const DesignSet& design() const { return design_; }
    const KernelSpec& kernel() const { return kernel_; }
    double lambda() const { return design_.lambda; }
    const Eigen::MatrixXd& factor() const { return factor_; }
    const Eigen::VectorXd& observations() const;
    const Eigen::VectorXd& weights() const;

    /// k_U(z) = [K(z, u_1), ..., K(z, u_J)].
    Eigen::VectorXd kernel_vector(const Point& z) const;

    /// (K_U + lambda^2 I)^{-1} v via two triangular solves.
    Eigen::VectorXd solve(const Eigen::VectorXd& v) const;

    double predict(const Point& z) const;
    double posterior_variance(const Point& z) const;
    double posterior_std(const Point& z) const;

    /// log det(K_U + lambda^2 I) from the factor's diagonal.
    double log_det() const;

private:
    KernelSpec kernel_;
    DesignSet design_;
    Eigen::MatrixXd factor_;
    std::optional<Eigen::VectorXd> y_;
    Eigen::VectorXd weights_;
};

/// Fits y on the design.  InputError on length mismatch or an empty design.
RegressionModel fit(const KernelSpec& k, DesignSet design, Eigen::VectorXd y);

double predict(const RegressionModel& m, const Point& z);
double posterior_std(const RegressionModel& m, const Point& z);
RegressionModel add_point(const RegressionModel& m, const Point& z);

/// beta(delta) = C_K + (R / lambda) sqrt(2 ln(2 n / delta)): per-point
/// sub-Gaussian tail plus a union bound over n candidate points.
double confidence_width(double c_k, double r, double lambda, std::size_t n_candidates, double delta);

/// Jitter values tried, in order, after a plain factorization fails.
inline constexpr double kJitterLadder[] = {1e-10, 1e-8, 1e-6};

/// Sigma^2 in (-kVarianceClampTol, 0) is clamped to 0; below that is an error.
inline constexpr double kVarianceClampTol = 1e-10;

}  // namespace kqlearn
