#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace kqlearn {

/// A state-action point embedded in [0,1]^d.
using Point = Eigen::VectorXd;
using PointList = std::vector<Point>;

struct SquaredExponential {
    double lengthscale = 0.2;
};

struct Matern {
    double nu = 2.5;  // one of 0.5, 1.5, 2.5
    double lengthscale = 0.2;
};

/// (offset + <z, z'>) / (offset + d); bounded by 1 on [0,1]^d.
struct Linear {
    double offset = 0.0;
};

/// K(z, z') = sum_m sigma_m psi_m(z) psi_m(z').  The default features are
/// psi_m(x) = sqrt(2) cos(m pi x) on [0,1] (orthonormal, m = 1..M).
struct FiniteRank {
    using Feature = std::function<double(std::size_t m, const Point& z)>;
    std::vector<double> eigenvalues;
    Feature feature;  // empty means the cosine basis
};

class KernelSpec {
public:
    using Variant = std::variant<SquaredExponential, Matern, Linear, FiniteRank>;

    static KernelSpec squared_exponential(double lengthscale = 0.2);
    static KernelSpec matern(double nu, double lengthscale = 0.2);
    static KernelSpec linear(double offset = 0.0);
    /// Eigenvalues must be positive and strictly descending.  With the cosine
    /// basis they are rescaled by 1/(2 sum sigma) when needed so K(z,z) <= 1.
    static KernelSpec finite_rank(std::vector<double> eigenvalues, FiniteRank::Feature feature = {});

    const Variant& variant() const { return variant_; }
    std::string kind() const;

    /// K(z, z2).  Throws InputError on dimension mismatch.
    double operator()(const Point& z, const Point& z2) const;

    /// Feature psi_m (0-based m) of the finite-rank variant.
    double feature(std::size_t m, const Point& z) const;

private:
    explicit KernelSpec(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

double eval(const KernelSpec& k, const Point& z, const Point& z2);

/// J x J Gram matrix over pts.  Throws InputError on an empty list.
Eigen::MatrixXd gram(const KernelSpec& k, const PointList& pts);

/// rows(a) x rows(b) cross-kernel matrix.
Eigen::MatrixXd cross_gram(const KernelSpec& k, const PointList& a, const PointList& b);

struct PolynomialDecay {
    double c_p = 1.0;
    double beta_p = 2.0;  // > 1
};

struct ExponentialDecay {
    double c_e1 = 1.0;
    double c_e2 = 1.0;
    double beta_e = 1.0;
};

using EigendecayProfile = std::variant<PolynomialDecay, ExponentialDecay>;

/// Leading term of the maximal-information-gain bound with unit implied
/// constant: J^{1/b}(log J)^{1-1/b} (polynomial) or (log J)^{1+1/b} (exponential).
/// Intended for scaling comparisons only.  Requires J >= 2.
double theoretical_info_gain_bound(const EigendecayProfile& profile, double J, double lambda);

/// Mercer eigendecay class of a kernel on [0,1]^d.  The linear kernel has no
/// profile here; wrap it as a finite-rank kernel instead.
EigendecayProfile eigendecay_of(const KernelSpec& k, std::size_t d);

}  // namespace kqlearn
