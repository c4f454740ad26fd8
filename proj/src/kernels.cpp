#include "kqlearn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kqlearn/errors.hpp"

namespace kqlearn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cosine_feature(std::size_t m, const Point& z) {
    return std::sqrt(2.0) * std::cos(static_cast<double>(m + 1) * M_PI * z[0]);
}

double matern_profile(double nu, double r) {
    if (nu == 0.5) return std::exp(-r);
    if (nu == 1.5) {
        const double a = std::sqrt(3.0) * r;
        return (1.0 + a) * std::exp(-a);
    }
    const double a = std::sqrt(5.0) * r;
    return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

}  // namespace

KernelSpec KernelSpec::squared_exponential(double lengthscale) {
    if (!(lengthscale > 0.0)) throw InputError("squared-exponential lengthscale must be positive");
    return KernelSpec(SquaredExponential{lengthscale});
}

KernelSpec KernelSpec::matern(double nu, double lengthscale) {
    if (nu != 0.5 && nu != 1.5 && nu != 2.5) throw InputError("matern nu must be 0.5, 1.5 or 2.5");
    if (!(lengthscale > 0.0)) throw InputError("matern lengthscale must be positive");
    return KernelSpec(Matern{nu, lengthscale});
}

KernelSpec KernelSpec::linear(double offset) {
    if (!(offset >= 0.0 && offset <= 1.0)) throw InputError("linear offset must lie in [0, 1]");
    return KernelSpec(Linear{offset});
}

KernelSpec KernelSpec::finite_rank(std::vector<double> eigenvalues, FiniteRank::Feature feature) {
    if (eigenvalues.empty()) throw InputError("finite-rank kernel needs at least one eigenvalue");
    for (std::size_t m = 0; m < eigenvalues.size(); ++m) {
        if (!(eigenvalues[m] > 0.0) || !std::isfinite(eigenvalues[m]))
            throw InputError("finite-rank eigenvalues must be positive and finite");
        if (m > 0 && !(eigenvalues[m] < eigenvalues[m - 1]))
            throw InputError("finite-rank eigenvalues must be strictly descending");
    }
    if (!feature) {
        // sup_x psi_m(x)^2 = 2 for the cosine basis
        const double worst = 2.0 * std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
        if (worst > 1.0)
            for (auto& s : eigenvalues) s /= worst;
    }
    return KernelSpec(FiniteRank{std::move(eigenvalues), std::move(feature)});
}

std::string KernelSpec::kind() const {
    return std::visit(overloaded{[](const SquaredExponential&) { return std::string("se"); },
                                 [](const Matern&) { return std::string("matern"); },
                                 [](const Linear&) { return std::string("linear"); },
                                 [](const FiniteRank&) { return std::string("finite_rank"); }},
                      variant_);
}

double KernelSpec::feature(std::size_t m, const Point& z) const {
    const auto* fr = std::get_if<FiniteRank>(&variant_);
    if (fr == nullptr) throw InputError("feature() is only defined for the finite-rank kernel");
    if (m >= fr->eigenvalues.size()) throw InputError("feature index out of range");
    if (fr->feature) return fr->feature(m, z);
    if (z.size() != 1) throw InputError("cosine finite-rank features are defined for d = 1 only");
    return cosine_feature(m, z);
}

double KernelSpec::operator()(const Point& z, const Point& z2) const {
    if (z.size() != z2.size() || z.size() == 0)
        throw InputError("kernel arguments must have equal, nonzero dimension");
    return std::visit(
        overloaded{
            [&](const SquaredExponential& se) {
                const double r2 = (z - z2).squaredNorm();
                return std::exp(-r2 / (2.0 * se.lengthscale * se.lengthscale));
            },
            [&](const Matern& mt) { return matern_profile(mt.nu, (z - z2).norm() / mt.lengthscale); },
            [&](const Linear& lin) {
                return (lin.offset + z.dot(z2)) / (lin.offset + static_cast<double>(z.size()));
            },
            [&](const FiniteRank& fr) {
                double s = 0.0;
                for (std::size_t m = 0; m < fr.eigenvalues.size(); ++m)
                    s += fr.eigenvalues[m] * (feature(m, z) * feature(m, z2));
                return s;
            }},
        variant_);
}

double eval(const KernelSpec& k, const Point& z, const Point& z2) { return k(z, z2); }

Eigen::MatrixXd gram(const KernelSpec& k, const PointList& pts) {
    if (pts.empty()) throw InputError("gram: empty point list");
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i, i) = k(pts[i], pts[i]);
        for (Eigen::Index j = 0; j < i; ++j) g(i, j) = g(j, i) = k(pts[i], pts[j]);
    }
    return g;
}

Eigen::MatrixXd cross_gram(const KernelSpec& k, const PointList& a, const PointList& b) {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k(a[i], b[j]);
    return g;
}

double theoretical_info_gain_bound(const EigendecayProfile& profile, double J, double lambda) {
    if (!(J >= 2.0)) throw InputError("information-gain bound needs J >= 2");
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    const double log_j = std::log(J);
    return std::visit(overloaded{[&](const PolynomialDecay& p) {
                                     return std::pow(J, 1.0 / p.beta_p) *
                                            std::pow(log_j, 1.0 - 1.0 / p.beta_p);
                                 },
                                 [&](const ExponentialDecay& e) {
                                     return std::pow(log_j, 1.0 + 1.0 / e.beta_e);
                                 }},
                      profile);
}

EigendecayProfile eigendecay_of(const KernelSpec& k, std::size_t d) {
    if (d == 0) throw InputError("dimension must be positive");
    const double dd = static_cast<double>(d);
    return std::visit(
        overloaded{
            [&](const SquaredExponential&) -> EigendecayProfile {
                return ExponentialDecay{1.0, 1.0, 1.0 / dd};
            },
            [&](const Matern& mt) -> EigendecayProfile {
                return PolynomialDecay{1.0, 1.0 + 2.0 * mt.nu / dd};
            },
            [&](const Linear&) -> EigendecayProfile {
                throw InputError("linear kernel has no eigendecay profile; use a finite-rank kernel");
            },
            [&](const FiniteRank& fr) -> EigendecayProfile {
                const auto& s = fr.eigenvalues;
                double beta = 2.0;
                if (s.size() >= 2) {
                    // least-squares slope of log sigma_m against log m
                    double mx = 0, my = 0;
                    const double n = static_cast<double>(s.size());
                    for (std::size_t m = 0; m < s.size(); ++m) {
                        mx += std::log(static_cast<double>(m + 1));
                        my += std::log(s[m]);
                    }
                    mx /= n;
                    my /= n;
                    double sxy = 0, sxx = 0;
                    for (std::size_t m = 0; m < s.size(); ++m) {
                        const double x = std::log(static_cast<double>(m + 1)) - mx;
                        sxy += x * (std::log(s[m]) - my);
                        sxx += x * x;
                    }
                    const double slope = -sxy / sxx;
                    if (slope > 1.0) beta = slope;
                }
                double c = 0.0;
                for (std::size_t m = 0; m < s.size(); ++m)
                    c = std::max(c, s[m] * std::pow(static_cast<double>(m + 1), beta));
                return PolynomialDecay{c, beta};
            }},
        k.variant());
}

}  // namespace kqlearn
