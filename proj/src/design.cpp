#include "kqlearn/design.hpp"

#include <cmath>
#include <string>

#include "kqlearn/errors.hpp"

namespace kqlearn {

void CandidateGrid::validate() const {
    if (points.empty()) throw InputError("candidate grid is empty");
    const auto d = points.front().size();
    for (const auto& p : points) {
        if (p.size() != d || d == 0) throw InputError("candidate grid points must share a nonzero dimension");
        if (!p.allFinite()) throw InputError("candidate grid contains non-finite coordinates");
    }
    if (!state_action.empty() && state_action.size() != points.size())
        throw InputError("candidate grid index map has the wrong length");
}

GreedyDesign build_max_uncertainty_design(const KernelSpec& k, const CandidateGrid& grid, std::size_t J,
                                          double lambda) {
    grid.validate();
    if (J == 0) throw InputError("design size J must be positive");
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");

    const auto G = static_cast<Eigen::Index>(grid.size());
    const auto n = static_cast<Eigen::Index>(J);
    const double lambda2 = lambda * lambda;

    GreedyDesign out;
    out.trace.selected.reserve(J);
    out.trace.sigma2_at_selection.reserve(J);
    out.factor = Eigen::MatrixXd::Zero(n, n);
    out.grid_cross.resize(G, n);

    // chol(g, j): j-th column of L^{-1} k_U(z_g); sigma2(g) = K(z_g, z_g) - ||chol(g, :)||^2
    Eigen::MatrixXd chol(G, n);
    Eigen::VectorXd sigma2(G);
    for (Eigen::Index g = 0; g < G; ++g) sigma2[g] = k(grid.points[g], grid.points[g]);

    for (Eigen::Index j = 0; j < n; ++j) {
        const double top = sigma2.maxCoeff();
        Eigen::Index pick = 0;
        while (sigma2[pick] < top - kGreedyTieTolerance) ++pick;

        const double s2 = sigma2[pick];
        if (s2 < -kVarianceClampTol)
            throw NumericError("posterior variance " + std::to_string(s2) + " is negative beyond tolerance");
        out.trace.selected.push_back(static_cast<std::size_t>(pick));
        out.trace.sigma2_at_selection.push_back(std::max(s2, 0.0));

        const double pivot2 = s2 + lambda2;
        if (!(pivot2 > 0.0)) throw NumericError("non-positive pivot while growing the design");
        const double pivot = std::sqrt(pivot2);
        const Eigen::VectorXd row = chol.row(pick).head(j).transpose();
        out.factor.row(j).head(j) = row.transpose();
        out.factor(j, j) = pivot;

        const Point& x = grid.points[pick];
        Eigen::VectorXd kcol(G);
        for (Eigen::Index g = 0; g < G; ++g) kcol[g] = k(grid.points[g], x);
        out.grid_cross.col(j) = kcol;
        if (j > 0) kcol.noalias() -= chol.leftCols(j) * row;
        chol.col(j) = kcol / pivot;
        sigma2.array() -= chol.col(j).array().square();
    }
    return out;
}

GreedyTrace build_max_uncertainty_set(const KernelSpec& k, const CandidateGrid& grid, std::size_t J,
                                      double lambda) {
    return build_max_uncertainty_design(k, grid, J, lambda).trace;
}

PointList selected_points(const GreedyTrace& trace, const CandidateGrid& grid) {
    PointList pts;
    pts.reserve(trace.selected.size());
    for (auto i : trace.selected) {
        if (i >= grid.size()) throw InputError("trace index outside the candidate grid");
        pts.push_back(grid.points[i]);
    }
    return pts;
}

double info_gain(const KernelSpec& k, const PointList& pts, double lambda) {
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (pts.empty()) return 0.0;
    const RegressionModel model(k, DesignSet{pts, lambda});
    return 0.5 * model.log_det() - static_cast<double>(pts.size()) * std::log(lambda);
}

std::vector<double> info_gain_prefix(const Eigen::MatrixXd& factor, double lambda) {
    std::vector<double> out(static_cast<std::size_t>(factor.rows()));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < factor.rows(); ++j) {
        acc += std::log(factor(j, j) / lambda);
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

UncertaintySumReport verify_uncertainty_sum(const GreedyTrace& trace, const KernelSpec& k,
                                            const CandidateGrid& grid, double lambda) {
    if (trace.selected.size() != trace.sigma2_at_selection.size())
        throw InputError("trace selection and variance lists differ in length");
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    UncertaintySumReport r;
    for (double s : trace.sigma2_at_selection) r.lhs += s;
    const double gain = info_gain(k, selected_points(trace, grid), lambda);
    r.rhs = 2.0 / std::log1p(1.0 / (lambda * lambda)) * gain;
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

}  // namespace kqlearn
