#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kqlearn/kernels.hpp"
#include "kqlearn/krr.hpp"

namespace kqlearn {

/// Finite stand-in for the state-action domain.  When the grid comes from an
/// embedded MDP, state_action[i] names the (state, action) of points[i].
struct CandidateGrid {
    PointList points;
    std::vector<std::pair<std::size_t, std::size_t>> state_action;

    std::size_t size() const { return points.size(); }
    void validate() const;
};

/// Greedy selection order and the posterior variance each pick had when it
/// was selected (Sigma^2_{U_{j-1}}(z_j)).
struct GreedyTrace {
    std::vector<std::size_t> selected;
    std::vector<double> sigma2_at_selection;
};

/// Greedy trace plus by-products the learner reuses: the Cholesky factor of
/// K_U + lambda^2 I (rows in selection order) and the grid-by-design
/// cross-kernel matrix.
struct GreedyDesign {
    GreedyTrace trace;
    Eigen::MatrixXd factor;
    Eigen::MatrixXd grid_cross;  // grid.size() x J, entry (g, j) = K(grid[g], grid[selected[j]])
};

/// Scores within this distance of the step maximum count as ties; the lowest
/// grid index wins.
inline constexpr double kGreedyTieTolerance = 1e-12;

/// Repeated argmax of the posterior variance over the grid.  Repeats are
/// allowed, so J may exceed grid.size().
GreedyTrace build_max_uncertainty_set(const KernelSpec& k, const CandidateGrid& grid, std::size_t J,
                                      double lambda);

GreedyDesign build_max_uncertainty_design(const KernelSpec& k, const CandidateGrid& grid, std::size_t J,
                                          double lambda);

PointList selected_points(const GreedyTrace& trace, const CandidateGrid& grid);

/// 1/2 log det(I + K_U / lambda^2); zero for an empty set.
double info_gain(const KernelSpec& k, const PointList& pts, double lambda);

/// Running information gain after each of the J rows of a design factor.
std::vector<double> info_gain_prefix(const Eigen::MatrixXd& factor, double lambda);

struct UncertaintySumReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Compares sum_j Sigma^2_{U_{j-1}}(z_j) with (2 / log(1 + 1/lambda^2)) times
/// the information gain of the selected set.
UncertaintySumReport verify_uncertainty_sum(const GreedyTrace& trace, const KernelSpec& k,
                                            const CandidateGrid& grid, double lambda);

}  // namespace kqlearn
