#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kvar/empirical_measure.hpp"

namespace kvar {

/// Optimal matching between two equal-size empirical measures.
struct AssignmentResult {
    /// (1/k) * sum_i |x_i - y_perm[i]|^2, the squared 2-Wasserstein distance.
    double cost = 0.0;
    /// x_i is matched to y_perm[i].
    std::vector<std::size_t> permutation;
};

/// Exact minimum-cost perfect matching for a dense n x n row-major cost
/// matrix (Jonker-Volgenant shortest augmenting paths). Returns row -> column.
std::vector<std::size_t> solve_linear_assignment(std::span<const double> cost, std::size_t n);

/// Squared 2-Wasserstein distance between uniform empirical measures of the
/// same size and dimension. Throws ShapeError on mismatch.
///
/// When at most one coordinate is non-zero anywhere in the two clouds the
/// problem is one-dimensional and is solved by sorting.
AssignmentResult w2sq(const EmpiricalMeasure& xs, const EmpiricalMeasure& ys);

/// (1/k) * sum_i (x_i - y_i)^2 for two ascending lists of equal length.
double w2sq_1d(std::span<const double> xs_sorted, std::span<const double> ys_sorted);

}  // namespace kvar
