#include "kvar/transport.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "kvar/error.hpp"

namespace kvar {

namespace {

constexpr double kLarge = std::numeric_limits<double>::max();

// Dense Jonker-Volgenant solver. Rows are assigned to columns; `v` holds the
// column duals. Column reduction with reduction transfer builds the initial
// partial assignment, then each free row gets a shortest augmenting path.
// The augmenting row reduction phase of the 1987 paper is left out: on
// squared-Euclidean costs between random clouds it has many near ties and
// spent several times longer than the augmentation it was meant to shorten.
class JonkerVolgenant {
public:
    JonkerVolgenant(std::span<const double> cost, int n)
        : cost_(cost), n_(n), x_(n, -1), y_(n, -1), v_(n, 0.0), free_(n, 0),
          pred_(n, 0), cols_(n, 0), dist_(n, 0.0) {}

    std::vector<std::size_t> solve() {
        const int n_free = column_reduction();
        for (int f = 0; f < n_free; ++f) {
            augment(free_[f]);
        }
        return {x_.begin(), x_.end()};
    }

private:
    double c(int i, int j) const noexcept { return cost_[static_cast<std::size_t>(i) * n_ + j]; }

    int column_reduction() {
        std::fill(v_.begin(), v_.end(), kLarge);
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                const double cij = c(i, j);
                if (cij < v_[j]) {
                    v_[j] = cij;
                    y_[j] = i;
                }
            }
        }
        std::vector<char> unique(n_, 1);
        for (int j = n_ - 1; j >= 0; --j) {
            const int i = y_[j];
            if (x_[i] < 0) {
                x_[i] = j;
            } else {
                unique[i] = 0;
                y_[j] = -1;
            }
        }
        int n_free = 0;
        for (int i = 0; i < n_; ++i) {
            if (x_[i] < 0) {
                free_[n_free++] = i;
            } else if (unique[i] != 0) {
                const int j = x_[i];
                double min = kLarge;
                for (int j2 = 0; j2 < n_; ++j2) {
                    if (j2 != j) {
                        min = std::min(min, c(i, j2) - v_[j2]);
                    }
                }
                v_[j] -= min;
            }
        }
        return n_free;
    }

    // Moves every TODO column at the minimum distance to the SCAN window
    // [lo, hi) and returns the new hi.
    int find_minimum(int lo) {
        int hi = lo + 1;
        int j = cols_[lo];
        double mind = dist_[j];
        for (int k = hi; k < n_; ++k) {
            j = cols_[k];
            if (dist_[j] <= mind) {
                if (dist_[j] < mind) {
                    hi = lo;
                    mind = dist_[j];
                }
                cols_[k] = cols_[hi];
                cols_[hi++] = j;
            }
        }
        return hi;
    }

    // Relaxes TODO columns through the rows assigned to SCAN columns. Returns
    // an unassigned column reached at the minimum distance, or -1. The window
    // bounds are written back only when no such column was found, so that
    // cols_[lo] still holds a column at the minimum distance afterwards.
    int scan(int& lo_ref, int& hi_ref) {
        int lo = lo_ref;
        int hi = hi_ref;
        while (lo != hi) {
            int j = cols_[lo++];
            const int i = y_[j];
            const double mind = dist_[j];
            const double h = c(i, j) - v_[j] - mind;
            for (int k = hi; k < n_; ++k) {
                j = cols_[k];
                const double reduced = c(i, j) - v_[j] - h;
                if (reduced < dist_[j]) {
                    dist_[j] = reduced;
                    pred_[j] = i;
                    if (reduced == mind) {
                        if (y_[j] < 0) {
                            return j;
                        }
                        cols_[k] = cols_[hi];
                        cols_[hi++] = j;
                    }
                }
            }
        }
        lo_ref = lo;
        hi_ref = hi;
        return -1;
    }

    int find_path(int start_i) {
        int lo = 0;
        int hi = 0;
        int ready = 0;
        int final_j = -1;
        for (int j = 0; j < n_; ++j) {
            cols_[j] = j;
            pred_[j] = start_i;
            dist_[j] = c(start_i, j) - v_[j];
        }
        while (final_j == -1) {
            if (lo == hi) {
                ready = lo;
                hi = find_minimum(lo);
                for (int k = lo; k < hi; ++k) {
                    const int j = cols_[k];
                    if (y_[j] < 0) {
                        final_j = j;
                    }
                }
            }
            if (final_j == -1) {
                final_j = scan(lo, hi);
            }
        }
        const double mind = dist_[cols_[lo]];
        for (int k = 0; k < ready; ++k) {
            const int j = cols_[k];
            v_[j] += dist_[j] - mind;
        }
        return final_j;
    }

    void augment(int free_row) {
        int j = find_path(free_row);
        int i = -1;
        while (i != free_row) {
            i = pred_[j];
            y_[j] = i;
            std::swap(j, x_[i]);
        }
    }

    std::span<const double> cost_;
    int n_;
    std::vector<int> x_;
    std::vector<int> y_;
    std::vector<double> v_;
    std::vector<int> free_;
    std::vector<int> pred_;
    std::vector<int> cols_;
    std::vector<double> dist_;
};

// Coordinates that are non-zero in at least one point of either cloud.
std::vector<std::size_t> active_coordinates(const EmpiricalMeasure& xs, const EmpiricalMeasure& ys) {
    const std::size_t d = xs.dim();
    std::vector<char> active(d, 0);
    for (const EmpiricalMeasure* m : {&xs, &ys}) {
        for (std::size_t i = 0; i < m->size(); ++i) {
            const auto p = m->point(i);
            for (std::size_t c = 0; c < d; ++c) {
                active[c] |= static_cast<char>(p[c] != 0.0);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < d; ++c) {
        if (active[c] != 0) {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<std::size_t> sorted_order(const EmpiricalMeasure& m, std::size_t coord) {
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return m.point(a)[coord] < m.point(b)[coord];
    });
    return order;
}

AssignmentResult w2sq_sorted(const EmpiricalMeasure& xs, const EmpiricalMeasure& ys, std::size_t coord) {
    const std::size_t k = xs.size();
    const auto ox = sorted_order(xs, coord);
    const auto oy = sorted_order(ys, coord);
    std::vector<double> sx(k);
    std::vector<double> sy(k);
    AssignmentResult result;
    result.permutation.resize(k);
    for (std::size_t r = 0; r < k; ++r) {
        sx[r] = xs.point(ox[r])[coord];
        sy[r] = ys.point(oy[r])[coord];
        result.permutation[ox[r]] = oy[r];
    }
    result.cost = w2sq_1d(sx, sy);
    return result;
}

}  // namespace

std::vector<std::size_t> solve_linear_assignment(std::span<const double> cost, std::size_t n) {
    if (cost.size() != n * n) {
        throw ShapeError(fmt::format("cost matrix has {} entries, expected {}x{}", cost.size(), n, n));
    }
    if (n == 0) {
        return {};
    }
    if (n == 1) {
        return {0};
    }
    return JonkerVolgenant(cost, static_cast<int>(n)).solve();
}

AssignmentResult w2sq(const EmpiricalMeasure& xs, const EmpiricalMeasure& ys) {
    if (xs.size() != ys.size() || xs.dim() != ys.dim()) {
        throw ShapeError(fmt::format("cannot match {}x{} cloud with {}x{} cloud", xs.size(), xs.dim(),
                                     ys.size(), ys.dim()));
    }
    const std::size_t k = xs.size();
    const auto active = active_coordinates(xs, ys);
    if (active.size() <= 1) {
        return w2sq_sorted(xs, ys, active.empty() ? 0 : active.front());
    }

    // Compact copies of the active coordinates keep the O(k^2 d) cost loop
    // contiguous.
    const std::size_t da = active.size();
    std::vector<double> cx(k * da);
    std::vector<double> cy(k * da);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t a = 0; a < da; ++a) {
            cx[i * da + a] = xs.point(i)[active[a]];
            cy[i * da + a] = ys.point(i)[active[a]];
        }
    }
    std::vector<double> cost(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        const double* xi = cx.data() + i * da;
        double* row = cost.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) {
            const double* yj = cy.data() + j * da;
            double s = 0.0;
            for (std::size_t a = 0; a < da; ++a) {
                const double diff = xi[a] - yj[a];
                s += diff * diff;
            }
            row[j] = s;
        }
    }

    AssignmentResult result;
    result.permutation = solve_linear_assignment(cost, k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        total += cost[i * k + result.permutation[i]];
    }
    result.cost = total / static_cast<double>(k);
    return result;
}

double w2sq_1d(std::span<const double> xs_sorted, std::span<const double> ys_sorted) {
    if (xs_sorted.size() != ys_sorted.size()) {
        throw ShapeError(fmt::format("length mismatch: {} vs {}", xs_sorted.size(), ys_sorted.size()));
    }
    if (xs_sorted.empty()) {
        throw ShapeError("empty input");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < xs_sorted.size(); ++i) {
        const double diff = xs_sorted[i] - ys_sorted[i];
        total += diff * diff;
    }
    return total / static_cast<double>(xs_sorted.size());
}

}  // namespace kvar
