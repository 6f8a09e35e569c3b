#include "kvar/empirical_measure.hpp"

#include <utility>

#include "kvar/error.hpp"

namespace kvar {

EmpiricalMeasure::EmpiricalMeasure(std::size_t size, std::size_t dim)
    : size_(size), dim_(dim), coords_(size * dim, 0.0) {
    if (size == 0 || dim == 0) {
        throw ShapeError("empirical measure needs at least one point and one dimension");
    }
}

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> coords)
    : size_(dim == 0 ? 0 : coords.size() / dim), dim_(dim), coords_(std::move(coords)) {
    if (dim == 0 || coords_.empty() || coords_.size() % dim != 0) {
        throw ShapeError("coordinate count is not a positive multiple of the dimension");
    }
}

EmpiricalMeasure EmpiricalMeasure::translated(std::span<const double> offset) const {
    if (offset.size() != dim_) {
        throw ShapeError("offset dimension does not match the measure");
    }
    EmpiricalMeasure out = *this;
    for (std::size_t i = 0; i < size_; ++i) {
        auto p = out.point(i);
        for (std::size_t c = 0; c < dim_; ++c) {
            p[c] += offset[c];
        }
    }
    return out;
}

EmpiricalMeasure EmpiricalMeasure::scaled(double factor) const {
    EmpiricalMeasure out = *this;
    for (double& x : out.coords_) {
        x *= factor;
    }
    return out;
}

}  // namespace kvar
