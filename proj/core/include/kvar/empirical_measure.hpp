#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kvar {

/// A cloud of k points in R^d carrying uniform weights 1/k.
///
/// Coordinates are stored row-major: point i occupies [i*d, (i+1)*d).
class EmpiricalMeasure {
public:
    /// k points at the origin.
    EmpiricalMeasure(std::size_t size, std::size_t dim);
    /// Takes ownership of row-major coordinates; coords.size() must be a
    /// positive multiple of dim.
    EmpiricalMeasure(std::size_t dim, std::vector<double> coords);

    std::size_t size() const noexcept { return size_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> point(std::size_t i) const noexcept {
        return {coords_.data() + i * dim_, dim_};
    }
    std::span<double> point(std::size_t i) noexcept { return {coords_.data() + i * dim_, dim_}; }

    std::span<const double> coords() const noexcept { return coords_; }
    std::span<double> coords() noexcept { return coords_; }

    /// Copy with `offset` added to every point.
    EmpiricalMeasure translated(std::span<const double> offset) const;
    /// Copy with every coordinate multiplied by `factor`.
    EmpiricalMeasure scaled(double factor) const;

    friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

private:
    std::size_t size_;
    std::size_t dim_;
    std::vector<double> coords_;
};

}  // namespace kvar
