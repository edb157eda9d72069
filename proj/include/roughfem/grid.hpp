#pragma once

#include <cstddef>
#include <vector>

namespace roughfem {

/// Points x_j = j 2^-level, j = 0..2^level, on [0,1].
struct DyadicGrid {
    int level = 1;

    std::size_t cells() const { return std::size_t{1} << level; }
    std::size_t points() const { return cells() + 1; }
    double spacing() const { return 1.0 / static_cast<double>(cells()); }
    double x(std::size_t j) const { return static_cast<double>(j) * spacing(); }
};

/// Piecewise-constant positive coefficient, one value per cell of a dyadic grid.
struct Coefficient {
    int level = 0;
    std::vector<double> values;

    std::size_t cells() const { return values.size(); }
    double spacing() const { return 1.0 / static_cast<double>(values.size()); }
};

/// Point values of a coefficient at the nodes of a dyadic grid.
struct NodalCoefficient {
    int level = 0;
    std::vector<double> values;
};

}  // namespace roughfem
