#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "roughfem/grid.hpp"
#include "roughfem/rng.hpp"

namespace roughfem {

enum class PathKind { bridge, wiener };

struct SamplePath {
    DyadicGrid grid;
    PathKind kind = PathKind::bridge;
    std::vector<double> values;  ///< one per grid point
};

/// Standard Brownian bridge on [0,1] by Levy midpoint bisection: the midpoint of
/// [s,t] is drawn from Normal((B(s)+B(t))/2, (t-s)/4). Endpoints are exactly zero.
SamplePath sample_brownian_bridge(int level, RngStream& rng);

/// Standard Wiener process, W(0) = 0, independent Normal(0, 2^-level) increments.
SamplePath sample_wiener(int level, RngStream& rng);

/// Adds one level by midpoint bisection, conditioned on the existing values.
SamplePath refine_path(const SamplePath& path, RngStream& rng);

/// Keeps every other point until the requested coarser level is reached.
SamplePath restrict_path(const SamplePath& path, int level);

enum class CellPoint { left, midpoint };

/// exp(path) as a piecewise-constant coefficient. `left` evaluates each cell of the
/// path grid at its left endpoint. `midpoint` returns a coefficient on the grid one
/// level coarser, evaluated at the path point in the middle of each cell.
Coefficient lognormal_of(const SamplePath& path, CellPoint point = CellPoint::left);

/// exp(path) at the grid points.
NodalCoefficient lognormal_nodes(const SamplePath& path);

/// Gaussian log-field on the cells of an n x n grid of the unit square. Cell (i, j)
/// is centred at ((i+1/2)/n, (j+1/2)/n) and stored at log_values[i*n + j].
struct Field2D {
    int n = 0;
    double sigma2 = 1.0;
    double ell = 1.0;
    std::vector<double> log_values;

    double at(int i, int j) const { return log_values[static_cast<std::size_t>(i) * n + j]; }
};

/// Circulant embedding of sigma2 * exp(-|x-y|/ell) on an m x m torus, m = padding * n.
///
/// The padding starts at 2 and doubles up to 8 until the smallest eigenvalue of the
/// periodised covariance is at least -1e-6 times the largest. Remaining slightly
/// negative eigenvalues are set to zero; larger violations throw.
class CirculantEmbedding {
public:
    static constexpr int max_padding = 8;
    static constexpr double negativity_tolerance = 1e-6;

    CirculantEmbedding(int n, double sigma2, double ell);

    int n() const { return n_; }
    int padding() const { return padding_; }
    /// Smallest eigenvalue over largest, before clipping.
    double min_eigen_ratio() const { return min_ratio_; }

    /// Two independent fields from the real and imaginary parts of one transform.
    std::pair<Field2D, Field2D> sample_pair(RngStream& rng) const;
    Field2D sample(RngStream& rng) const;

private:
    int n_;
    double sigma2_;
    double ell_;
    int padding_ = 2;
    double min_ratio_ = 0.0;
    std::vector<double> scale_;  ///< sqrt(eigenvalue / m^2), row-major m x m
};

Field2D sample_field_2d_circulant(int n, double sigma2, double ell, RngStream& rng);

struct CovarianceEstimate {
    double covariance = 0.0;
    double standard_error = 0.0;
};

/// Unbiased sample covariance of coordinates (p, q) for each pair, with the standard
/// error of the estimate taken from the spread of the centred products.
/// samples[s] is one realisation; requires at least two.
std::vector<CovarianceEstimate> empirical_covariance(
    const std::vector<std::vector<double>>& samples,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

}  // namespace roughfem
