#pragma once

#include <cstdint>
#include <vector>

#include "roughfem/fem1d.hpp"
#include "roughfem/grid.hpp"
#include "roughfem/stats.hpp"

namespace roughfem {

struct QuadratureEstimate {
    int h_level = 0;
    std::vector<double> terms;  ///< per h-element
    double Q = 0.0;
};

/// Q = sum_K h (a_{h,k} - a_{h,k/2}) u_{h,k}' mu', where mu is the solution of the
/// dual problem with load g. `l` is the explicit dual (l' = G_h/a, load -g), so
/// mu' = -l' and each term carries the sign flip. With `absolute` the per-element
/// terms are replaced by their magnitudes.
QuadratureEstimate pathwise_quadrature_estimator(const Coefficient& a_hk, const Coefficient& a_hk2,
                                                 const FemSolution& u_hk, const FemSolution& l,
                                                 bool absolute = false);

/// (g, u_ref - u_hk) for two solutions on the same h-mesh.
double reference_quadrature_error(const FemSolution& u_ref, const FemSolution& u_hk, const Observable& g);

struct QuadratureConfig {
    int h_level = 5;
    int k_level = 5;    ///< k = 2^-k_level <= h
    QuadRule rule = QuadRule::trapezoid;
    int ref_level = 18; ///< near-exact quadrature level for the baseline
};

struct QuadratureSample {
    double Q = 0.0;       ///< estimator with the dual on k/2
    double Q_star = 0.0;  ///< estimator with the dual on the reference level
    double Qcal = 0.0;    ///< (g, u_{h,ref} - u_{h,k})
    double Q_abs = 0.0;   ///< Q with absolute per-element terms
};

/// Nodal level a path must be sampled on to evaluate `rule` down to `ref_level`.
int sample_level_for(const QuadratureConfig& cfg);

QuadratureSample quadrature_sample(const NodalCoefficient& a, const QuadratureConfig& cfg, const Observable& g);

struct McQuadrature {
    SampleStats Q;
    SampleStats Q_star;
    SampleStats Qcal;
    std::vector<QuadratureSample> samples;
};

/// M bridge paths from substreams (seed, 0..M-1), reduced in index order.
McQuadrature mc_quadrature(const QuadratureConfig& cfg, const Observable& g, std::size_t M, std::uint64_t seed,
                           int threads = 1);

struct GammaFit {
    double gamma = 0.0;            ///< log-log slope of |Q| against k
    bool sign_consistent = false;  ///< false when Q changes sign across levels
};

GammaFit fit_gamma(const std::vector<double>& k, const std::vector<double>& Q);

/// int_0^h (1/a - 1/a_h) for a piecewise-constant coefficient on [0, h]; the cell
/// values are those of the fine cells inside the single h-element.
double reciprocal_average_gap(const std::vector<double>& a_cells, double h);

/// Monte Carlo mean of int_0^h (1/a - 1/a_h) for a = exp(W), W a Wiener process
/// sampled on cells of width 2^-fine_level with left-endpoint values.
SampleStats wiener_average_identity(int h_level, int fine_level, std::size_t M, std::uint64_t seed,
                                    int threads = 1);

}  // namespace roughfem
