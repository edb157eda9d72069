#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "roughfem/fem1d.hpp"
#include "roughfem/stats.hpp"

namespace roughfem {

/// Two-level quantities on the coarse mesh of level `coarse_level`.
struct EstimatorReport {
    int coarse_level = 0;
    std::vector<double> signed_terms;  ///< int_K a (u_f - u_c)'(l_f - l_c)' per coarse element
    std::vector<double> abs_terms;     ///< |signed_terms|
    double F_tilde = 0.0;              ///< sum of signed_terms
    double F_abs = 0.0;                ///< sum of abs_terms
};

/// Exact integral of a (u_f - u_c)'(l_f - l_c)' on the fine coefficient grid. The
/// usual two-level estimator takes u_f = u_{h/2}; with u_f = u_ref the same routine
/// gives the dual-weighted form of the Galerkin error.
EstimatorReport two_level(const Coefficient& a_fine, const FemSolution& u_c, const FemSolution& u_f,
                          const FemSolution& l_c, const FemSolution& l_f);

struct SingleMeshReport {
    int coarse_level = 0;
    std::vector<double> terms;    ///< (h^3/16) a* D2u D2l per coarse element
    std::vector<double> a_star;   ///< harmonic mean of the two half-cell coefficients
    double signed_sum = 0.0;
    double E_est = 0.0;           ///< sum of |terms|
};

/// Single-mesh form from the h/2 solutions: on each coarse element with halves
/// (-, +), D2w = (w'_+ - w'_-) / (h/2) and a* = 2 / (1/a_- + 1/a_+).
SingleMeshReport single_mesh_estimator(const Coefficient& a_half, const FemSolution& u_half,
                                       const FemSolution& l_half);

/// (g, u_ref - u_h), with u_h interpolated onto the reference mesh.
double reference_galerkin_error(const FemSolution& u_ref, const FemSolution& u_h, const Observable& g);

struct RatioStats {
    SampleStats stats;                ///< of C = |E| / E_est over retained samples
    std::size_t excluded = 0;         ///< samples with E_est <= 0
    std::vector<double> ratios;       ///< retained C values in input order
    std::vector<double> bin_edges;    ///< bins + 1 edges on [0, max C]
    std::vector<double> density;      ///< normalised so that sum density * width = 1
};

RatioStats ratio_statistics(const std::vector<double>& errors, const std::vector<double>& estimates, int bins = 30);

/// F(2h) / F(h); empty when the denominator vanishes.
std::optional<double> level_ratio(double F_2h, double F_h);

}  // namespace roughfem
