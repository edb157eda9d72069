#pragma once

#include <string>
#include <vector>

#include "roughfem/estimators1d.hpp"
#include "roughfem/fem1d.hpp"
#include "roughfem/fem2d.hpp"
#include "roughfem/frequency.hpp"
#include "roughfem/mcharness.hpp"
#include "roughfem/quadrature.hpp"

namespace roughfem {

/// "one", "minus_one", "cos", "dirac" (at 1/2).
Observable parse_observable(const std::string& name);

/// Two-level estimators and reference Galerkin errors on bridge paths.
struct Galerkin1dParams {
    int h_min = 5;
    int h_max = 10;
    int ref_level = 14;
    std::string observable = "one";
    int bins = 30;
    /// Warn when mean |F~| / mean F drops below this (estimator cancellation).
    double cancellation_threshold = 0.5;
    /// C in the predicted error C * E_est written to rates.csv.
    double predicted_C = 2.0;
};

struct Galerkin1dResult {
    RunRecord record;
    std::vector<RatioStats> ratios;  ///< one per h level, h_min first
    LineFit error_rate;              ///< log mean |E| against log h
    LineFit estimator_rate;          ///< log mean E_est against log h
    std::vector<std::string> warnings;
};

/// Columns: log2h, E_h, F_tilde, F_abs, E_est, signed_sum, C, level_ratio.
Galerkin1dResult run_galerkin_1d(ExperimentConfig config, const Galerkin1dParams& p);

/// Fourier content of the residual and of the dual interpolation error.
struct FrequencyParams {
    int h_level = 10;
    int fine_level = 16;
    std::string observable = "one";
    std::string coefficient = "bridge";  ///< "bridge" or "smooth" (a = 1 + x)
    double n_star_factor = 1.0;          ///< n* = factor / h
    long fit_lo = 0;                     ///< 0 selects default_fit_range
    long fit_hi = 0;
};

struct FrequencyResult {
    RunRecord record;
    std::vector<double> abs_r;  ///< first sample, modes 0..N/2-1
    std::vector<double> abs_l;
    std::vector<double> folded;
    DecayFit fit;  ///< first sample
};

/// Columns: exponent, E_L, E_total, E_direct, deficit.
FrequencyResult run_frequency(ExperimentConfig config, const FrequencyParams& p);

/// Quadrature error estimator against the near-exact baseline.
struct Quadrature1dParams {
    QuadRule rule = QuadRule::trapezoid;
    int h_min = 5;
    int h_max = 9;
    int h_step = 2;
    std::vector<int> k_offsets{0};  ///< k = h 2^-offset
    int ref_level = 18;
    std::string observable = "one";
};

struct QuadratureTableRow {
    int log2h = 0;
    int log2k = 0;
    SampleStats Q, Q_star, Qcal;
};

struct Quadrature1dResult {
    RunRecord record;
    std::vector<QuadratureTableRow> table;
    std::vector<std::pair<int, GammaFit>> gamma;  ///< per h when several k are swept
};

/// Columns: log2h, log2k, Q, Q_star, Qcal, Q_abs.
Quadrature1dResult run_quadrature_1d(ExperimentConfig config, const Quadrature1dParams& p);

/// 2D estimators on circulant-embedded lognormal fields.
struct Galerkin2dParams {
    int field_level = 9;
    double sigma2 = 1.0;
    double ell = 0.2;
    int ref_level = 7;
    int h_min = 3;
    int h_max = 5;
    std::string coefficient = "lognormal";  ///< "lognormal", "smooth" or "constant"
    ChildRule child_rule = ChildRule::per_child;
};

struct Galerkin2dResult {
    RunRecord record;
    int padding = 0;
};

/// Columns: log2h, E_h, E_est, E_reg, ratio (E_h / E_est).
Galerkin2dResult run_galerkin_2d(ExperimentConfig config, const Galerkin2dParams& p);

/// Scaled Galerkin error h^-1 int a (u - u_h)'(l - l_h)' for a = exp(W), G = 1 - x.
struct ExpectedRateParams {
    int h_min = 5;
    int h_max = 9;
    int fine_level = 14;
};

struct ExpectedRateResult {
    RunRecord record;
    double limit = 0.0;  ///< int_0^1 exp(x/2)(1-x)/6 dx by composite Simpson
};

/// Columns: log2h, E, E_scaled, E_g, path_slope (last row of each sample only).
ExpectedRateResult run_expected_rate(ExperimentConfig config, const ExpectedRateParams& p);

/// Limit of E[h^-1 int a (u-u_h)'(l-l_h)'] for a = exp(W) and weight G >= 0, by
/// composite Simpson on `intervals` subintervals of int_0^1 exp(x/2) G(x) / 6.
double expected_galerkin_limit(const Observable& g, int intervals = 1 << 12);

/// Field dumps for plotting.
void write_field_csv(const Field2D& field, const std::filesystem::path& path);
void write_path_csv(const SamplePath& path, const std::filesystem::path& file);

}  // namespace roughfem
