#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "roughfem/fem1d.hpp"
#include "roughfem/grid.hpp"

namespace roughfem {

/// Discrete Fourier coefficients of N = 2^fine_level cell values on [0,1]:
/// c_n = (1/N) sum_j f_j exp(-2 pi i n j / N), n in [-N/2, N/2). With this
/// normalisation sum_n c_n conj(d_n) = int f d for piecewise-constant f, d.
struct FourierSeries {
    int fine_level = 0;
    std::vector<std::complex<double>> coeffs;  ///< FFT order: slot k holds mode k or k - N

    long size() const { return static_cast<long>(coeffs.size()); }
    long n_max() const { return size() / 2; }
    std::complex<double> at(long n) const;
};

FourierSeries fourier_coefficients(const std::vector<double>& cell_values);

/// R = a' u_h' per fine cell, with a piecewise linear through its nodal values.
std::vector<double> residual_cells(const NodalCoefficient& a, const FemSolution& u_h);
FourierSeries residual_fourier(const NodalCoefficient& a, const FemSolution& u_h);

/// Cell means of lambda_ref - pi_h lambda_ref on the reference mesh, where pi_h is
/// nodal interpolation onto the mesh of `h_level`.
std::vector<double> dual_error_cells(const FemSolution& lambda_ref, int h_level);
FourierSeries dual_fourier(const FemSolution& lambda_ref, int h_level);

struct ErrorSplit {
    double E_L = 0.0;      ///< modes with |n| < n_star
    double E_total = 0.0;  ///< all modes
};

/// Real part of sum r_n conj(l_n), in total and restricted to |n| < n_star.
ErrorSplit split_error(const FourierSeries& r, const FourierSeries& l, double n_star);

/// Physical-space pairing sum_j k R_j e_j on the common fine grid.
double physical_pairing(const std::vector<double>& R, const std::vector<double>& e);

/// out[n] = |r_n l_n| + |r_-n l_-n| for n = 0..N/2-1 (out[0] counts mode 0 once).
std::vector<double> folded_products(const FourierSeries& r, const FourierSeries& l);

struct DecayFit {
    double exponent = 0.0;  ///< minus the log-log slope
    long n_lo = 0;
    long n_hi = 0;
    double residual = 0.0;
};

/// Least-squares fit of log folded[n] against log n for n in [n_lo, n_hi].
DecayFit fit_decay_rate(const std::vector<double>& folded, long n_lo, long n_hi);

/// [max(8, 1/h), N_max/4]: modes resolved by the h-mesh are excluded because the
/// product spectrum is flat there, and the top of the spectrum is aliased.
std::pair<long, long> default_fit_range(int h_level, int fine_level);

struct FrequencyBound {
    double bound = 0.0;            ///< 2 (C0 C^{3-2a}/(3-2a) + C^{1-2a}/(2a-1)) h^{2a-1}
    double low_total_ratio = 0.0;  ///< 1 / (1 + 1/(C0 C^2))
};

FrequencyBound bound_from_alpha(double alpha, double C, double C0, double h);

}  // namespace roughfem
