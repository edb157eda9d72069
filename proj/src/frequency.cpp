#include "roughfem/frequency.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "fftw_lock.hpp"
#include "roughfem/stats.hpp"

namespace roughfem {

namespace {

int level_of(std::size_t n) {
    int l = 0;
    while ((std::size_t{1} << l) < n) ++l;
    if ((std::size_t{1} << l) != n) throw std::invalid_argument("fourier: length must be a power of two");
    return l;
}

}  // namespace

std::complex<double> FourierSeries::at(long n) const {
    const long N = size();
    if (n < -N / 2 || n >= N / 2) throw std::out_of_range("FourierSeries::at: mode out of range");
    return coeffs[static_cast<std::size_t>(n < 0 ? n + N : n)];
}

FourierSeries fourier_coefficients(const std::vector<double>& cell_values) {
    FourierSeries s;
    s.fine_level = level_of(cell_values.size());
    const int N = static_cast<int>(cell_values.size());
    s.coeffs.resize(cell_values.size());
    std::vector<std::complex<double>> in(cell_values.begin(), cell_values.end());
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(s.coeffs.data());
    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_1d(N, pin, pout, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (auto& c : s.coeffs) c /= static_cast<double>(N);
    return s;
}

std::vector<double> residual_cells(const NodalCoefficient& a, const FemSolution& u_h) {
    if (a.level <= u_h.level) throw std::invalid_argument("residual_fourier: fine grid must be finer than h");
    const std::size_t N = std::size_t{1} << a.level;
    const std::size_t r = N / u_h.deriv.size();
    const double k = 1.0 / static_cast<double>(N);
    std::vector<double> R(N);
    for (std::size_t j = 0; j < N; ++j) R[j] = (a.values[j + 1] - a.values[j]) / k * u_h.deriv[j / r];
    return R;
}

FourierSeries residual_fourier(const NodalCoefficient& a, const FemSolution& u_h) {
    return fourier_coefficients(residual_cells(a, u_h));
}

std::vector<double> dual_error_cells(const FemSolution& lambda_ref, int h_level) {
    if (h_level > lambda_ref.level) throw std::invalid_argument("dual_fourier: h finer than the reference mesh");
    FemSolution coarse;
    coarse.level = h_level;
    const std::size_t r = std::size_t{1} << (lambda_ref.level - h_level);
    for (std::size_t j = 0; j < lambda_ref.nodes.size(); j += r) coarse.nodes.push_back(lambda_ref.nodes[j]);
    coarse.deriv.resize(coarse.nodes.size() - 1);
    const auto interp = prolong_nodes(coarse, lambda_ref.level);
    std::vector<double> e(lambda_ref.deriv.size());
    for (std::size_t j = 0; j < e.size(); ++j)
        e[j] = 0.5 * ((lambda_ref.nodes[j] - interp[j]) + (lambda_ref.nodes[j + 1] - interp[j + 1]));
    return e;
}

FourierSeries dual_fourier(const FemSolution& lambda_ref, int h_level) {
    return fourier_coefficients(dual_error_cells(lambda_ref, h_level));
}

ErrorSplit split_error(const FourierSeries& r, const FourierSeries& l, double n_star) {
    if (r.size() != l.size()) throw std::invalid_argument("split_error: incompatible mode ranges");
    if (n_star < 0.0 || n_star > static_cast<double>(r.n_max() + 1))
        throw std::invalid_argument("split_error: n_star exceeds the available modes");
    NeumaierSum low, total;
    const long N = r.size();
    for (long k = 0; k < N; ++k) {
        const long n = k < N / 2 ? k : k - N;
        const double p = (r.coeffs[k] * std::conj(l.coeffs[k])).real();
        total.add(p);
        if (std::abs(static_cast<double>(n)) < n_star) low.add(p);
    }
    return {low.value(), total.value()};
}

double physical_pairing(const std::vector<double>& R, const std::vector<double>& e) {
    if (R.size() != e.size()) throw std::invalid_argument("physical_pairing: size mismatch");
    const double k = 1.0 / static_cast<double>(R.size());
    NeumaierSum acc;
    for (std::size_t j = 0; j < R.size(); ++j) acc.add(k * R[j] * e[j]);
    return acc.value();
}

std::vector<double> folded_products(const FourierSeries& r, const FourierSeries& l) {
    if (r.size() != l.size()) throw std::invalid_argument("folded_products: incompatible mode ranges");
    const long nmax = r.n_max();
    std::vector<double> out(static_cast<std::size_t>(nmax));
    out[0] = std::abs(r.at(0)) * std::abs(l.at(0));
    for (long n = 1; n < nmax; ++n)
        out[n] = std::abs(r.at(n)) * std::abs(l.at(n)) + std::abs(r.at(-n)) * std::abs(l.at(-n));
    return out;
}

DecayFit fit_decay_rate(const std::vector<double>& folded, long n_lo, long n_hi) {
    if (n_lo < 1 || n_hi >= static_cast<long>(folded.size()) || n_hi - n_lo + 1 < 8)
        throw std::invalid_argument("fit_decay_rate: range must hold at least 8 available modes");
    std::vector<double> x, y;
    for (long n = n_lo; n <= n_hi; ++n) {
        if (!(folded[n] > 0.0)) throw std::invalid_argument("fit_decay_rate: nonpositive product at n = " + std::to_string(n));
        x.push_back(static_cast<double>(n));
        y.push_back(folded[n]);
    }
    const auto f = fit_loglog(x, y);
    return {-f.slope, n_lo, n_hi, f.residual};
}

std::pair<long, long> default_fit_range(int h_level, int fine_level) {
    const long nmax = 1L << (fine_level - 1);
    return {std::max(8L, 1L << h_level), nmax / 4};
}

FrequencyBound bound_from_alpha(double alpha, double C, double C0, double h) {
    if (!(alpha > 0.5 && alpha < 1.5)) throw std::invalid_argument("bound_from_alpha: alpha must lie in (1/2, 3/2)");
    if (!(C > 0.0 && C0 > 0.0 && h > 0.0)) throw std::invalid_argument("bound_from_alpha: C, C0, h must be positive");
    FrequencyBound b;
    b.bound = 2.0 * (C0 * std::pow(C, 3.0 - 2.0 * alpha) / (3.0 - 2.0 * alpha) +
                     std::pow(C, 1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0)) *
              std::pow(h, 2.0 * alpha - 1.0);
    b.low_total_ratio = 1.0 / (1.0 + 1.0 / (C0 * C * C));
    return b;
}

}  // namespace roughfem
