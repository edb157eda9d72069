#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roughfem {

/// Running sum with Neumaier compensation.
class NeumaierSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Pairwise (cascade) summation in index order.
double pairwise_sum(std::span<const double> values);

/// Compensated running sums: out[0] = start, out[i+1] = out[i] + increments[i].
std::vector<double> cumulative_sum(std::span<const double> increments, double start = 0.0);

struct SampleStats {
    double mean = 0.0;
    double sigma_s = 0.0;  ///< unbiased sample standard deviation
    double sigma_M = 0.0;  ///< sigma_s / sqrt(count)
    std::size_t count = 0;
};

/// Requires at least two values.
SampleStats sample_stats(std::span<const double> values);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< root mean square of the fit residuals
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Least-squares line through (log x, log y). All inputs must be positive.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace roughfem
