#include "roughfem/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace roughfem {

void NeumaierSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> cumulative_sum(std::span<const double> increments, double start) {
    std::vector<double> out(increments.size() + 1);
    NeumaierSum acc;
    acc.add(start);
    out[0] = start;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        acc.add(increments[i]);
        out[i + 1] = acc.value();
    }
    return out;
}

SampleStats sample_stats(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("sample_stats: need at least two values");
    const auto n = static_cast<double>(values.size());
    const double mean = pairwise_sum(values) / n;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    SampleStats s;
    s.mean = mean;
    s.sigma_s = std::sqrt(var);
    s.sigma_M = s.sigma_s / std::sqrt(n);
    s.count = values.size();
    return s;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.residual = std::sqrt(rss / n);
    return f;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: nonpositive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

}  // namespace roughfem
