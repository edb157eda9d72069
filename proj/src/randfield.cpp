#include "roughfem/randfield.hpp"

#include "fftw_lock.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>

namespace roughfem {

namespace {

void check_level(int level, const char* who) {
    if (level < 1 || level > 30) throw std::invalid_argument(std::string(who) + ": level must be in [1, 30]");
}

// Bisect every span of width `stride` points, conditioning on its endpoints.
void bisect(std::vector<double>& v, std::size_t stride, double span, RngStream& rng) {
    const double sd = std::sqrt(span / 4.0);
    const std::size_t half = stride / 2;
    for (std::size_t s = 0; s + stride < v.size(); s += stride)
        v[s + half] = 0.5 * (v[s] + v[s + stride]) + sd * rng.normal();
}

void fft2_forward(std::vector<std::complex<double>>& data, int m) {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_2d(m, m, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

}  // namespace

SamplePath sample_brownian_bridge(int level, RngStream& rng) {
    check_level(level, "sample_brownian_bridge");
    SamplePath p;
    p.grid.level = level;
    p.kind = PathKind::bridge;
    p.values.assign(p.grid.points(), 0.0);
    std::size_t stride = p.grid.cells();
    double span = 1.0;
    while (stride > 1) {
        bisect(p.values, stride, span, rng);
        stride /= 2;
        span /= 2.0;
    }
    return p;
}

SamplePath sample_wiener(int level, RngStream& rng) {
    check_level(level, "sample_wiener");
    SamplePath p;
    p.grid.level = level;
    p.kind = PathKind::wiener;
    const double sd = std::sqrt(p.grid.spacing());
    std::vector<double> inc(p.grid.cells());
    for (auto& d : inc) d = sd * rng.normal();
    p.values.assign(p.grid.points(), 0.0);
    double w = 0.0;
    for (std::size_t j = 0; j < inc.size(); ++j) {
        w += inc[j];
        p.values[j + 1] = w;
    }
    return p;
}

SamplePath refine_path(const SamplePath& path, RngStream& rng) {
    check_level(path.grid.level + 1, "refine_path");
    SamplePath out;
    out.grid.level = path.grid.level + 1;
    out.kind = path.kind;
    out.values.assign(out.grid.points(), 0.0);
    for (std::size_t j = 0; j < path.values.size(); ++j) out.values[2 * j] = path.values[j];
    bisect(out.values, 2, path.grid.spacing(), rng);
    return out;
}

SamplePath restrict_path(const SamplePath& path, int level) {
    if (level < 1 || level > path.grid.level) throw std::invalid_argument("restrict_path: level not coarser");
    const std::size_t step = std::size_t{1} << (path.grid.level - level);
    SamplePath out;
    out.grid.level = level;
    out.kind = path.kind;
    out.values.reserve(out.grid.points());
    for (std::size_t j = 0; j < path.values.size(); j += step) out.values.push_back(path.values[j]);
    return out;
}

Coefficient lognormal_of(const SamplePath& path, CellPoint point) {
    Coefficient c;
    const std::size_t cells = path.grid.cells();
    if (point == CellPoint::left) {
        c.level = path.grid.level;
        c.values.resize(cells);
        for (std::size_t j = 0; j < cells; ++j) c.values[j] = std::exp(path.values[j]);
    } else {
        if (path.grid.level < 2) throw std::invalid_argument("lognormal_of: midpoint needs level >= 2");
        c.level = path.grid.level - 1;
        c.values.resize(cells / 2);
        for (std::size_t j = 0; j < cells / 2; ++j) c.values[j] = std::exp(path.values[2 * j + 1]);
    }
    for (double v : c.values)
        if (!std::isfinite(v) || !(v > 0.0)) throw std::overflow_error("lognormal_of: non-finite coefficient");
    return c;
}

NodalCoefficient lognormal_nodes(const SamplePath& path) {
    NodalCoefficient a;
    a.level = path.grid.level;
    a.values.resize(path.values.size());
    for (std::size_t j = 0; j < path.values.size(); ++j) {
        a.values[j] = std::exp(path.values[j]);
        if (!std::isfinite(a.values[j]) || !(a.values[j] > 0.0))
            throw std::overflow_error("lognormal_nodes: non-finite coefficient");
    }
    return a;
}

CirculantEmbedding::CirculantEmbedding(int n, double sigma2, double ell) : n_(n), sigma2_(sigma2), ell_(ell) {
    if (n < 1 || (n & (n - 1)) != 0) throw std::invalid_argument("CirculantEmbedding: n must be a power of two");
    if (!(sigma2 > 0.0) || !(ell > 0.0)) throw std::invalid_argument("CirculantEmbedding: sigma2 and ell must be positive");

    for (padding_ = 2; padding_ <= max_padding; padding_ *= 2) {
        const int m = padding_ * n;
        std::vector<std::complex<double>> c(static_cast<std::size_t>(m) * m);
        for (int i = 0; i < m; ++i) {
            const double dx = std::min(i, m - i) / static_cast<double>(n);
            for (int j = 0; j < m; ++j) {
                const double dy = std::min(j, m - j) / static_cast<double>(n);
                c[static_cast<std::size_t>(i) * m + j] = sigma2 * std::exp(-std::hypot(dx, dy) / ell);
            }
        }
        fft2_forward(c, m);
        double lo = c[0].real(), hi = c[0].real();
        for (const auto& z : c) {
            lo = std::min(lo, z.real());
            hi = std::max(hi, z.real());
        }
        min_ratio_ = lo / hi;
        if (min_ratio_ >= -negativity_tolerance) {
            const double m2 = static_cast<double>(m) * m;
            scale_.resize(c.size());
            for (std::size_t k = 0; k < c.size(); ++k) scale_[k] = std::sqrt(std::max(c[k].real(), 0.0) / m2);
            return;
        }
    }
    throw std::runtime_error("CirculantEmbedding: spectrum negative (min/max = " + std::to_string(min_ratio_) +
                             ") at maximum padding");
}

std::pair<Field2D, Field2D> CirculantEmbedding::sample_pair(RngStream& rng) const {
    const int m = padding_ * n_;
    std::vector<std::complex<double>> w(scale_.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double re = rng.normal();
        const double im = rng.normal();
        w[k] = scale_[k] * std::complex<double>(re, im);
    }
    fft2_forward(w, m);
    std::pair<Field2D, Field2D> out;
    for (Field2D* f : {&out.first, &out.second}) {
        f->n = n_;
        f->sigma2 = sigma2_;
        f->ell = ell_;
        f->log_values.resize(static_cast<std::size_t>(n_) * n_);
    }
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            const auto z = w[static_cast<std::size_t>(i) * m + j];
            out.first.log_values[static_cast<std::size_t>(i) * n_ + j] = z.real();
            out.second.log_values[static_cast<std::size_t>(i) * n_ + j] = z.imag();
        }
    return out;
}

Field2D CirculantEmbedding::sample(RngStream& rng) const { return sample_pair(rng).first; }

Field2D sample_field_2d_circulant(int n, double sigma2, double ell, RngStream& rng) {
    return CirculantEmbedding(n, sigma2, ell).sample(rng);
}

std::vector<CovarianceEstimate> empirical_covariance(const std::vector<std::vector<double>>& samples,
                                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<CovarianceEstimate> out;
    if (pairs.empty()) return out;
    const std::size_t M = samples.size();
    if (M < 2) throw std::invalid_argument("empirical_covariance: need at least two samples");
    const double dM = static_cast<double>(M);
    for (const auto& [p, q] : pairs) {
        double mp = 0.0, mq = 0.0;
        for (const auto& s : samples) {
            mp += s.at(p);
            mq += s.at(q);
        }
        mp /= dM;
        mq /= dM;
        std::vector<double> prod(M);
        for (std::size_t s = 0; s < M; ++s) prod[s] = (samples[s][p] - mp) * (samples[s][q] - mq);
        double sum = 0.0;
        for (double v : prod) sum += v;
        const double pmean = sum / dM;
        double ss = 0.0;
        for (double v : prod) ss += (v - pmean) * (v - pmean);
        CovarianceEstimate e;
        e.covariance = sum / (dM - 1.0);
        e.standard_error = std::sqrt(ss / (dM - 1.0) / dM);
        out.push_back(e);
    }
    return out;
}

}  // namespace roughfem
