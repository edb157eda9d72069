#include "roughfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "roughfem/parallel.hpp"
#include "roughfem/randfield.hpp"

namespace roughfem {

QuadratureEstimate pathwise_quadrature_estimator(const Coefficient& a_hk, const Coefficient& a_hk2,
                                                 const FemSolution& u_hk, const FemSolution& l, bool absolute) {
    if (a_hk.level != a_hk2.level || a_hk.level != u_hk.level || u_hk.level != l.level)
        throw std::invalid_argument("pathwise_quadrature_estimator: inputs must share the h-mesh");
    const double h = a_hk.spacing();
    QuadratureEstimate est;
    est.h_level = a_hk.level;
    est.terms.resize(a_hk.values.size());
    NeumaierSum acc;
    for (std::size_t e = 0; e < est.terms.size(); ++e) {
        const double t = -h * (a_hk.values[e] - a_hk2.values[e]) * u_hk.deriv[e] * l.deriv[e];
        est.terms[e] = absolute ? std::abs(t) : t;
        acc.add(est.terms[e]);
    }
    est.Q = acc.value();
    return est;
}

double reference_quadrature_error(const FemSolution& u_ref, const FemSolution& u_hk, const Observable& g) {
    if (u_ref.level != u_hk.level) throw std::invalid_argument("reference_quadrature_error: meshes differ");
    std::vector<double> diff(u_ref.nodes.size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = u_ref.nodes[j] - u_hk.nodes[j];
    return g.pair(diff, u_ref.level);
}

int sample_level_for(const QuadratureConfig& cfg) {
    return cfg.ref_level + (cfg.rule == QuadRule::midpoint ? 1 : 0);
}

QuadratureSample quadrature_sample(const NodalCoefficient& a, const QuadratureConfig& cfg, const Observable& g) {
    if (!(cfg.h_level <= cfg.k_level && cfg.k_level < cfg.ref_level))
        throw std::invalid_argument("quadrature_sample: need h >= k > reference quadrature level");
    const auto a_k = quadrature_coefficient(a, cfg.h_level, cfg.k_level, cfg.rule);
    const auto a_k2 = quadrature_coefficient(a, cfg.h_level, cfg.k_level + 1, cfg.rule);
    const auto a_ref = quadrature_coefficient(a, cfg.h_level, cfg.ref_level, cfg.rule);
    const auto u_k = solve_primal_explicit(a_k);
    const auto u_ref = solve_primal_explicit(a_ref);
    QuadratureSample s;
    const auto l_k2 = solve_dual_explicit(a_k2, g);
    s.Q = pathwise_quadrature_estimator(a_k, a_k2, u_k, l_k2).Q;
    s.Q_abs = pathwise_quadrature_estimator(a_k, a_k2, u_k, l_k2, true).Q;
    s.Q_star = pathwise_quadrature_estimator(a_k, a_k2, u_k, solve_dual_explicit(a_ref, g)).Q;
    s.Qcal = reference_quadrature_error(u_ref, u_k, g);
    return s;
}

McQuadrature mc_quadrature(const QuadratureConfig& cfg, const Observable& g, std::size_t M, std::uint64_t seed,
                           int threads) {
    if (M < 2) throw std::invalid_argument("mc_quadrature: M must be at least 2");
    McQuadrature out;
    out.samples.resize(M);
    const int level = sample_level_for(cfg);
    parallel_for(M, threads, [&](std::size_t i) {
        RngStream rng(seed, i);
        const auto a = lognormal_nodes(sample_brownian_bridge(level, rng));
        out.samples[i] = quadrature_sample(a, cfg, g);
    });
    std::vector<double> q(M), qs(M), qc(M);
    for (std::size_t i = 0; i < M; ++i) {
        q[i] = out.samples[i].Q;
        qs[i] = out.samples[i].Q_star;
        qc[i] = out.samples[i].Qcal;
    }
    out.Q = sample_stats(q);
    out.Q_star = sample_stats(qs);
    out.Qcal = sample_stats(qc);
    return out;
}

GammaFit fit_gamma(const std::vector<double>& k, const std::vector<double>& Q) {
    if (k.size() != Q.size() || k.size() < 3) throw std::invalid_argument("fit_gamma: need at least three levels");
    GammaFit f;
    f.sign_consistent = true;
    std::vector<double> mag(Q.size());
    for (std::size_t i = 0; i < Q.size(); ++i) {
        if (Q[i] == 0.0 || (Q[i] > 0.0) != (Q[0] > 0.0)) f.sign_consistent = false;
        mag[i] = std::abs(Q[i]);
    }
    if (!f.sign_consistent) {
        f.gamma = std::nan("");
        for (double m : mag)
            if (m == 0.0) return f;
    }
    f.gamma = fit_loglog(k, mag).slope;
    return f;
}

double reciprocal_average_gap(const std::vector<double>& a_cells, double h) {
    if (a_cells.empty()) throw std::invalid_argument("reciprocal_average_gap: no cells");
    const double k = h / static_cast<double>(a_cells.size());
    NeumaierSum inv, mean;
    for (double a : a_cells) {
        inv.add(k / a);
        mean.add(a);
    }
    const double a_h = mean.value() / static_cast<double>(a_cells.size());
    return inv.value() - h / a_h;
}

SampleStats wiener_average_identity(int h_level, int fine_level, std::size_t M, std::uint64_t seed, int threads) {
    if (fine_level <= h_level) throw std::invalid_argument("wiener_average_identity: fine grid must be finer than h");
    const double h = std::ldexp(1.0, -h_level);
    const std::size_t r = std::size_t{1} << (fine_level - h_level);
    const double sd = std::sqrt(std::ldexp(1.0, -fine_level));
    std::vector<double> vals(M);
    parallel_for(M, threads, [&](std::size_t i) {
        RngStream rng(seed, i);
        std::vector<double> a(r);
        double w = 0.0;
        for (std::size_t q = 0; q < r; ++q) {
            a[q] = std::exp(w);
            w += sd * rng.normal();
        }
        vals[i] = reciprocal_average_gap(a, h);
    });
    return sample_stats(vals);
}

}  // namespace roughfem
