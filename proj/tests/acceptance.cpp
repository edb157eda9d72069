// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "roughfem/estimators1d.hpp"
#include "roughfem/experiments.hpp"
#include "roughfem/randfield.hpp"

using namespace roughfem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %s: %s [%.1f s, budget %.0f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s,
                budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ExperimentConfig config(std::size_t M, std::uint64_t seed) {
    ExperimentConfig c;
    c.M = M;
    c.seed = seed;
    c.threads = 0;
    return c;
}

Coefficient bridge_cells(int level, std::uint64_t seed, std::uint64_t index) {
    RngStream rng(seed, index);
    return lognormal_of(sample_brownian_bridge(level, rng));
}

}  // namespace

int main() {
    criterion("two-level/single-mesh identity", 60, [] {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 200; ++s) {
            const auto a = bridge_cells(12, 101, s);
            for (const auto& g : {Observable::constant(1.0), Observable::dirac(0.5), Observable::cosine()})
                for (int L = 4; L <= 8; ++L) {
                    const auto a_h = average_coefficient(a, L), a_half = average_coefficient(a, L + 1);
                    const auto u_h = solve_primal_explicit(a_h), u_half = solve_primal_explicit(a_half);
                    const auto l_h = solve_dual_explicit(a_h, g), l_half = solve_dual_explicit(a_half, g);
                    const double two = two_level(a, u_h, u_half, l_h, l_half).F_tilde;
                    const double one = single_mesh_estimator(a_half, u_half, l_half).signed_sum;
                    const double scale = std::max({std::abs(two), std::abs(one), 1e-300});
                    worst = std::max(worst, std::abs(two - one) / scale);
                }
        }
        return Outcome{worst <= 1e-12, fmt("max relative difference %.3g (tol 1e-12), 200 paths x 5 h x 3 g", worst)};
    });

    criterion("explicit vs tridiagonal solves", 30, [] {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto a = bridge_cells(14, 102, s);
            for (int L = 4; L <= 12; ++L) {
                const auto ex = solve_primal_explicit(average_coefficient(a, L));
                const auto tri = assemble_solve_tridiagonal(a, L, model_problem_load(L), Boundary::model_problem);
                for (std::size_t j = 0; j < ex.nodes.size(); ++j)
                    worst = std::max(worst, std::abs(ex.nodes[j] - tri.nodes[j]));
            }
        }
        return Outcome{worst <= 1e-10, fmt("max nodal error %.3g (tol 1e-10), 100 paths, h = 2^-4..2^-12", worst)};
    });

    criterion("ratio statistic C, h = 2^-10", 300, [] {
        Galerkin1dParams p;
        p.h_min = p.h_max = 10;
        p.ref_level = 14;
        bool ok = true;
        std::string d;
        for (const char* g : {"one", "dirac"}) {
            p.observable = g;
            const auto r = run_galerkin_1d(config(1000, 103), p);
            const double m = r.ratios[0].stats.mean;
            ok = ok && m >= 1.5 && m <= 2.6;
            d += fmt("%s: mean C = %.3f (sigma_M %.3f, excluded %zu); ", g, m, r.ratios[0].stats.sigma_M,
                     r.ratios[0].excluded);
        }
        return Outcome{ok, d + "target [1.5, 2.6], M = 1000"};
    });

    criterion("Galerkin error rate", 300, [] {
        Galerkin1dParams p;
        p.h_min = 5;
        p.h_max = 9;
        p.ref_level = 14;
        const auto r = run_galerkin_1d(config(100, 104), p);
        const double s = r.error_rate.slope;
        return Outcome{std::abs(s - 1.0) <= 0.25, fmt("slope of mean |E| = %.3f (target 1.0 +- 0.25), M = 100", s)};
    });

    criterion("Fourier product decay, h = 2^-10", 60, [] {
        FrequencyParams p;
        p.h_level = 10;
        p.fine_level = 16;
        bool ok = true;
        std::string d;
        for (const char* g : {"one", "dirac"}) {
            p.observable = g;
            const auto r = run_frequency(config(1, 105), p);
            ok = ok && std::abs(r.fit.exponent - 2.0) <= 0.3;
            d += fmt("%s: exponent %.3f on n in [%ld, %ld]; ", g, r.fit.exponent, r.fit.n_lo, r.fit.n_hi);
        }
        return Outcome{ok, d + "target 2.0 +- 0.3"};
    });

    criterion("low-frequency deficit", 120, [] {
        FrequencyParams p;
        p.h_level = 10;
        p.fine_level = 16;
        p.coefficient = "smooth";
        const double smooth = run_frequency(config(2, 106), p).record.find({}, "deficit")->stats.mean;
        p.coefficient = "bridge";
        const double rough = run_frequency(config(20, 106), p).record.find({}, "deficit")->stats.mean;
        return Outcome{smooth < 0.05 && rough > 0.15,
                       fmt("smooth %.4f (target < 0.05), bridge mean over 20 = %.3f (target > 0.15), n* = 1/h", smooth,
                           rough)};
    });

    criterion("quadrature table, trapezoid k = h", 600, [] {
        Quadrature1dParams p;
        p.rule = QuadRule::trapezoid;
        p.h_min = 5;
        p.h_max = 9;
        p.h_step = 2;
        p.ref_level = 18;
        const auto r = run_quadrature_1d(config(2048, 107), p);
        const double Q_target[] = {1.2e-3, 2.7e-4, 6.1e-5};
        const double Qcal_target[] = {1.5e-3, 3.6e-4, 8.1e-5};
        bool ok = true;
        std::string d;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& row = r.table[i];
            const bool q = std::abs(row.Q.mean - Q_target[i]) <= 5.0 * row.Q.sigma_M;
            const bool c = std::abs(row.Qcal.mean - Qcal_target[i]) <= 5.0 * row.Qcal.sigma_M;
            ok = ok && q && c;
            d += fmt("h=2^-%d Q %.3g+-%.2g vs %.2g%s, Qcal %.3g+-%.2g vs %.2g%s; ", row.log2h, row.Q.mean, row.Q.sigma_M,
                     Q_target[i], q ? "" : " (off)", row.Qcal.mean, row.Qcal.sigma_M, Qcal_target[i], c ? "" : " (off)");
        }
        return Outcome{ok, d + "tol 5 sigma_M, M = 2048, k~ = 2^-18"};
    });

    criterion("quadrature rate gamma, forward Euler", 600, [] {
        Quadrature1dParams p;
        p.rule = QuadRule::forward_euler;
        p.h_min = p.h_max = 6;
        p.k_offsets = {3, 4, 5, 6};
        p.ref_level = 18;
        const auto r = run_quadrature_1d(config(4096, 108), p);
        const auto& f = r.gamma.at(0).second;
        std::vector<double> k, qc;
        for (const auto& row : r.table) {
            k.push_back(std::ldexp(1.0, -row.log2k));
            qc.push_back(std::abs(row.Qcal.mean));
        }
        const double gamma_cal = fit_loglog(k, qc).slope;
        return Outcome{std::abs(f.gamma - 1.0) <= 0.3 && f.sign_consistent,
                       fmt("gamma(Q) = %.3f%s, gamma(Qcal) = %.3f (target 1.0 +- 0.3), h = 2^-6, k = 2^-9..2^-12, "
                           "M = 4096",
                           f.gamma, f.sign_consistent ? "" : " (sign change)", gamma_cal)};
    });

    criterion("expected Galerkin limit", 600, [] {
        ExpectedRateParams p;
        p.h_min = p.h_max = 8;
        p.fine_level = 14;
        const auto r = run_expected_rate(config(4000, 109), p);
        const auto& s = r.record.find({8.0}, "E_scaled")->stats;
        const double closed = (4.0 * std::exp(0.5) - 6.0) / 6.0;
        const double tol = std::max(3.0 * s.sigma_M, 0.15 * r.limit);
        return Outcome{std::abs(s.mean - r.limit) <= tol && std::abs(r.limit - closed) <= 1e-10,
                       fmt("mean E/h = %.5f +- %.5f vs limit %.5f (closed form %.5f), tol %.5f, M = 4000", s.mean,
                           s.sigma_M, r.limit, closed, tol)};
    });

    criterion("Wiener average identity", 120, [] {
        const double h = std::ldexp(1.0, -4);
        const auto s = wiener_average_identity(4, 14, 100000, 110, 0);
        const double target = h * h / 6.0;
        const double tol = std::max(3.0 * s.sigma_M, 0.5 * std::pow(h, 2.5));
        return Outcome{std::abs(s.mean - target) <= tol,
                       fmt("mean %.4g +- %.2g vs h^2/6 = %.4g, tol %.3g, M = 1e5", s.mean, s.sigma_M, target, tol)};
    });

    criterion("2D estimator tracking", 900, [] {
        Galerkin2dParams p;
        p.field_level = 9;
        p.ref_level = 7;
        p.h_min = 3;
        p.h_max = 5;
        p.sigma2 = 1.0;
        p.ell = 0.2;
        const auto r = run_galerkin_2d(config(20, 111), p);
        const auto& rec = r.record;
        const auto iR = rec.column("ratio"), iEst = rec.column("E_est"), iReg = rec.column("E_reg");
        double lo = 1e300, hi = -1e300;
        std::size_t below = 0;
        for (const auto& row : rec.rows) {
            lo = std::min(lo, row[iR]);
            hi = std::max(hi, row[iR]);
            if (row[iReg] < row[iEst]) ++below;
        }
        const double frac = static_cast<double>(below) / static_cast<double>(rec.rows.size());
        const bool ok = rec.completed_samples == 20 && lo >= 0.2 && hi <= 3.0 && frac >= 0.9;
        return Outcome{ok, fmt("E/E_est in [%.3f, %.3f] (target [0.2, 3]), E_reg < E_est in %.0f%% of %zu cases "
                               "(target >= 90%%), padding %d",
                               lo, hi, 100.0 * frac, rec.rows.size(), r.padding)};
    });

    criterion("field covariance", 120, [] {
        const int n = 32;
        const double sigma2 = 1.0, ell = 0.2;
        CirculantEmbedding emb(n, sigma2, ell);
        const std::vector<std::pair<int, int>> lags{{0, 0}, {1, 0}, {0, 3}, {2, 2}, {8, 5}};
        const int i0 = 10, j0 = 12;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& [di, dj] : lags)
            pairs.emplace_back(static_cast<std::size_t>(i0 * n + j0), static_cast<std::size_t>((i0 + di) * n + j0 + dj));
        std::vector<std::vector<double>> samples;
        for (std::size_t s = 0; s < 5000; ++s) {
            RngStream rng(112, s);
            auto [a, b] = emb.sample_pair(rng);
            samples.push_back(std::move(a.log_values));
            samples.push_back(std::move(b.log_values));
        }
        const auto cov = empirical_covariance(samples, pairs);
        bool ok = true;
        std::string d;
        for (std::size_t k = 0; k < lags.size(); ++k) {
            const double dist = std::hypot(lags[k].first, lags[k].second) / n;
            const double target = sigma2 * std::exp(-dist / ell);
            const double z = (cov[k].covariance - target) / cov[k].standard_error;
            ok = ok && std::abs(z) <= 3.0;
            d += fmt("r=%.3f: %.4f vs %.4f (z %.2f); ", dist, cov[k].covariance, target, z);
        }
        return Outcome{ok, d + "tol 3 SE, M = 1e4"};
    });

    std::printf("%d criteria failed\n", failures);
    return failures;
}
