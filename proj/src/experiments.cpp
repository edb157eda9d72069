#include "roughfem/experiments.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "roughfem/csv.hpp"
#include "roughfem/randfield.hpp"

namespace roughfem {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

double dyadic(int level) { return std::ldexp(1.0, -level); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Rows of `rec` whose column `col` equals `value`.
std::vector<const std::vector<double>*> rows_where(const RunRecord& rec, const std::string& col, double value) {
    const auto c = rec.column(col);
    std::vector<const std::vector<double>*> out;
    for (const auto& r : rec.rows)
        if (r[c] == value) out.push_back(&r);
    return out;
}

}  // namespace

Observable parse_observable(const std::string& name) {
    if (name == "one") return Observable::constant(1.0);
    if (name == "minus_one") return Observable::constant(-1.0);
    if (name == "cos") return Observable::cosine();
    if (name == "dirac") return Observable::dirac(0.5);
    throw std::invalid_argument("unknown observable '" + name + "' (expected one, minus_one, cos, dirac)");
}

Galerkin1dResult run_galerkin_1d(ExperimentConfig config, const Galerkin1dParams& p) {
    require(1 <= p.h_min && p.h_min <= p.h_max && p.h_max + 1 <= p.ref_level && p.ref_level <= 24,
            "galerkin-1d: need 1 <= h_min <= h_max < ref_level <= 24");
    const Observable g = parse_observable(p.observable);
    config.kind = "galerkin-1d";
    config.set("h_min", p.h_min);
    config.set("h_max", p.h_max);
    config.set("ref_level", p.ref_level);
    config.set("observable", p.observable);
    config.set("bins", p.bins);
    config.set("predicted_C", p.predicted_C);

    auto fn = [&](std::size_t, RngStream& rng) {
        const auto a = lognormal_of(sample_brownian_bridge(p.ref_level, rng));
        const auto u_ref = solve_primal_explicit(a);
        std::vector<std::vector<double>> rows;
        double prev_F = nan_value;
        for (int L = p.h_min; L <= p.h_max; ++L) {
            const auto a_h = average_coefficient(a, L);
            const auto a_half = average_coefficient(a, L + 1);
            const auto u_h = solve_primal_explicit(a_h);
            const auto u_half = solve_primal_explicit(a_half);
            const auto l_h = solve_dual_explicit(a_h, g);
            const auto l_half = solve_dual_explicit(a_half, g);
            const double E = reference_galerkin_error(u_ref, u_h, g);
            const auto tl = two_level(a, u_h, u_half, l_h, l_half);
            const auto sm = single_mesh_estimator(a_half, u_half, l_half);
            const double C = sm.E_est > 0.0 ? std::abs(E) / sm.E_est : nan_value;
            const double ratio = level_ratio(prev_F, tl.F_tilde).value_or(nan_value);
            rows.push_back({static_cast<double>(L), E, tl.F_tilde, tl.F_abs, sm.E_est, sm.signed_sum, C, ratio});
            prev_F = tl.F_tilde;
        }
        return rows;
    };

    Galerkin1dResult res;
    res.record = run_experiment(config, {"log2h", "E_h", "F_tilde", "F_abs", "E_est", "signed_sum", "C", "level_ratio"},
                                {"log2h"}, fn);
    const auto& rec = res.record;
    std::vector<double> hs, mean_abs_E, mean_est;
    for (int L = p.h_min; L <= p.h_max; ++L) {
        std::vector<double> E, est;
        double abs_E = 0.0, sum_est = 0.0, abs_Ft = 0.0, sum_F = 0.0;
        for (const auto* r : rows_where(rec, "log2h", L)) {
            E.push_back((*r)[rec.column("E_h")]);
            est.push_back((*r)[rec.column("E_est")]);
            abs_E += std::abs(E.back());
            sum_est += est.back();
            abs_Ft += std::abs((*r)[rec.column("F_tilde")]);
            sum_F += (*r)[rec.column("F_abs")];
        }
        res.ratios.push_back(ratio_statistics(E, est, p.bins));
        hs.push_back(dyadic(L));
        mean_abs_E.push_back(abs_E / static_cast<double>(E.size()));
        mean_est.push_back(sum_est / static_cast<double>(E.size()));
        if (sum_F > 0.0 && abs_Ft < p.cancellation_threshold * sum_F)
            res.warnings.push_back("h=2^-" + std::to_string(L) + ": mean |F~| / mean F = " +
                                   format_double(abs_Ft / sum_F) + ", estimator terms cancel");
    }
    if (hs.size() >= 2) {
        res.error_rate = fit_loglog(hs, mean_abs_E);
        res.estimator_rate = fit_loglog(hs, mean_est);
    }

    if (!config.output_dir.empty()) {
        for (std::size_t i = 0; i < res.ratios.size(); ++i) {
            const auto& r = res.ratios[i];
            CsvWriter csv(config.output_dir / ("histogram_h" + std::to_string(p.h_min + static_cast<int>(i)) + ".csv"),
                          {"bin_left", "bin_right", "density"});
            for (std::size_t b = 0; b < r.density.size(); ++b) {
                csv.cell(r.bin_edges[b]).cell(r.bin_edges[b + 1]).cell(r.density[b]);
                csv.end_row();
            }
        }
        CsvWriter ratios(config.output_dir / "ratio_summary.csv", {"log2h", "mean_C", "sigma_C", "retained", "excluded"});
        for (std::size_t i = 0; i < res.ratios.size(); ++i) {
            const auto& r = res.ratios[i];
            ratios.cell(static_cast<long long>(p.h_min + static_cast<int>(i)))
                .cell(r.stats.mean)
                .cell(r.stats.sigma_s)
                .cell(static_cast<long long>(r.stats.count))
                .cell(static_cast<long long>(r.excluded));
            ratios.end_row();
        }
        CsvWriter rates(config.output_dir / "rates.csv", {"log2h", "mean_abs_E", "mean_E_est", "predicted_error"});
        for (std::size_t i = 0; i < hs.size(); ++i) {
            rates.cell(static_cast<long long>(p.h_min + static_cast<int>(i)))
                .cell(mean_abs_E[i])
                .cell(mean_est[i])
                .cell(p.predicted_C * mean_est[i]);
            rates.end_row();
        }
        CsvWriter fit(config.output_dir / "fit.csv", {"quantity", "slope", "residual"});
        fit.cell(std::string_view("mean_abs_E")).cell(res.error_rate.slope).cell(res.error_rate.residual);
        fit.end_row();
        fit.cell(std::string_view("mean_E_est")).cell(res.estimator_rate.slope).cell(res.estimator_rate.residual);
        fit.end_row();
    }
    return res;
}

FrequencyResult run_frequency(ExperimentConfig config, const FrequencyParams& p) {
    require(1 <= p.h_level && p.h_level + 3 <= p.fine_level && p.fine_level <= 24,
            "frequency: need 1 <= h and h + 3 <= fine_level <= 24");
    require(p.coefficient == "bridge" || p.coefficient == "smooth", "frequency: coefficient must be bridge or smooth");
    const Observable g = parse_observable(p.observable);
    auto range = default_fit_range(p.h_level, p.fine_level);
    if (p.fit_lo > 0) range.first = p.fit_lo;
    if (p.fit_hi > 0) range.second = p.fit_hi;
    const double n_star = p.n_star_factor * std::ldexp(1.0, p.h_level);

    config.kind = "frequency";
    config.set("h_level", p.h_level);
    config.set("fine_level", p.fine_level);
    config.set("observable", p.observable);
    config.set("coefficient", p.coefficient);
    config.set("n_star", n_star);
    config.set("fit_lo", range.first);
    config.set("fit_hi", range.second);
    config.set("dft_convention", "c_n = (1/N) sum_j f_j exp(-2 pi i n j / N)");

    FrequencyResult res;
    auto fn = [&](std::size_t index, RngStream& rng) {
        NodalCoefficient a;
        if (p.coefficient == "smooth") {
            a.level = p.fine_level;
            const std::size_t N = std::size_t{1} << p.fine_level;
            a.values.resize(N + 1);
            for (std::size_t j = 0; j <= N; ++j) a.values[j] = 1.0 + static_cast<double>(j) / static_cast<double>(N);
        } else {
            a = lognormal_nodes(sample_brownian_bridge(p.fine_level, rng));
        }
        const auto a_cells = cell_average_of_nodal(a);
        const auto u_h = solve_primal_explicit(average_coefficient(a_cells, p.h_level));
        const auto lam = solve_dual_explicit(a_cells, g);
        const auto R = residual_cells(a, u_h);
        const auto e = dual_error_cells(lam, p.h_level);
        const auto r = fourier_coefficients(R);
        const auto l = fourier_coefficients(e);
        const auto split = split_error(r, l, n_star);
        const double direct = physical_pairing(R, e);
        const auto folded = folded_products(r, l);
        DecayFit fit;
        double exponent = nan_value;
        try {
            fit = fit_decay_rate(folded, range.first, range.second);
            exponent = fit.exponent;
        } catch (const std::invalid_argument&) {
            // a smooth coefficient can leave exact zeros in the product spectrum
        }
        const double deficit = split.E_total != 0.0 ? std::abs(split.E_L - split.E_total) / std::abs(split.E_total)
                                                    : nan_value;
        if (index == 0) {
            res.fit = fit;
            res.folded = folded;
            res.abs_r.resize(folded.size());
            res.abs_l.resize(folded.size());
            for (std::size_t n = 0; n < folded.size(); ++n) {
                res.abs_r[n] = std::abs(r.at(static_cast<long>(n)));
                res.abs_l[n] = std::abs(l.at(static_cast<long>(n)));
            }
        }
        return std::vector<std::vector<double>>{{exponent, split.E_L, split.E_total, direct, deficit}};
    };
    res.record = run_experiment(config, {"exponent", "E_L", "E_total", "E_direct", "deficit"}, {}, fn);

    if (!config.output_dir.empty()) {
        CsvWriter modes(config.output_dir / "modes.csv", {"n", "abs_r", "abs_lambda", "product"});
        for (std::size_t n = 0; n < res.folded.size(); ++n) {
            modes.cell(static_cast<long long>(n)).cell(res.abs_r[n]).cell(res.abs_l[n]).cell(res.folded[n]);
            modes.end_row();
        }
        CsvWriter fit(config.output_dir / "fit.csv", {"exponent", "n_lo", "n_hi", "residual", "n_star"});
        fit.cell(res.fit.exponent)
            .cell(static_cast<long long>(range.first))
            .cell(static_cast<long long>(range.second))
            .cell(res.fit.residual)
            .cell(n_star);
        fit.end_row();
    }
    return res;
}

Quadrature1dResult run_quadrature_1d(ExperimentConfig config, const Quadrature1dParams& p) {
    require(1 <= p.h_min && p.h_min <= p.h_max && p.h_step >= 1, "quadrature-1d: need 1 <= h_min <= h_max, h_step >= 1");
    require(!p.k_offsets.empty(), "quadrature-1d: no k levels");
    for (int off : p.k_offsets)
        require(off >= 0 && p.h_max + off + 1 < p.ref_level, "quadrature-1d: k/2 must stay coarser than the reference level");
    require(p.ref_level <= 24, "quadrature-1d: ref_level at most 24");
    const Observable g = parse_observable(p.observable);

    config.kind = "quadrature-1d";
    config.set("rule", to_string(p.rule));
    config.set("h_min", p.h_min);
    config.set("h_max", p.h_max);
    config.set("h_step", p.h_step);
    std::string offs;
    for (int off : p.k_offsets) offs += (offs.empty() ? "" : ",") + std::to_string(off);
    config.set("k_offsets", offs);
    config.set("ref_level", p.ref_level);
    config.set("observable", p.observable);

    QuadratureConfig base;
    base.rule = p.rule;
    base.ref_level = p.ref_level;
    const int level = sample_level_for(base);

    auto fn = [&](std::size_t, RngStream& rng) {
        const auto a = lognormal_nodes(sample_brownian_bridge(level, rng));
        std::vector<std::vector<double>> rows;
        for (int L = p.h_min; L <= p.h_max; L += p.h_step)
            for (int off : p.k_offsets) {
                QuadratureConfig cfg = base;
                cfg.h_level = L;
                cfg.k_level = L + off;
                const auto s = quadrature_sample(a, cfg, g);
                rows.push_back({static_cast<double>(L), static_cast<double>(L + off), s.Q, s.Q_star, s.Qcal, s.Q_abs});
            }
        return rows;
    };

    Quadrature1dResult res;
    res.record = run_experiment(config, {"log2h", "log2k", "Q", "Q_star", "Qcal", "Q_abs"}, {"log2h", "log2k"}, fn);
    for (int L = p.h_min; L <= p.h_max; L += p.h_step) {
        std::vector<double> ks, qs;
        for (int off : p.k_offsets) {
            const std::vector<double> key{static_cast<double>(L), static_cast<double>(L + off)};
            QuadratureTableRow row;
            row.log2h = L;
            row.log2k = L + off;
            row.Q = res.record.find(key, "Q")->stats;
            row.Q_star = res.record.find(key, "Q_star")->stats;
            row.Qcal = res.record.find(key, "Qcal")->stats;
            res.table.push_back(row);
            ks.push_back(dyadic(L + off));
            qs.push_back(row.Q.mean);
        }
        if (ks.size() >= 3) res.gamma.emplace_back(L, fit_gamma(ks, qs));
    }

    if (!config.output_dir.empty()) {
        CsvWriter table(config.output_dir / "table.csv",
                        {"log2h", "log2k", "rule", "M", "Q_hat", "sigma_M", "Qstar_hat", "sigma_M_star", "Qcal_hat",
                         "sigma_M_ref"});
        for (const auto& r : res.table) {
            table.cell(static_cast<long long>(r.log2h))
                .cell(static_cast<long long>(r.log2k))
                .cell(std::string_view(to_string(p.rule)))
                .cell(static_cast<long long>(r.Q.count))
                .cell(r.Q.mean)
                .cell(r.Q.sigma_M)
                .cell(r.Q_star.mean)
                .cell(r.Q_star.sigma_M)
                .cell(r.Qcal.mean)
                .cell(r.Qcal.sigma_M);
            table.end_row();
        }
        if (!res.gamma.empty()) {
            CsvWriter gamma(config.output_dir / "gamma.csv", {"log2h", "gamma", "sign_consistent"});
            for (const auto& [L, f] : res.gamma) {
                gamma.cell(static_cast<long long>(L)).cell(f.gamma).cell(static_cast<long long>(f.sign_consistent));
                gamma.end_row();
            }
        }
    }
    return res;
}

Galerkin2dResult run_galerkin_2d(ExperimentConfig config, const Galerkin2dParams& p) {
    require(1 <= p.h_min && p.h_min <= p.h_max && p.h_max + 1 <= p.ref_level && p.ref_level <= p.field_level &&
                p.field_level <= 12,
            "galerkin-2d: need 1 <= h_min <= h_max < ref_level <= field_level <= 12");
    require(p.coefficient == "lognormal" || p.coefficient == "smooth" || p.coefficient == "constant",
            "galerkin-2d: coefficient must be lognormal, smooth or constant");

    config.kind = "galerkin-2d";
    config.set("field_level", p.field_level);
    config.set("sigma2", p.sigma2);
    config.set("ell", p.ell);
    config.set("ref_level", p.ref_level);
    config.set("h_min", p.h_min);
    config.set("h_max", p.h_max);
    config.set("coefficient", p.coefficient);
    config.set("child_rule", p.child_rule == ChildRule::per_child ? "per_child" : "averaged");
    config.set("reg_stencil", "centred same-orientation neighbours, one-sided at the boundary");

    const int n = 1 << p.field_level;
    std::optional<CirculantEmbedding> embedding;
    Field2D fixed;
    if (p.coefficient == "lognormal") {
        embedding.emplace(n, p.sigma2, p.ell);
    } else {
        fixed.n = n;
        fixed.log_values.assign(static_cast<std::size_t>(n) * n, 0.0);
        if (p.coefficient == "smooth")
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double x = (i + 0.5) / n, y = (j + 0.5) / n;
                    fixed.log_values[static_cast<std::size_t>(i) * n + j] =
                        std::log(1.0 + x * y + 0.5 * std::sin(std::numbers::pi * x));
                }
    }
    std::map<int, TriMesh> meshes;
    for (int L = p.h_min; L <= p.h_max + 1; ++L) meshes.emplace(L, triangulate(L));
    meshes.emplace(p.ref_level, triangulate(p.ref_level));

    // f = 1 and g = 1 give identical primal and dual systems, so each solve serves both.
    auto fn = [&](std::size_t index, RngStream& rng) {
        const Field2D field = embedding ? embedding->sample(rng) : fixed;
        std::map<int, std::pair<std::vector<double>, FemSolution2D>> sol;
        for (const auto& [L, mesh] : meshes) {
            auto a = elementwise_coefficient(field, mesh);
            auto u = assemble_solve(mesh, a, 1.0);
            u.sample_id = index;
            sol.emplace(L, std::make_pair(std::move(a), std::move(u)));
        }
        const auto& u_ref = sol.at(p.ref_level).second;
        std::vector<std::vector<double>> rows;
        for (int L = p.h_min; L <= p.h_max; ++L) {
            const auto& [a_h, u_h] = sol.at(L);
            const auto& u_half = sol.at(L + 1).second;
            const double E = reference_error_2d(u_ref, u_h);
            const double est = estimator_est_2d(meshes.at(L), a_h, u_h, u_half, u_h, u_half, p.child_rule).total;
            const double reg = estimator_reg_2d(meshes.at(L), a_h, u_h, u_h).total;
            rows.push_back({static_cast<double>(L), E, est, reg, est > 0.0 ? E / est : nan_value});
        }
        return rows;
    };

    Galerkin2dResult res;
    res.padding = embedding ? embedding->padding() : 0;
    res.record = run_experiment(config, {"log2h", "E_h", "E_est", "E_reg", "ratio"}, {"log2h"}, fn);
    return res;
}

double expected_galerkin_limit(const Observable& g, int intervals) {
    require(intervals >= 2 && intervals % 2 == 0, "expected_galerkin_limit: intervals must be even");
    const double dx = 1.0 / intervals;
    auto f = [&](double x) { return std::exp(0.5 * x) * g.G(x) / 6.0; };
    NeumaierSum acc;
    for (int i = 0; i <= intervals; ++i) {
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc.add(w * f(i * dx));
    }
    return acc.value() * dx / 3.0;
}

ExpectedRateResult run_expected_rate(ExperimentConfig config, const ExpectedRateParams& p) {
    require(1 <= p.h_min && p.h_min <= p.h_max && p.h_max < p.fine_level && p.fine_level <= 24,
            "expected-rate: need 1 <= h_min <= h_max < fine_level <= 24");
    const Observable g = Observable::constant(-1.0);
    config.kind = "expected-rate";
    config.set("h_min", p.h_min);
    config.set("h_max", p.h_max);
    config.set("fine_level", p.fine_level);
    config.set("observable", "minus_one");
    config.set("coefficient", "exp(W), left endpoint per fine cell");

    auto fn = [&](std::size_t, RngStream& rng) {
        const auto a = lognormal_of(sample_wiener(p.fine_level, rng));
        const auto u_ref = solve_primal_explicit(a);
        const auto l_ref = solve_dual_explicit(a, g);
        std::vector<std::vector<double>> rows;
        std::vector<double> hs, Es;
        for (int L = p.h_min; L <= p.h_max; ++L) {
            const auto a_h = average_coefficient(a, L);
            const auto u_h = solve_primal_explicit(a_h);
            const auto l_h = solve_dual_explicit(a_h, g);
            const double E = two_level(a, u_h, u_ref, l_h, l_ref).F_tilde;
            const double E_g = reference_galerkin_error(u_ref, u_h, g);
            rows.push_back({static_cast<double>(L), E, E / dyadic(L), E_g, nan_value});
            hs.push_back(dyadic(L));
            Es.push_back(std::abs(E));
        }
        if (hs.size() >= 2) rows.back().back() = fit_loglog(hs, Es).slope;
        return rows;
    };

    ExpectedRateResult res;
    res.limit = expected_galerkin_limit(g);
    config.set("limit", format_double(res.limit));
    res.record = run_experiment(config, {"log2h", "E", "E_scaled", "E_g", "path_slope"}, {"log2h"}, fn);
    return res;
}

void write_field_csv(const Field2D& field, const std::filesystem::path& path) {
    CsvWriter csv(path, {"x", "y", "log_a"});
    for (int i = 0; i < field.n; ++i)
        for (int j = 0; j < field.n; ++j) {
            csv.cell((i + 0.5) / field.n).cell((j + 0.5) / field.n).cell(field.at(i, j));
            csv.end_row();
        }
}

void write_path_csv(const SamplePath& path, const std::filesystem::path& file) {
    CsvWriter csv(file, {"x", "value"});
    for (std::size_t j = 0; j < path.values.size(); ++j) {
        csv.cell(path.grid.x(j)).cell(path.values[j]);
        csv.end_row();
    }
}

}  // namespace roughfem
