#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "roughfem/experiments.hpp"

using namespace roughfem;
namespace fs = std::filesystem;

namespace {

fs::path default_output_root() {
    const char* env = std::getenv("ROUGHFEM_OUTPUT_ROOT");
    return env && *env ? fs::path(env) : fs::path("runs");
}

/// Flags of one subcommand: registration, paper-scale overrides and the resolved listing.
class Flags {
public:
    explicit Flags(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& name, T& var, const std::string& help) {
        auto* opt = app_->add_option(name, var, help)->capture_default_str();
        printers_.emplace_back(opt->get_name(), [&var] {
            std::ostringstream os;
            if constexpr (std::is_same_v<T, std::vector<int>>) {
                for (std::size_t i = 0; i < var.size(); ++i) os << (i ? " " : "") << var[i];
            } else {
                os << var;
            }
            return os.str();
        });
        return opt;
    }

    /// Applied by --paper-scale unless the flag was given on the command line or in --config.
    template <class T>
    void paper(CLI::Option* opt, T& var, T value) {
        overrides_.push_back([opt, &var, value] {
            if (opt->count() == 0) var = value;
        });
    }

    void apply_paper_scale() {
        for (auto& f : overrides_) f();
    }

    void print(std::ostream& os) const {
        os << "resolved configuration (" << app_->get_name() << "):\n";
        for (const auto& [name, value] : printers_) os << "  " << name << " = " << value() << "\n";
    }

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<std::string()>>> printers_;
    std::vector<std::function<void()>> overrides_;
};

struct Common {
    std::uint64_t seed = 1;
    std::size_t M = 100;
    int threads = 0;
    std::string out;
    bool paper_scale = false;
};

CLI::Option* add_common(Flags& flags, CLI::App* sub, Common& c, std::size_t desk_M, const std::string& provenance) {
    c.M = desk_M;
    flags.add("--seed", c.seed, "Base seed; sample i uses substream (seed, i)");
    auto* m = flags.add("--M", c.M, "Number of Monte Carlo samples [" + provenance + "]")->check(CLI::PositiveNumber);
    flags.add("--threads", c.threads, "Worker threads, 0 = all cores (results do not depend on it)");
    flags.add("--out", c.out, "Run directory (default: $ROUGHFEM_OUTPUT_ROOT/<subcommand>, root defaults to ./runs)");
    sub->add_flag("--paper-scale", c.paper_scale,
                  "Switch defaults to the full published resolutions; long-running (hours, several GB)");
    return m;
}

ExperimentConfig make_config(const Common& c, const std::string& name) {
    ExperimentConfig cfg;
    cfg.seed = c.seed;
    cfg.M = c.M;
    cfg.threads = c.threads;
    cfg.output_dir = c.out.empty() ? default_output_root() / name : fs::path(c.out);
    return cfg;
}

int report(const fs::path& dir, const std::vector<std::string>& required) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::cout << "wrote " << dir.string() << ":\n";
    for (const auto& f : files) std::cout << "  " << f.filename().string() << "\n";
    for (const auto& r : required)
        if (!fs::exists(dir / r)) {
            std::cerr << "error: missing artifact " << (dir / r).string() << "\n";
            return 1;
        }
    return 0;
}

const std::vector<std::string> run_files{"config.toml", "rows.csv", "summary.csv", "exclusions.csv"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo error estimation for elliptic problems with rough random coefficients"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_config("--config", "", "TOML file with flag values, one [subcommand] table per subcommand");
    app.require_subcommand(1);
    app.footer("Levels are integers: --h 10 means h = 2^-10.");

    // sample-field
    auto* sf = app.add_subcommand("sample-field", "Dump coefficient samples (Fig. 6 left: field; bridge/Wiener paths)");
    Flags sf_flags(sf);
    Common sf_c;
    std::string sf_kind = "field2d";
    int sf_level = 7;
    double sf_sigma2 = 1.0, sf_ell = 0.2;
    auto* sf_m = add_common(sf_flags, sf, sf_c, 1, "Fig. 6 left: one field");
    sf_flags.add("--kind", sf_kind, "field2d, bridge or wiener [Fig. 6 left / Figs. 3-5 paths]")
        ->check(CLI::IsMember({"field2d", "bridge", "wiener"}));
    auto* sf_lv = sf_flags.add("--level", sf_level, "Grid level: 2^level cells per side [Fig. 6 left]")->check(CLI::Range(1, 24));
    sf_flags.add("--sigma2", sf_sigma2, "Log-field variance [Fig. 6 left]")->check(CLI::PositiveNumber);
    sf_flags.add("--ell", sf_ell, "Correlation length of exp(-|x-y|/ell) [Fig. 6 left]")->check(CLI::PositiveNumber);
    sf_flags.paper(sf_lv, sf_level, 10);
    (void)sf_m;

    // galerkin-1d
    auto* g1 = app.add_subcommand("galerkin-1d", "Two-level estimator vs Galerkin error on bridge paths (Figs. 3-5)");
    Flags g1_flags(g1);
    Common g1_c;
    Galerkin1dParams g1_p;
    auto* g1_m = add_common(g1_flags, g1, g1_c, 200, "Fig. 4 histograms, Fig. 5 means");
    auto* g1_lo = g1_flags.add("--hmin", g1_p.h_min, "Coarsest level [Figs. 3-5]")->check(CLI::Range(1, 23));
    auto* g1_hi = g1_flags.add("--hmax", g1_p.h_max, "Finest level [Figs. 3-5; Fig. 4 uses 10 and 12]")->check(CLI::Range(1, 23));
    auto* g1_ref = g1_flags.add("--ref", g1_p.ref_level, "Reference and coefficient level [Fig. 4]")->check(CLI::Range(2, 24));
    g1_flags.add("--observable", g1_p.observable, "one, minus_one, cos or dirac [Figs. 3-5]")
        ->check(CLI::IsMember({"one", "minus_one", "cos", "dirac"}));
    g1_flags.add("--bins", g1_p.bins, "Histogram bins for C = |E|/E_est [Fig. 4]")->check(CLI::PositiveNumber);
    g1_flags.add("--cancel-threshold", g1_p.cancellation_threshold,
                 "Warn when mean|F~|/mean F falls below this [Fig. 5]");
    g1_flags.add("--C", g1_p.predicted_C, "Constant of the predicted error C*E_est [Fig. 5]");
    g1_flags.paper(g1_m, g1_c.M, std::size_t{10000});
    g1_flags.paper(g1_lo, g1_p.h_min, 5);
    g1_flags.paper(g1_hi, g1_p.h_max, 12);
    g1_flags.paper(g1_ref, g1_p.ref_level, 22);

    // frequency
    auto* fq = app.add_subcommand("frequency", "Fourier split of the residual-dual pairing (Figs. 1-2)");
    Flags fq_flags(fq);
    Common fq_c;
    FrequencyParams fq_p;
    add_common(fq_flags, fq, fq_c, 20, "Figs. 1-2 use one path; the mean deficit uses several");
    fq_flags.add("--h", fq_p.h_level, "Element level [Figs. 1-2]")->check(CLI::Range(1, 21));
    auto* fq_fine = fq_flags.add("--fine", fq_p.fine_level, "Quadrature/FFT level [Figs. 1-2]")->check(CLI::Range(4, 24));
    fq_flags.add("--observable", fq_p.observable, "one, minus_one, cos or dirac [Figs. 1-2]")
        ->check(CLI::IsMember({"one", "minus_one", "cos", "dirac"}));
    fq_flags.add("--coefficient", fq_p.coefficient, "bridge (lognormal) or smooth (1 + x) [Figs. 1-2]")
        ->check(CLI::IsMember({"bridge", "smooth"}));
    fq_flags.add("--nstar-factor", fq_p.n_star_factor, "Low/high split at n* = factor / h [Fig. 2]")
        ->check(CLI::PositiveNumber);
    fq_flags.add("--fit-lo", fq_p.fit_lo, "First mode of the decay fit, 0 = max(8, 1/h) [Fig. 1]");
    fq_flags.add("--fit-hi", fq_p.fit_hi, "Last mode of the decay fit, 0 = N/8 [Fig. 1]");
    fq_flags.paper(fq_fine, fq_p.fine_level, 24);

    // quadrature-1d
    auto* qd = app.add_subcommand("quadrature-1d", "Quadrature error estimator vs baseline (Fig. 7, Table 1)");
    Flags qd_flags(qd);
    Common qd_c;
    Quadrature1dParams qd_p;
    std::string qd_rule = "trapezoid";
    auto* qd_m = add_common(qd_flags, qd, qd_c, 256, "Table 1: M = 2^13");
    qd_flags.add("--rule", qd_rule, "midpoint, trapezoid or forward_euler [Table 1: trapezoid]")
        ->check(CLI::IsMember({"midpoint", "trapezoid", "forward_euler"}));
    qd_flags.add("--hmin", qd_p.h_min, "Coarsest level [Table 1 rows]")->check(CLI::Range(1, 22));
    qd_flags.add("--hmax", qd_p.h_max, "Finest level [Table 1 rows]")->check(CLI::Range(1, 22));
    qd_flags.add("--hstep", qd_p.h_step, "Level step between rows [Table 1: 2]")->check(CLI::PositiveNumber);
    qd_flags.add("--k-offsets", qd_p.k_offsets, "k = h 2^-offset for each offset [Fig. 7 k-sweep; Table 1: 0]");
    auto* qd_ref = qd_flags.add("--ref", qd_p.ref_level, "Near-exact quadrature level k~ [Table 1]")->check(CLI::Range(3, 24));
    qd_flags.add("--observable", qd_p.observable, "one, minus_one, cos or dirac [Table 1: one]")
        ->check(CLI::IsMember({"one", "minus_one", "cos", "dirac"}));
    qd_flags.paper(qd_m, qd_c.M, std::size_t{8192});
    qd_flags.paper(qd_ref, qd_p.ref_level, 24);

    // galerkin-2d
    auto* g2 = app.add_subcommand("galerkin-2d", "2D lognormal field: E_est and E_reg vs error (Fig. 6 right, Fig. 8)");
    Flags g2_flags(g2);
    Common g2_c;
    Galerkin2dParams g2_p;
    std::string g2_rule = "per_child";
    auto* g2_m = add_common(g2_flags, g2, g2_c, 20, "Fig. 8");
    auto* g2_fl = g2_flags.add("--field-level", g2_p.field_level, "Field grid level [Fig. 6]")->check(CLI::Range(2, 12));
    g2_flags.add("--sigma2", g2_p.sigma2, "Log-field variance [Fig. 6]")->check(CLI::PositiveNumber);
    g2_flags.add("--ell", g2_p.ell, "Correlation length [Fig. 6]")->check(CLI::PositiveNumber);
    auto* g2_ref = g2_flags.add("--ref", g2_p.ref_level, "Reference mesh level [Fig. 8]")->check(CLI::Range(2, 12));
    g2_flags.add("--hmin", g2_p.h_min, "Coarsest level [Fig. 8]")->check(CLI::Range(1, 11));
    auto* g2_hi = g2_flags.add("--hmax", g2_p.h_max, "Finest level [Fig. 8]")->check(CLI::Range(1, 11));
    g2_flags.add("--coefficient", g2_p.coefficient, "lognormal, smooth or constant [Fig. 6 right / Fig. 8]")
        ->check(CLI::IsMember({"lognormal", "smooth", "constant"}));
    g2_flags.add("--child-rule", g2_rule, "per_child or averaged gradients in E_est [Fig. 8]")
        ->check(CLI::IsMember({"per_child", "averaged"}));
    g2_flags.paper(g2_m, g2_c.M, std::size_t{100});
    g2_flags.paper(g2_fl, g2_p.field_level, 12);
    g2_flags.paper(g2_ref, g2_p.ref_level, 10);
    g2_flags.paper(g2_hi, g2_p.h_max, 8);

    // expected-rate
    auto* er = app.add_subcommand("expected-rate", "Scaled expected Galerkin error for a = exp(W) (limit of h^-1 E)");
    Flags er_flags(er);
    Common er_c;
    ExpectedRateParams er_p;
    auto* er_m = add_common(er_flags, er, er_c, 500, "expected-error limit");
    er_flags.add("--hmin", er_p.h_min, "Coarsest level")->check(CLI::Range(1, 23));
    auto* er_hi = er_flags.add("--hmax", er_p.h_max, "Finest level")->check(CLI::Range(1, 23));
    auto* er_fine = er_flags.add("--fine", er_p.fine_level, "Wiener sample level")->check(CLI::Range(2, 24));
    er_flags.paper(er_m, er_c.M, std::size_t{10000});
    er_flags.paper(er_hi, er_p.h_max, 12);
    er_flags.paper(er_fine, er_p.fine_level, 22);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sf->parsed()) {
            if (sf_c.paper_scale) sf_flags.apply_paper_scale();
            sf_flags.print(std::cout);
            auto cfg = make_config(sf_c, "sample-field");
            cfg.kind = "sample-field";
            cfg.set("field_kind", sf_kind);
            cfg.set("level", sf_level);
            fs::create_directories(cfg.output_dir);
            if (sf_kind == "field2d") {
                if (sf_level > 12) throw std::invalid_argument("--level: a 2D field is limited to level 12");
                cfg.set("sigma2", sf_sigma2);
                cfg.set("ell", sf_ell);
                CirculantEmbedding emb(1 << sf_level, sf_sigma2, sf_ell);
                cfg.set("padding", emb.padding());
                for (std::size_t i = 0; i < sf_c.M; ++i) {
                    RngStream rng(sf_c.seed, i);
                    write_field_csv(emb.sample(rng), cfg.output_dir / ("field_" + std::to_string(i) + ".csv"));
                }
            } else {
                for (std::size_t i = 0; i < sf_c.M; ++i) {
                    RngStream rng(sf_c.seed, i);
                    const auto p = sf_kind == "bridge" ? sample_brownian_bridge(sf_level, rng) : sample_wiener(sf_level, rng);
                    write_path_csv(p, cfg.output_dir / ("path_" + std::to_string(i) + ".csv"));
                }
            }
            std::ofstream(cfg.output_dir / "config.toml") << config_toml(cfg);
            return report(cfg.output_dir, {"config.toml"});
        }
        if (g1->parsed()) {
            if (g1_c.paper_scale) g1_flags.apply_paper_scale();
            g1_flags.print(std::cout);
            const auto cfg = make_config(g1_c, "galerkin-1d");
            const auto res = run_galerkin_1d(cfg, g1_p);
            for (std::size_t i = 0; i < res.ratios.size(); ++i)
                std::cout << "h=2^-" << g1_p.h_min + static_cast<int>(i) << ": mean C = " << res.ratios[i].stats.mean
                          << " (sigma " << res.ratios[i].stats.sigma_s << ", excluded " << res.ratios[i].excluded
                          << ")\n";
            std::cout << "rate of mean |E|: " << res.error_rate.slope << ", of mean E_est: " << res.estimator_rate.slope
                      << "\n";
            for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
            auto files = run_files;
            files.insert(files.end(), {"ratio_summary.csv", "rates.csv", "fit.csv"});
            return report(cfg.output_dir, files);
        }
        if (fq->parsed()) {
            if (fq_c.paper_scale) fq_flags.apply_paper_scale();
            fq_flags.print(std::cout);
            const auto cfg = make_config(fq_c, "frequency");
            const auto res = run_frequency(cfg, fq_p);
            const auto* deficit = res.record.find({}, "deficit");
            const auto* exponent = res.record.find({}, "exponent");
            std::cout << "decay exponent (first path): " << res.fit.exponent << " on n in [" << res.fit.n_lo << ", "
                      << res.fit.n_hi << "]\n";
            if (exponent) std::cout << "decay exponent (mean): " << exponent->stats.mean << "\n";
            if (deficit) std::cout << "mean |E_L - E| / |E|: " << deficit->stats.mean << "\n";
            auto files = run_files;
            files.insert(files.end(), {"modes.csv", "fit.csv"});
            return report(cfg.output_dir, files);
        }
        if (qd->parsed()) {
            if (qd_c.paper_scale) qd_flags.apply_paper_scale();
            qd_p.rule = parse_quad_rule(qd_rule);
            qd_flags.print(std::cout);
            const auto cfg = make_config(qd_c, "quadrature-1d");
            const auto res = run_quadrature_1d(cfg, qd_p);
            std::cout << "log2h log2k Q_hat sigma_M Qcal_hat sigma_M_ref\n";
            for (const auto& r : res.table)
                std::cout << r.log2h << " " << r.log2k << " " << r.Q.mean << " " << r.Q.sigma_M << " " << r.Qcal.mean
                          << " " << r.Qcal.sigma_M << "\n";
            for (const auto& [L, f] : res.gamma)
                std::cout << "h=2^-" << L << ": gamma = " << f.gamma << (f.sign_consistent ? "" : " (sign change)")
                          << "\n";
            auto files = run_files;
            files.push_back("table.csv");
            return report(cfg.output_dir, files);
        }
        if (g2->parsed()) {
            if (g2_c.paper_scale) g2_flags.apply_paper_scale();
            g2_p.child_rule = g2_rule == "averaged" ? ChildRule::averaged : ChildRule::per_child;
            g2_flags.print(std::cout);
            const auto cfg = make_config(g2_c, "galerkin-2d");
            const auto res = run_galerkin_2d(cfg, g2_p);
            if (res.padding > 0) std::cout << "circulant padding factor: " << res.padding << "\n";
            for (int L = g2_p.h_min; L <= g2_p.h_max; ++L) {
                const auto* r = res.record.find({static_cast<double>(L)}, "ratio");
                const auto* E = res.record.find({static_cast<double>(L)}, "E_h");
                std::cout << "h=2^-" << L << ": mean E = " << E->stats.mean << ", mean E/E_est = " << r->stats.mean
                          << "\n";
            }
            return report(cfg.output_dir, run_files);
        }
        if (er->parsed()) {
            if (er_c.paper_scale) er_flags.apply_paper_scale();
            er_flags.print(std::cout);
            const auto cfg = make_config(er_c, "expected-rate");
            const auto res = run_expected_rate(cfg, er_p);
            std::cout << "limit: " << res.limit << "\n";
            for (int L = er_p.h_min; L <= er_p.h_max; ++L) {
                const auto* s = res.record.find({static_cast<double>(L)}, "E_scaled");
                std::cout << "h=2^-" << L << ": mean E/h = " << s->stats.mean << " +- " << s->stats.sigma_M << "\n";
            }
            return report(cfg.output_dir, run_files);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
