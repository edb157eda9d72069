#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughfem/experiments.hpp"
#include "roughfem/mcharness.hpp"

using namespace roughfem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("roughfem_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        out.push_back(cells);
    }
    return out;
}

SampleFn normal_pair = [](std::size_t, RngStream& rng) {
    return std::vector<std::vector<double>>{{0.0, rng.normal()}, {1.0, rng.normal() + 1.0}};
};

}  // namespace

TEST_CASE("sample statistics") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = sample_stats(v);
    CHECK(s.mean == 2.5);
    CHECK(s.sigma_s == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.sigma_M == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(s.count == 4);
    CHECK_THROWS(sample_stats(std::vector<double>{1.0}));
    const auto c = sample_stats(std::vector<double>(10, 7.0));
    CHECK(c.sigma_s == 0.0);
}

TEST_CASE("standard normal Monte Carlo error") {
    ExperimentConfig cfg;
    cfg.M = 10000;
    cfg.seed = 3;
    const auto rec = run_experiment(cfg, {"g", "z"}, {"g"}, normal_pair);
    const auto* z0 = rec.find({0.0}, "z");
    const auto* z1 = rec.find({1.0}, "z");
    REQUIRE(z0);
    REQUIRE(z1);
    CHECK(z0->stats.count == 10000);
    CHECK(z0->stats.sigma_M == doctest::Approx(0.01).epsilon(0.05));
    CHECK(std::abs(z0->stats.mean) < 4.0 * z0->stats.sigma_M);
    CHECK(std::abs(z1->stats.mean - 1.0) < 4.0 * z1->stats.sigma_M);
    CHECK(rec.find({2.0}, "z") == nullptr);
}

TEST_CASE("runs are reproducible and independent of the worker count") {
    const auto d1 = scratch("rep1"), d2 = scratch("rep2"), d3 = scratch("rep3");
    ExperimentConfig cfg;
    cfg.M = 257;
    cfg.seed = 11;
    cfg.set("label", "demo");
    cfg.threads = 1;
    cfg.output_dir = d1;
    run_experiment(cfg, {"g", "z"}, {"g"}, normal_pair);
    cfg.output_dir = d2;
    run_experiment(cfg, {"g", "z"}, {"g"}, normal_pair);
    cfg.threads = 4;
    cfg.output_dir = d3;
    run_experiment(cfg, {"g", "z"}, {"g"}, normal_pair);
    for (const char* f : {"config.toml", "rows.csv", "summary.csv", "exclusions.csv"}) {
        CAPTURE(f);
        CHECK(slurp(d1 / f) == slurp(d2 / f));
        CHECK(slurp(d1 / f) == slurp(d3 / f));
    }
    CHECK(fs::exists(d1 / "timing.txt"));
    const auto toml = slurp(d1 / "config.toml");
    CHECK(toml.find("kind = ") != std::string::npos);
    CHECK(toml.find("seed = 11") != std::string::npos);
    CHECK(toml.find("M = 257") != std::string::npos);
    CHECK(toml.find("label = \"demo\"") != std::string::npos);
    CHECK(toml.find("threads") == std::string::npos);
}

TEST_CASE("summaries can be recomputed from rows.csv") {
    const auto dir = scratch("recompute");
    ExperimentConfig cfg;
    cfg.M = 50;
    cfg.output_dir = dir;
    const auto rec = run_experiment(cfg, {"g", "z"}, {"g"}, normal_pair);
    const auto rows = read_csv(dir / "rows.csv");
    REQUIRE(rows.size() == 101);
    CHECK(rows[0] == std::vector<std::string>{"sample", "g", "z"});
    std::vector<std::vector<double>> parsed;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::vector<double> row;
        for (const auto& c : rows[r]) row.push_back(std::stod(c));
        parsed.push_back(row);
    }
    const auto again = summarize(rec.columns, rec.group_columns, parsed);
    REQUIRE(again.size() == rec.summary.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].stats.mean == rec.summary[i].stats.mean);
        CHECK(again[i].stats.sigma_M == rec.summary[i].stats.sigma_M);
    }
    const auto summary = read_csv(dir / "summary.csv");
    CHECK(summary[0] == std::vector<std::string>{"g", "quantity", "mean", "sigma_s", "sigma_M", "count"});
    CHECK(summary.size() == 3);
}

TEST_CASE("failures and non-finite values are accounted for") {
    ExperimentConfig cfg;
    cfg.M = 200;
    SUBCASE("one failure in 200 is tolerated and logged") {
        const auto dir = scratch("fail_ok");
        cfg.output_dir = dir;
        const auto rec = run_experiment(cfg, {"x"}, {}, [](std::size_t i, RngStream&) {
            if (i == 17) throw std::runtime_error("singular, sample 17");
            return std::vector<std::vector<double>>{{i == 3 ? std::nan("") : double(i)}};
        });
        CHECK(rec.completed_samples == 199);
        REQUIRE(rec.exclusions.size() == 1);
        CHECK(rec.exclusions[0].sample == 17);
        CHECK(rec.find({}, "x")->excluded_values == 1);
        CHECK(rec.find({}, "x")->stats.count == 198);
        const auto ex = read_csv(dir / "exclusions.csv");
        REQUIRE(ex.size() == 2);
        CHECK(ex[1][0] == "17");
        CHECK(ex[1][1] == "singular; sample 17");
    }
    SUBCASE("more than 1% failures abort") {
        CHECK_THROWS_AS(run_experiment(cfg, {"x"}, {},
                                       [](std::size_t i, RngStream&) {
                                           if (i % 50 == 0) throw std::runtime_error("bad");
                                           return std::vector<std::vector<double>>{{1.0}};
                                       }),
                        std::runtime_error);
    }
    SUBCASE("row width is checked") {
        CHECK_THROWS_AS(run_experiment(cfg, {"x", "y"}, {},
                                       [](std::size_t, RngStream&) { return std::vector<std::vector<double>>{{1.0}}; }),
                        std::logic_error);
    }
}

TEST_CASE("substreams follow the sample index") {
    ExperimentConfig cfg;
    cfg.M = 5;
    cfg.seed = 8;
    const auto rec = run_experiment(cfg, {"u"}, {}, [](std::size_t, RngStream& rng) {
        return std::vector<std::vector<double>>{{rng.uniform()}};
    });
    for (std::size_t i = 0; i < 5; ++i) {
        RngStream rng(8, i);
        CHECK(rec.rows[i][1] == rng.uniform());
    }
}

TEST_CASE("small galerkin-1d run") {
    const auto dir = scratch("g1d");
    ExperimentConfig cfg;
    cfg.M = 100;
    cfg.seed = 5;
    cfg.output_dir = dir;
    Galerkin1dParams p;
    p.h_min = 6;
    p.h_max = 8;
    p.ref_level = 13;
    const auto res = run_galerkin_1d(cfg, p);
    REQUIRE(res.ratios.size() == 3);
    for (const auto& r : res.ratios) {
        CHECK(r.stats.mean > 1.2);
        CHECK(r.stats.mean < 3.0);
    }
    CHECK(res.error_rate.slope == doctest::Approx(1.0).epsilon(0.3));
    CHECK(res.warnings.empty());
    for (const char* f : {"histogram_h6.csv", "ratio_summary.csv", "rates.csv", "fit.csv", "rows.csv"})
        CHECK(fs::exists(dir / f));
    const auto& rows = res.record.rows;
    const auto iE = res.record.column("F_abs"), iEst = res.record.column("E_est");
    for (const auto& row : rows) CHECK(std::abs(row[iE] - row[iEst]) <= 1e-12 * row[iEst]);

    p.observable = "cos";
    cfg.output_dir.clear();
    CHECK_FALSE(run_galerkin_1d(cfg, p).warnings.empty());
}

TEST_CASE("expected rate") {
    const double closed = (4.0 * std::exp(0.5) - 6.0) / 6.0;
    CHECK(expected_galerkin_limit(Observable::constant(-1.0)) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(closed == doctest::Approx(0.0991475).epsilon(1e-6));

    ExperimentConfig cfg;
    cfg.M = 200;
    ExpectedRateParams p;
    p.h_min = 5;
    p.h_max = 8;
    p.fine_level = 13;
    const auto res = run_expected_rate(cfg, p);
    CHECK(res.limit == doctest::Approx(closed).epsilon(1e-12));
    const auto iE = res.record.column("E"), iEg = res.record.column("E_g"), iS = res.record.column("path_slope");
    std::vector<double> slopes;
    for (const auto& row : res.record.rows) {
        CHECK(std::abs(row[iE] + row[iEg]) <= 1e-10 * std::abs(row[iE]));
        if (std::isfinite(row[iS])) slopes.push_back(row[iS]);
    }
    CHECK(slopes.size() == 200);
    CHECK(sample_stats(slopes).mean >= 0.7);
    const auto* scaled = res.record.find({8.0}, "E_scaled");
    CHECK(std::abs(scaled->stats.mean - closed) <= std::max(4.0 * scaled->stats.sigma_M, 0.2 * closed));
}
