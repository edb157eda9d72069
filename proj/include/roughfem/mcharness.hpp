#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "roughfem/rng.hpp"
#include "roughfem/stats.hpp"

namespace roughfem {

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 1;
    std::size_t M = 100;
    int threads = 0;                   ///< 0 = all cores; does not affect results
    std::filesystem::path output_dir;  ///< empty = keep results in memory only
    /// Experiment parameters in insertion order, snapshotted to config.toml.
    std::vector<std::pair<std::string, std::string>> params;

    template <class T>
    void set(const std::string& key, const T& value) {
        std::ostringstream os;
        os << value;
        params.emplace_back(key, os.str());
    }
};

struct Exclusion {
    std::size_t sample = 0;
    std::string reason;
};

/// Statistics of one quantity within one group of rows.
struct SummaryRow {
    std::vector<double> group;  ///< values of the group columns
    std::string quantity;
    SampleStats stats;
    std::size_t excluded_values = 0;  ///< non-finite entries left out
};

struct RunRecord {
    ExperimentConfig config;
    std::vector<std::string> columns;        ///< "sample" first
    std::vector<std::string> group_columns;  ///< subset of columns used to group summaries
    std::vector<std::vector<double>> rows;   ///< ordered by sample index, then emission order
    std::vector<Exclusion> exclusions;
    std::size_t completed_samples = 0;
    std::vector<SummaryRow> summary;
    double wall_seconds = 0.0;

    const SummaryRow* find(const std::vector<double>& group, const std::string& quantity) const;
    std::size_t column(const std::string& name) const;
};

/// One sample pipeline. Returns the rows it produces (without the sample column).
/// Throwing marks the sample as failed.
using SampleFn = std::function<std::vector<std::vector<double>>(std::size_t index, RngStream& rng)>;

/// Runs config.M samples on substreams (config.seed, index), collects rows in index
/// order and summarises every non-group column per group. Throws if more than 1% of
/// samples fail. Writes the run directory when config.output_dir is set.
RunRecord run_experiment(const ExperimentConfig& config, std::vector<std::string> columns,
                         std::vector<std::string> group_columns, const SampleFn& fn);

/// Recomputes summaries from rows; run_experiment uses the same routine.
std::vector<SummaryRow> summarize(const std::vector<std::string>& columns,
                                  const std::vector<std::string>& group_columns,
                                  const std::vector<std::vector<double>>& rows);

/// config.toml, rows.csv, summary.csv, exclusions.csv and timing.txt.
void write_run(const RunRecord& record, const std::filesystem::path& dir);

/// TOML snapshot of a configuration (kind, seed, M and params). The worker count and
/// output path are left out so identical runs produce identical bytes.
std::string config_toml(const ExperimentConfig& config);

}  // namespace roughfem
