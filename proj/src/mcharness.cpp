#include "roughfem/mcharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>

#include "roughfem/csv.hpp"
#include "roughfem/parallel.hpp"

namespace roughfem {

const SummaryRow* RunRecord::find(const std::vector<double>& group, const std::string& quantity) const {
    for (const auto& s : summary)
        if (s.group == group && s.quantity == quantity) return &s;
    return nullptr;
}

std::size_t RunRecord::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("RunRecord: no column " + name);
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<SummaryRow> summarize(const std::vector<std::string>& columns,
                                  const std::vector<std::string>& group_columns,
                                  const std::vector<std::vector<double>>& rows) {
    std::vector<std::size_t> gidx;
    for (const auto& g : group_columns) {
        const auto it = std::find(columns.begin(), columns.end(), g);
        if (it == columns.end()) throw std::invalid_argument("summarize: unknown group column " + g);
        gidx.push_back(static_cast<std::size_t>(it - columns.begin()));
    }
    // Groups in order of first appearance; values per quantity in row order.
    std::vector<std::vector<double>> keys;
    std::map<std::vector<double>, std::vector<std::size_t>> members;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<double> key;
        for (auto i : gidx) key.push_back(rows[r][i]);
        auto [it, inserted] = members.try_emplace(key);
        if (inserted) keys.push_back(key);
        it->second.push_back(r);
    }
    std::vector<SummaryRow> out;
    for (const auto& key : keys) {
        const auto& rs = members[key];
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c] == "sample" || std::find(gidx.begin(), gidx.end(), c) != gidx.end()) continue;
            SummaryRow s;
            s.group = key;
            s.quantity = columns[c];
            std::vector<double> vals;
            for (auto r : rs) {
                if (std::isfinite(rows[r][c]))
                    vals.push_back(rows[r][c]);
                else
                    ++s.excluded_values;
            }
            if (vals.size() >= 2) {
                s.stats = sample_stats(vals);
            } else {
                s.stats.count = vals.size();
                s.stats.mean = vals.empty() ? std::nan("") : vals[0];
                s.stats.sigma_s = s.stats.sigma_M = std::nan("");
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

RunRecord run_experiment(const ExperimentConfig& config, std::vector<std::string> columns,
                         std::vector<std::string> group_columns, const SampleFn& fn) {
    if (config.M < 1) throw std::invalid_argument("run_experiment: M must be positive");
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::vector<std::vector<double>>> per_sample(config.M);
    std::vector<std::optional<std::string>> failure(config.M);
    parallel_for(config.M, config.threads, [&](std::size_t i) {
        RngStream rng(config.seed, i);
        try {
            per_sample[i] = fn(i, rng);
        } catch (const std::exception& e) {
            failure[i] = e.what();
        }
    });

    RunRecord rec;
    rec.config = config;
    rec.columns = {"sample"};
    rec.columns.insert(rec.columns.end(), columns.begin(), columns.end());
    rec.group_columns = std::move(group_columns);
    for (std::size_t i = 0; i < config.M; ++i) {
        if (failure[i]) {
            rec.exclusions.push_back({i, *failure[i]});
            continue;
        }
        ++rec.completed_samples;
        for (auto& row : per_sample[i]) {
            if (row.size() != columns.size()) throw std::logic_error("run_experiment: row width mismatch");
            std::vector<double> full{static_cast<double>(i)};
            full.insert(full.end(), row.begin(), row.end());
            rec.rows.push_back(std::move(full));
        }
    }
    rec.summary = summarize(rec.columns, rec.group_columns, rec.rows);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!config.output_dir.empty()) write_run(rec, config.output_dir);
    if (static_cast<double>(rec.exclusions.size()) > 0.01 * static_cast<double>(config.M))
        throw std::runtime_error("run_experiment: " + std::to_string(rec.exclusions.size()) + " of " +
                                 std::to_string(config.M) + " samples failed; first: " + rec.exclusions.front().reason);
    return rec;
}

std::string config_toml(const ExperimentConfig& config) {
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    };
    auto value = [&](const std::string& v) {
        // Bare numbers and booleans stay unquoted.
        if (v == "true" || v == "false") return v;
        char* end = nullptr;
        std::strtod(v.c_str(), &end);
        if (!v.empty() && end == v.c_str() + v.size() && v.find_first_of("nN") == std::string::npos) return v;
        return quote(v);
    };
    std::ostringstream os;
    os << "kind = " << quote(config.kind) << "\n";
    os << "seed = " << config.seed << "\n";
    os << "M = " << config.M << "\n";
    for (const auto& [k, v] : config.params) os << k << " = " << value(v) << "\n";
    return os.str();
}

void write_run(const RunRecord& record, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "config.toml");
        out << config_toml(record.config);
        if (!out) throw std::runtime_error("cannot write config.toml");
    }
    {
        CsvWriter csv(dir / "rows.csv", record.columns);
        for (const auto& row : record.rows) {
            csv.cell(static_cast<long long>(row[0]));
            for (std::size_t c = 1; c < row.size(); ++c) csv.cell(row[c]);
            csv.end_row();
        }
    }
    {
        std::vector<std::string> header = record.group_columns;
        header.insert(header.end(), {"quantity", "mean", "sigma_s", "sigma_M", "count"});
        CsvWriter csv(dir / "summary.csv", header);
        for (const auto& s : record.summary) {
            for (double g : s.group) csv.cell(g);
            csv.cell(std::string_view(s.quantity))
                .cell(s.stats.mean)
                .cell(s.stats.sigma_s)
                .cell(s.stats.sigma_M)
                .cell(static_cast<long long>(s.stats.count));
            csv.end_row();
        }
    }
    {
        CsvWriter csv(dir / "exclusions.csv", {"sample", "reason"});
        for (const auto& e : record.exclusions) {
            std::string reason = e.reason;
            std::replace(reason.begin(), reason.end(), ',', ';');
            std::replace(reason.begin(), reason.end(), '\n', ' ');
            csv.cell(static_cast<long long>(e.sample)).cell(std::string_view(reason));
            csv.end_row();
        }
    }
    std::ofstream(dir / "timing.txt") << "wall_seconds = " << record.wall_seconds << "\n";
}

}  // namespace roughfem
