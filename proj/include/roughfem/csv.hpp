#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace roughfem {

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(std::string_view v);
    void end_row();

private:
    std::ofstream out_;
    bool first_ = true;
};

}  // namespace roughfem
