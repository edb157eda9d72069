#include "roughfem/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace roughfem {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (const auto& h : header) cell(std::string_view(h));
    end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::string_view v) {
    if (!first_) out_ << ',';
    out_ << v;
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
    if (!out_) throw std::runtime_error("csv write failed");
}

}  // namespace roughfem
