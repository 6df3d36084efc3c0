#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace surveylm::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);
void write(std::ostream& out, const Table& table);
void write_file(const std::filesystem::path& path, const Table& table);

/// Stable numeric formatting for report cells ("%.12g").
std::string format_double(double v);

}  // namespace surveylm::csv
