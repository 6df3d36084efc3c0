#include "surveylm/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "surveylm/error.hpp"

namespace surveylm::csv {

namespace {

// RFC 4180 field scanner over a whole document so quoted newlines work.
std::vector<std::vector<std::string>> parse_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) throw ParseError("csv: quote inside unquoted field");
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
                break;
        }
    }
    if (in_quotes) throw ParseError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !fields.empty()) end_record();
    return records;
}

}  // namespace

Table read(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    auto records = parse_records(buf.str());
    if (records.empty()) throw ParseError("csv: empty document");
    Table t;
    t.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != t.header.size()) {
            throw ParseError("csv: row " + std::to_string(i) + " has " +
                             std::to_string(records[i].size()) + " fields, header has " +
                             std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(records[i]));
    }
    return t;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("csv: cannot open " + path.string());
    return read(in);
}

std::string escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

void write(std::ostream& out, const Table& table) {
    write_row(out, table.header);
    for (const auto& row : table.rows) write_row(out, row);
}

void write_file(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("csv: cannot write " + path.string());
    write(out, table);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace surveylm::csv
