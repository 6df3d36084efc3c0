#include "surveylm/reference.hpp"

#include <algorithm>
#include <set>

#include "surveylm/csv.hpp"

namespace surveylm {

int ReferenceTable::column_index(std::string_view id) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == id) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> ReferenceTable::subgroup_values() const {
    std::set<std::string> values(subgroups.begin(), subgroups.end());
    return {values.begin(), values.end()};
}

namespace {

std::string bin_code_for_cell(const Question& q, const std::string& cell, long row_no) {
    // Numeric-binned columns accept raw numbers and map them to bin codes;
    // cells that already hold a valid code pass through.
    if (q.index_of_code(cell) >= 0) return cell;
    try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos == cell.size()) {
            int b = bin_index(v, q.bin_edges);
            if (b < 0) {
                throw ParseError("reference table: row " + std::to_string(row_no) + " value " + cell +
                                 " outside the bins of '" + q.id + "'");
            }
            return q.answers[static_cast<std::size_t>(b)].code;
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        // fall through to the invalid-code error
    }
    throw ParseError("reference table: row " + std::to_string(row_no) + " has invalid code '" + cell +
                     "' for '" + q.id + "'");
}

}  // namespace

ReferenceTable ReferenceTable::load_csv(const std::filesystem::path& path,
                                        const Questionnaire* questionnaire,
                                        std::string subgroup_column) {
    csv::Table raw = csv::read_file(path);
    ReferenceTable t;
    int weight_col = -1, subgroup_col = -1;
    for (std::size_t i = 0; i < raw.header.size(); ++i) {
        if (raw.header[i] == kWeightColumn) {
            weight_col = static_cast<int>(i);
        } else if (raw.header[i] == subgroup_column) {
            subgroup_col = static_cast<int>(i);
        } else {
            t.columns.push_back(raw.header[i]);
        }
    }
    std::vector<const Question*> question_for_col(t.columns.size(), nullptr);
    if (questionnaire) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            question_for_col[c] = questionnaire->find(t.columns[c]);
            if (!question_for_col[c]) {
                throw ParseError("reference table: column '" + t.columns[c] +
                                 "' is not a questionnaire question");
            }
        }
    }
    long row_no = 0;
    for (const auto& raw_row : raw.rows) {
        ++row_no;
        std::vector<std::string> row;
        row.reserve(t.columns.size());
        std::size_t out_col = 0;
        for (std::size_t i = 0; i < raw_row.size(); ++i) {
            if (static_cast<int>(i) == weight_col) {
                double w = 0;
                try {
                    w = std::stod(raw_row[i]);
                } catch (const std::exception&) {
                    throw ParseError("reference table: row " + std::to_string(row_no) +
                                     " has non-numeric weight");
                }
                if (!(w > 0)) {
                    throw ParseError("reference table: row " + std::to_string(row_no) +
                                     " has non-positive weight");
                }
                t.weights.push_back(w);
                continue;
            }
            if (static_cast<int>(i) == subgroup_col) {
                t.subgroups.push_back(raw_row[i]);
                continue;
            }
            std::string cell = raw_row[i];
            const Question* q = question_for_col[out_col];
            if (q && cell != kMissing) cell = bin_code_for_cell(*q, cell, row_no);
            row.push_back(std::move(cell));
            ++out_col;
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void ReferenceTable::save_csv(const std::filesystem::path& path) const {
    csv::Table out;
    out.header = columns;
    if (has_weights()) out.header.push_back(kWeightColumn);
    if (has_subgroups()) out.header.push_back(kSubgroupColumn);
    out.rows.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<std::string> row = rows[r];
        if (has_weights()) row.push_back(csv::format_double(weights[r]));
        if (has_subgroups()) row.push_back(subgroups[r]);
        out.rows.push_back(std::move(row));
    }
    csv::write_file(path, out);
}

ReferenceTable ReferenceTable::filter_subgroup(std::string_view value) const {
    if (!has_subgroups()) throw Error("reference table: no subgroup column");
    ReferenceTable out;
    out.columns = columns;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (subgroups[r] == value) {
            out.rows.push_back(rows[r]);
            if (has_weights()) out.weights.push_back(weights[r]);
            out.subgroups.push_back(subgroups[r]);
        }
    }
    return out;
}

ReferenceTable ReferenceTable::filter_not_subgroup(std::string_view value) const {
    if (!has_subgroups()) throw Error("reference table: no subgroup column");
    ReferenceTable out;
    out.columns = columns;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (subgroups[r] != value) {
            out.rows.push_back(rows[r]);
            if (has_weights()) out.weights.push_back(weights[r]);
            out.subgroups.push_back(subgroups[r]);
        }
    }
    return out;
}

ResponseDistribution marginal_distribution(const ReferenceTable& table, const Question& question,
                                           const MarginalOptions& options) {
    int col = table.column_index(question.id);
    if (col < 0) throw Error("marginal: table has no column '" + question.id + "'");
    if (options.subgroup && !table.has_subgroups()) {
        throw Error("marginal: subgroup filter on a table without subgroups");
    }
    if (options.weighted && !table.has_weights()) {
        throw Error("marginal: weighted mode on a table without weights");
    }
    std::vector<double> mass(question.answers.size(), 0.0);
    double total = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (options.subgroup && table.subgroups[r] != *options.subgroup) continue;
        const std::string& cell = table.rows[r][static_cast<std::size_t>(col)];
        if (cell == ReferenceTable::kMissing) continue;
        int idx = question.index_of_code(cell);
        if (idx < 0) {
            throw Error("marginal: row " + std::to_string(r + 1) + " has invalid code '" + cell +
                        "' for '" + question.id + "'");
        }
        double w = options.weighted ? table.weights[r] : 1.0;
        mass[static_cast<std::size_t>(idx)] += w;
        total += w;
    }
    if (total <= 0) {
        throw Error("marginal: no usable rows for '" + question.id +
                    (options.subgroup ? "' in subgroup '" + *options.subgroup + "'" : "'"));
    }
    ResponseDistribution d;
    d.question_id = question.id;
    d.provenance = Provenance::Reference;
    d.probs.resize(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) d.probs[i] = mass[i] / total;
    return d;
}

}  // namespace surveylm
