#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surveylm/questionnaire.hpp"
#include "surveylm/stats.hpp"

namespace surveylm {

/// Tabular categorical reference data (census microdata and synthetic
/// datasets share this form). Optional WEIGHT and SUBGROUP columns are parsed
/// out of the CSV and held separately from the answer columns.
struct ReferenceTable {
    static constexpr const char* kMissing = "NA";
    static constexpr const char* kWeightColumn = "WEIGHT";
    static constexpr const char* kSubgroupColumn = "SUBGROUP";

    std::vector<std::string> columns;              // question ids
    std::vector<std::vector<std::string>> rows;    // answer codes (kMissing allowed)
    std::vector<double> weights;                   // empty when absent
    std::vector<std::string> subgroups;            // empty when absent

    long row_count() const { return static_cast<long>(rows.size()); }
    int column_index(std::string_view id) const;
    bool has_weights() const { return !weights.empty(); }
    bool has_subgroups() const { return !subgroups.empty(); }
    std::vector<std::string> subgroup_values() const;  // sorted unique

    /// Validates every cell against the questionnaire. Cells in columns with
    /// declared numeric binning are converted from raw numbers to bin codes.
    static ReferenceTable load_csv(const std::filesystem::path& path,
                                   const Questionnaire* questionnaire = nullptr,
                                   std::string subgroup_column = kSubgroupColumn);
    void save_csv(const std::filesystem::path& path) const;

    ReferenceTable filter_subgroup(std::string_view value) const;
    ReferenceTable filter_not_subgroup(std::string_view value) const;
};

struct MarginalOptions {
    std::optional<std::string> subgroup;  // restrict to one subgroup value
    bool weighted = false;                // honor the WEIGHT column
};

/// (Weighted) relative frequency of each answer code; missing cells are
/// excluded from the denominator. Errors when the filter leaves no usable rows.
ResponseDistribution marginal_distribution(const ReferenceTable& table, const Question& question,
                                           const MarginalOptions& options = {});

}  // namespace surveylm
