#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surveylm/error.hpp"

namespace surveylm {

struct AnswerOption {
    std::string code;  // canonical value code, matches reference-data cells
    std::string text;  // display string

    bool operator==(const AnswerOption&) const = default;
};

enum class QuestionKind { Nominal, Ordinal };

/// Gate on a prior question's answer; questions default to ask-all.
struct AskIf {
    std::string question_id;
    std::vector<std::string> any_of;

    bool operator==(const AskIf&) const = default;
};

struct Question {
    std::string id;    // short variable code, e.g. "SEX"
    std::string text;  // full question string
    QuestionKind kind = QuestionKind::Nominal;
    std::vector<AnswerOption> answers;
    std::vector<double> bin_edges;  // nonempty iff answers are numeric bins
    std::optional<AskIf> ask_if;

    int option_count() const { return static_cast<int>(answers.size()); }

    /// Index of an answer code, or -1.
    int index_of_code(std::string_view code) const;

    bool operator==(const Question&) const = default;
};

struct Questionnaire {
    std::string name;
    std::string notes;  // free-form, round-trips through serialization
    std::vector<Question> questions;

    const Question* find(std::string_view id) const;
    int index_of(std::string_view id) const;

    bool operator==(const Questionnaire&) const = default;
};

/// Parses and validates a questionnaire from its JSON document form.
/// Rejects on any invariant violation (duplicate ids, fewer than 2 answers,
/// ordinal questions whose numeric codes are out of order, ...).
Questionnaire parse_questionnaire(std::string_view json_text);
Questionnaire load_questionnaire(const std::filesystem::path& path);
std::string serialize_questionnaire(const Questionnaire& q);

/// Bin index of value under half-open bins [e_i, e_{i+1}); -1 if out of range.
int bin_index(double value, std::span<const double> edges);

struct BinnedOption {
    AnswerOption option;
    long count = 0;
};

/// Buckets numeric values into half-open bins with range labels. Edges must be
/// strictly ascending; out-of-range values raise a diagnostic naming the value.
std::vector<BinnedOption> bin_numeric(std::span<const double> values, std::span<const double> edges);

}  // namespace surveylm
