#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "surveylm/adjust.hpp"
#include "surveylm/backend.hpp"
#include "surveylm/prompt.hpp"
#include "surveylm/reference.hpp"

namespace surveylm {

struct GenerationConfig {
    long num_respondents = 1;
    PromptStyle style = PromptStyle::Standard;
    SequentialMode sequential_mode = SequentialMode::BulletSummary;

    enum class Adjustment { Raw, AdjustedPerStep };
    Adjustment adjustment = Adjustment::Raw;
    long step_permutation_cap = 50;  // adjusted-per-step permutation budget

    std::uint64_t seed = 0;
    int workers = 1;
    int token_budget = 1024;
    TokenCounter token_counter;  // defaults to approximate_token_count
    bool apply_ask_if = false;
    bool audit_distributions = false;
    int max_row_retries = 3;
    long max_rows_per_run = 0;  // 0 = no limit; lets operators run in slices
};

std::string adjustment_name(GenerationConfig::Adjustment a);

struct RespondentRow {
    std::vector<std::string> codes;  // one answer code per question, "NA" when skipped
    std::uint64_t stream_seed = 0;
    std::vector<std::vector<double>> sampled_from;  // audit payload (optional)
};

/// Fills one questionnaire sequentially: each step renders the prompt with
/// all prior sampled answers in context, obtains the (optionally adjusted)
/// answer distribution, and samples one answer. Deterministic given
/// (config.seed, respondent_index) and a deterministic backend.
RespondentRow sample_respondent(Backend& backend, const Questionnaire& questionnaire,
                                const LabelSet& labels, const GenerationConfig& config,
                                long respondent_index);

/// N respondent rows as a reference-format table (schema = question ids).
ReferenceTable generate_dataset(Backend& backend, const Questionnaire& questionnaire,
                                const LabelSet& labels, const GenerationConfig& config);

struct GenerationProgress {
    long rows_done = 0;
    long rows_requested = 0;
    bool complete() const { return rows_done >= rows_requested; }
};

/// Streaming variant with checkpoint/resume: rows append to `out_csv` and the
/// checkpoint file records progress. Re-running with the same arguments
/// resumes where it stopped and yields a file identical to an uninterrupted
/// run (per-respondent RNG streams depend only on the master seed and the
/// respondent index).
GenerationProgress generate_dataset_csv(Backend& backend, const Questionnaire& questionnaire,
                                        const LabelSet& labels, const GenerationConfig& config,
                                        const std::filesystem::path& out_csv,
                                        const std::filesystem::path& checkpoint_path);

}  // namespace surveylm
