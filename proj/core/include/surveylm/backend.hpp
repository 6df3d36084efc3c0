#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surveylm/error.hpp"
#include "surveylm/prompt.hpp"
#include "surveylm/questionnaire.hpp"
#include "surveylm/stats.hpp"

namespace surveylm {

/// Scoring-mode decoding parameters sent with every query; part of the
/// cache-key identity.
struct DecodingParams {
    int max_tokens = 1;
    double temperature = 0.0;
    int top_logprobs = 5;
    std::string system_prompt;  // chat backends only

    bool operator==(const DecodingParams&) const = default;
};

/// One next-token scoring request: the rendered prompt plus the candidate
/// labels, with enough context for the synthetic oracle to score content.
struct LabelQuery {
    std::string prompt;
    std::vector<std::string> labels;             // candidate labels in slot order
    std::string question_id;                     // synthetic-backend context
    std::vector<std::string> slot_answer_codes;  // synthetic-backend context

    static LabelQuery from_render(const RenderedPrompt& r);
};

/// Per-label probabilities as reported by a backend.
struct LabelLogProbs {
    std::map<std::string, double> observed;  // candidate label -> probability
    double reported_mass = 0;                // total mass of the top-k listing
    bool full_visibility = false;            // true when the whole distribution is exact

    void validate() const;
};

class Backend {
public:
    virtual ~Backend() = default;

    virtual LabelLogProbs query(const LabelQuery& q) = 0;
    virtual std::string model_name() const = 0;
    virtual std::string endpoint_id() const = 0;

    struct Stats {
        long queries = 0;
        long network_calls = 0;
        long cache_hits = 0;
    };
    virtual Stats stats() const { return {}; }
};

/// Validated entry point; labels must be nonempty.
LabelLogProbs query_label_logits(Backend& backend, const LabelQuery& q);

/// Assigns each unseen candidate label min(remaining mass, smallest observed
/// candidate probability), then renormalizes over the k candidates. Returns
/// slot-ordered probabilities. Throws when no candidate was observed at all
/// (unusable query).
std::vector<double> renormalize_topk(const LabelLogProbs& observed, std::span<const std::string> labels);

/// Ground-truth oracle: a softmax respondent with separable content, label,
/// and position signals.
struct SyntheticModelSpec {
    double temperature = 1.0;
    std::map<std::string, double> label_bonus;    // label string -> bonus
    std::vector<double> position_bonus;           // slot -> bonus (missing slots = 0)
    std::map<std::string, std::map<std::string, double>> content_scores;  // qid -> code -> score
    std::optional<double> default_content_score;  // fallback when a question is not listed

    double content(const std::string& question_id, const std::string& code) const;

    static SyntheticModelSpec from_json_text(std::string_view text);
    static SyntheticModelSpec load(const std::filesystem::path& path);
    std::string to_json_text() const;
};

/// Slot probabilities = softmax over slots of
/// (content(answer in slot) + label_bonus(label of slot) + position_bonus(slot)) / temperature,
/// reported with full visibility.
LabelLogProbs simulate_response(const SyntheticModelSpec& spec, const Question& question,
                                const LabelSet& labels, const Permutation& order,
                                const Permutation* label_assignment = nullptr);

class SyntheticBackend : public Backend {
public:
    explicit SyntheticBackend(SyntheticModelSpec spec, std::string name = "synthetic");

    LabelLogProbs query(const LabelQuery& q) override;
    std::string model_name() const override { return name_; }
    std::string endpoint_id() const override { return "synthetic"; }
    Stats stats() const override { return stats_; }

    const SyntheticModelSpec& spec() const { return spec_; }

private:
    SyntheticModelSpec spec_;
    std::string name_;
    Stats stats_;
};

}  // namespace surveylm
