#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "surveylm/backend.hpp"
#include "surveylm/prompt.hpp"
#include "surveylm/stats.hpp"

namespace surveylm {

/// One permutation query worth of evidence.
struct PermutationRecord {
    Permutation order;            // slot -> answer index
    Permutation label_assignment; // slot -> label index (identity unless joint mode)
    std::vector<double> slot_probs;
};

/// Expected distributions under randomized choice ordering: R-bar over
/// answers, O-bar over labels, plus the slot (position) marginal.
struct AdjustedResponse {
    std::string question_id;
    std::vector<double> answer_mean;    // indexed by answer
    std::vector<double> label_mean;     // indexed by label (first k of the label set)
    std::vector<double> position_mean;  // indexed by slot
    long permutation_count = 0;
    bool full_enumeration = false;
    bool records_complete = true;  // false once the record cap truncated history
    std::vector<PermutationRecord> records;

    ResponseDistribution adjusted() const;
};

struct AdjustOptions {
    bool randomize_labels = false;  // joint order+label randomization (appendix mode)
    long record_cap = 5000;
    int workers = 1;
    std::uint64_t label_seed = 0;   // drives label assignments in joint mode
};

/// Renders a question under one permutation; the sequential generator swaps
/// in a history-aware renderer here.
using PromptRenderer = std::function<RenderedPrompt(
    const Question&, const LabelSet&, const Permutation& order, const Permutation* label_assignment)>;

/// Queries every permutation in the plan and averages. Backend failures
/// propagate: partial results are never silently averaged.
AdjustedResponse adjusted_response(Backend& backend, const Question& question,
                                   const PermutationPlan& plan, const LabelSet& labels,
                                   PromptStyle style, const AdjustOptions& options = {});

AdjustedResponse adjusted_response_with_renderer(Backend& backend, const Question& question,
                                                 const PermutationPlan& plan, const LabelSet& labels,
                                                 const PromptRenderer& renderer,
                                                 const AdjustOptions& options = {});

/// |P(O-bar = "A") - 1/k|. The label "A" must be among the labels in use.
double a_bias(const AdjustedResponse& adjusted, const LabelSet& labels);

/// Absolute deviation of the given slot's marginal from 1/k.
double position_bias(const AdjustedResponse& adjusted, int slot);

struct BiasTestResult {
    double statistic = 0;
    int dof = 0;
    double p_value = 1;
    long samples = 0;
    std::string axis;  // "label" or "position"
    bool low_expected_warning = false;
};

/// Pearson chi-square test of the observed selection counts against the
/// uniform distribution over k cells.
BiasTestResult uniformity_test(std::span<const long> counts, std::string axis);

/// One sampled selection from one randomized-permutation query.
struct SelectionSample {
    int slot = 0;
    int label_index = 0;
    int answer_index = 0;
};

/// Collects n selections, each drawn by sampling one choice from the response
/// to an independently randomized permutation (and label assignment, in joint
/// mode).
std::vector<SelectionSample> sample_selections(Backend& backend, const Question& question,
                                               const LabelSet& labels, PromptStyle style, long n,
                                               std::uint64_t seed, bool randomize_labels);

std::vector<long> count_by_label(std::span<const SelectionSample> samples, int k);
std::vector<long> count_by_slot(std::span<const SelectionSample> samples, int k);

}  // namespace surveylm
