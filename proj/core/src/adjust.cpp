#include "surveylm/adjust.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "surveylm/parallel.hpp"
#include "surveylm/rng.hpp"

namespace surveylm {

ResponseDistribution AdjustedResponse::adjusted() const {
    ResponseDistribution d;
    d.question_id = question_id;
    d.probs = answer_mean;
    d.provenance = Provenance::ModelAdjusted;
    return d;
}

AdjustedResponse adjusted_response(Backend& backend, const Question& question,
                                   const PermutationPlan& plan, const LabelSet& labels,
                                   PromptStyle style, const AdjustOptions& options) {
    PromptRenderer renderer = [style](const Question& q, const LabelSet& ls, const Permutation& order,
                                      const Permutation* label_assignment) {
        return render_prompt(q, ls, order, style, label_assignment);
    };
    return adjusted_response_with_renderer(backend, question, plan, labels, renderer, options);
}

AdjustedResponse adjusted_response_with_renderer(Backend& backend, const Question& question,
                                                 const PermutationPlan& plan, const LabelSet& labels,
                                                 const PromptRenderer& renderer,
                                                 const AdjustOptions& options) {
    const int k = question.option_count();
    if (plan.k != k) {
        throw Error("adjusted_response: plan built for k=" + std::to_string(plan.k) +
                    " but question '" + question.id + "' has k=" + std::to_string(k));
    }
    if (plan.permutations.empty()) throw Error("adjusted_response: empty permutation plan");

    // Label assignments are fixed up front so results do not depend on the
    // order in which workers finish.
    std::vector<Permutation> assignments;
    assignments.reserve(plan.permutations.size());
    if (options.randomize_labels) {
        rng::Stream label_stream(rng::derive_seed(options.label_seed, "label-assignment"));
        for (std::size_t i = 0; i < plan.permutations.size(); ++i) {
            assignments.emplace_back(label_stream.permutation(k));
        }
    } else {
        for (std::size_t i = 0; i < plan.permutations.size(); ++i) {
            assignments.push_back(Permutation::identity(k));
        }
    }

    std::vector<std::vector<double>> slot_probs(plan.permutations.size());
    parallel_for(plan.permutations.size(), options.workers, [&](std::size_t i) {
        RenderedPrompt prompt = renderer(question, labels, plan.permutations[i],
                                         options.randomize_labels ? &assignments[i] : nullptr);
        LabelLogProbs observed = query_label_logits(backend, LabelQuery::from_render(prompt));
        slot_probs[i] = renormalize_topk(observed, prompt.slot_labels);
    });

    AdjustedResponse adj;
    adj.question_id = question.id;
    adj.answer_mean.assign(static_cast<std::size_t>(k), 0.0);
    adj.label_mean.assign(static_cast<std::size_t>(k), 0.0);
    adj.position_mean.assign(static_cast<std::size_t>(k), 0.0);
    adj.permutation_count = static_cast<long>(plan.permutations.size());
    adj.full_enumeration = plan.full_enumeration;

    for (std::size_t i = 0; i < plan.permutations.size(); ++i) {
        const auto& order = plan.permutations[i];
        const auto& assignment = assignments[i];
        for (int slot = 0; slot < k; ++slot) {
            double p = slot_probs[i][static_cast<std::size_t>(slot)];
            adj.answer_mean[static_cast<std::size_t>(order.at(slot))] += p;
            adj.label_mean[static_cast<std::size_t>(assignment.at(slot))] += p;
            adj.position_mean[static_cast<std::size_t>(slot)] += p;
        }
        if (static_cast<long>(adj.records.size()) < options.record_cap) {
            adj.records.push_back({order, assignment, slot_probs[i]});
        } else {
            adj.records_complete = false;
        }
    }
    const double n = static_cast<double>(plan.permutations.size());
    for (double& v : adj.answer_mean) v /= n;
    for (double& v : adj.label_mean) v /= n;
    for (double& v : adj.position_mean) v /= n;
    return adj;
}

double a_bias(const AdjustedResponse& adjusted, const LabelSet& labels) {
    const int k = static_cast<int>(adjusted.label_mean.size());
    int a_index = -1;
    for (int i = 0; i < k; ++i) {
        if (labels.labels[static_cast<std::size_t>(i)] == "A") {
            a_index = i;
            break;
        }
    }
    if (a_index < 0) {
        throw Error("a_bias: label 'A' not among the " + std::to_string(k) + " labels in use");
    }
    return std::abs(adjusted.label_mean[static_cast<std::size_t>(a_index)] - 1.0 / k);
}

double position_bias(const AdjustedResponse& adjusted, int slot) {
    const int k = static_cast<int>(adjusted.position_mean.size());
    if (slot < 0 || slot >= k) throw Error("position_bias: slot out of range");
    return std::abs(adjusted.position_mean[static_cast<std::size_t>(slot)] - 1.0 / k);
}

BiasTestResult uniformity_test(std::span<const long> counts, std::string axis) {
    const int k = static_cast<int>(counts.size());
    if (k < 2) throw Error("uniformity_test: need k >= 2 cells");
    long n = 0;
    for (long c : counts) {
        if (c < 0) throw Error("uniformity_test: negative count");
        n += c;
    }
    BiasTestResult r;
    r.axis = std::move(axis);
    r.dof = k - 1;
    r.samples = n;
    if (n == 0) throw Error("uniformity_test: no samples");
    const double expected = static_cast<double>(n) / k;
    r.low_expected_warning = expected < 5.0;
    double stat = 0;
    for (long c : counts) {
        double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    r.statistic = stat;
    boost::math::chi_squared dist(static_cast<double>(k - 1));
    r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
    return r;
}

std::vector<SelectionSample> sample_selections(Backend& backend, const Question& question,
                                               const LabelSet& labels, PromptStyle style, long n,
                                               std::uint64_t seed, bool randomize_labels) {
    const int k = question.option_count();
    if (static_cast<int>(labels.labels.size()) < k) {
        throw Error("sample_selections: label set too short");
    }
    std::vector<SelectionSample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    rng::Stream stream(rng::derive_seed(seed, "selections"));
    for (long i = 0; i < n; ++i) {
        Permutation order(stream.permutation(k));
        Permutation assignment =
            randomize_labels ? Permutation(stream.permutation(k)) : Permutation::identity(k);
        RenderedPrompt prompt =
            render_prompt(question, labels, order, style, randomize_labels ? &assignment : nullptr);
        LabelLogProbs observed = query_label_logits(backend, LabelQuery::from_render(prompt));
        std::vector<double> probs = renormalize_topk(observed, prompt.slot_labels);
        int slot = stream.categorical(probs);
        samples.push_back({slot, assignment.at(slot), order.at(slot)});
    }
    return samples;
}

std::vector<long> count_by_label(std::span<const SelectionSample> samples, int k) {
    std::vector<long> counts(static_cast<std::size_t>(k), 0);
    for (const auto& s : samples) ++counts[static_cast<std::size_t>(s.label_index)];
    return counts;
}

std::vector<long> count_by_slot(std::span<const SelectionSample> samples, int k) {
    std::vector<long> counts(static_cast<std::size_t>(k), 0);
    for (const auto& s : samples) ++counts[static_cast<std::size_t>(s.slot)];
    return counts;
}

}  // namespace surveylm
