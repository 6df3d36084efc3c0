#include "surveylm/generate.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "surveylm/csv.hpp"
#include "surveylm/hash.hpp"
#include "surveylm/parallel.hpp"
#include "surveylm/rng.hpp"

namespace surveylm {

std::string adjustment_name(GenerationConfig::Adjustment a) {
    return a == GenerationConfig::Adjustment::Raw ? "raw" : "adjusted-per-step";
}

namespace {

int count_tokens(const GenerationConfig& config, const std::string& text) {
    return config.token_counter ? config.token_counter(text) : approximate_token_count(text);
}

bool gate_satisfied(const AskIf& gate, const Questionnaire& questionnaire,
                    const std::vector<std::string>& codes) {
    int idx = questionnaire.index_of(gate.question_id);
    if (idx < 0) return false;
    const std::string& answered = codes[static_cast<std::size_t>(idx)];
    return std::find(gate.any_of.begin(), gate.any_of.end(), answered) != gate.any_of.end();
}

RespondentRow sample_row_once(Backend& backend, const Questionnaire& questionnaire,
                              const LabelSet& labels, const GenerationConfig& config,
                              std::uint64_t stream_seed) {
    rng::Stream stream(stream_seed);
    RespondentRow row;
    row.stream_seed = stream_seed;
    std::vector<AnsweredQuestion> history;

    for (const auto& question : questionnaire.questions) {
        if (config.apply_ask_if && question.ask_if &&
            !gate_satisfied(*question.ask_if, questionnaire, row.codes)) {
            row.codes.emplace_back(ReferenceTable::kMissing);
            if (config.audit_distributions) row.sampled_from.emplace_back();
            continue;
        }
        const int k = question.option_count();
        std::vector<double> answer_probs;

        if (config.adjustment == GenerationConfig::Adjustment::Raw) {
            // Single rendering per step, choices in questionnaire order.
            Permutation order = Permutation::identity(k);
            RenderedPrompt prompt = render_sequential_prompt(
                questionnaire, history, question, labels, order, config.style, config.sequential_mode);
            if (count_tokens(config, prompt.text) > config.token_budget) {
                throw Error("generate: token budget exceeded at '" + question.id + "' (" +
                            std::to_string(count_tokens(config, prompt.text)) + " > " +
                            std::to_string(config.token_budget) + ")");
            }
            LabelLogProbs observed = query_label_logits(backend, LabelQuery::from_render(prompt));
            answer_probs = renormalize_topk(observed, prompt.slot_labels);  // identity order
            history.push_back({&question, order, /*answer_index=*/0});
        } else {
            // Average over a capped permutation plan at this step, then sample.
            PermutationPlan plan = enumerate_permutations(
                k, config.step_permutation_cap,
                rng::derive_seed(stream_seed, "step-perms", static_cast<std::uint64_t>(history.size())));
            PromptRenderer renderer = [&](const Question& q, const LabelSet& ls,
                                          const Permutation& order, const Permutation* assignment) {
                RenderedPrompt prompt = render_sequential_prompt(questionnaire, history, q, ls, order,
                                                                 config.style, config.sequential_mode);
                (void)assignment;
                if (count_tokens(config, prompt.text) > config.token_budget) {
                    throw Error("generate: token budget exceeded at '" + q.id + "'");
                }
                return prompt;
            };
            AdjustOptions adjust_options;
            adjust_options.record_cap = 0;
            AdjustedResponse adjusted = adjusted_response_with_renderer(backend, question, plan, labels,
                                                                        renderer, adjust_options);
            answer_probs = adjusted.answer_mean;
            history.push_back({&question, Permutation::identity(k), /*answer_index=*/0});
        }

        int answer = stream.categorical(answer_probs);
        history.back().answer_index = answer;
        row.codes.push_back(question.answers[static_cast<std::size_t>(answer)].code);
        if (config.audit_distributions) row.sampled_from.push_back(answer_probs);
    }
    return row;
}

std::string config_fingerprint(const Questionnaire& questionnaire, const LabelSet& labels,
                               const GenerationConfig& config, const Backend& backend) {
    nlohmann::ordered_json j;
    j["questionnaire"] = serialize_questionnaire(questionnaire);
    j["labels"] = labels.labels;
    j["n"] = config.num_respondents;
    j["style"] = prompt_style_name(config.style);
    j["sequential_mode"] = sequential_mode_name(config.sequential_mode);
    j["adjustment"] = adjustment_name(config.adjustment);
    j["step_permutation_cap"] = config.step_permutation_cap;
    j["seed"] = config.seed;
    j["apply_ask_if"] = config.apply_ask_if;
    j["backend"] = backend.endpoint_id() + "/" + backend.model_name();
    return sha256_hex(j.dump());
}

}  // namespace

RespondentRow sample_respondent(Backend& backend, const Questionnaire& questionnaire,
                                const LabelSet& labels, const GenerationConfig& config,
                                long respondent_index) {
    std::uint64_t stream_seed =
        rng::derive_seed(config.seed, "respondent", static_cast<std::uint64_t>(respondent_index));
    int attempts = std::max(1, config.max_row_retries);
    for (int attempt = 0;; ++attempt) {
        try {
            // The whole row restarts from the same stream: rows are never half-kept.
            return sample_row_once(backend, questionnaire, labels, config, stream_seed);
        } catch (const BackendError&) {
            if (attempt + 1 >= attempts) throw;
        }
    }
}

ReferenceTable generate_dataset(Backend& backend, const Questionnaire& questionnaire,
                                const LabelSet& labels, const GenerationConfig& config) {
    if (config.num_respondents < 1) throw Error("generate: need at least one respondent");
    ReferenceTable table;
    for (const auto& q : questionnaire.questions) table.columns.push_back(q.id);
    table.rows.resize(static_cast<std::size_t>(config.num_respondents));
    parallel_for(static_cast<std::size_t>(config.num_respondents), config.workers, [&](std::size_t i) {
        table.rows[i] =
            sample_respondent(backend, questionnaire, labels, config, static_cast<long>(i)).codes;
    });
    return table;
}

GenerationProgress generate_dataset_csv(Backend& backend, const Questionnaire& questionnaire,
                                        const LabelSet& labels, const GenerationConfig& config,
                                        const std::filesystem::path& out_csv,
                                        const std::filesystem::path& checkpoint_path) {
    if (config.num_respondents < 1) throw Error("generate: need at least one respondent");
    const std::string fingerprint = config_fingerprint(questionnaire, labels, config, backend);

    GenerationProgress progress;
    progress.rows_requested = config.num_respondents;

    bool resuming = false;
    if (std::filesystem::exists(checkpoint_path)) {
        std::ifstream in(checkpoint_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception&) {
            throw Error("generate: corrupt checkpoint " + checkpoint_path.string());
        }
        if (j.value("fingerprint", "") != fingerprint) {
            throw Error("generate: checkpoint belongs to a different run configuration");
        }
        progress.rows_done = j.value("rows_done", 0L);
        resuming = true;
    }
    if (progress.rows_done >= config.num_respondents) return progress;

    std::ofstream out(out_csv, resuming ? std::ios::app | std::ios::binary
                                        : std::ios::trunc | std::ios::binary);
    if (!out) throw Error("generate: cannot write " + out_csv.string());
    std::vector<std::string> header;
    for (const auto& q : questionnaire.questions) header.push_back(q.id);
    if (!resuming) csv::write_row(out, header);

    auto save_checkpoint = [&](long rows_done) {
        nlohmann::ordered_json j;
        j["fingerprint"] = fingerprint;
        j["rows_done"] = rows_done;
        j["rows_requested"] = config.num_respondents;
        auto tmp = checkpoint_path;
        tmp += ".tmp";
        {
            std::ofstream cp(tmp, std::ios::binary);
            cp << j.dump();
        }
        std::filesystem::rename(tmp, checkpoint_path);
    };

    long limit = config.num_respondents;
    if (config.max_rows_per_run > 0) {
        limit = std::min(limit, progress.rows_done + config.max_rows_per_run);
    }
    const long window = std::max<long>(64, static_cast<long>(config.workers) * 8);
    while (progress.rows_done < limit) {
        long begin = progress.rows_done;
        long end = std::min(limit, begin + window);
        std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(end - begin));
        parallel_for(static_cast<std::size_t>(end - begin), config.workers, [&](std::size_t i) {
            rows[i] = sample_respondent(backend, questionnaire, labels, config,
                                        begin + static_cast<long>(i))
                          .codes;
        });
        for (const auto& row : rows) csv::write_row(out, row);
        out.flush();
        progress.rows_done = end;
        save_checkpoint(progress.rows_done);
    }
    return progress;
}

}  // namespace surveylm
