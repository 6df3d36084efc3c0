#include "surveylm/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>

#include "surveylm/alignment.hpp"
#include "surveylm/csv.hpp"
#include "surveylm/http_backend.hpp"
#include "surveylm/rng.hpp"

namespace surveylm {

namespace {

std::string timestamp_utc() {
    // SOURCE_DATE_EPOCH pins the sidecar timestamp for reproducible runs.
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_sidecar(const std::filesystem::path& path, const RunConfig& config,
                   const std::string& command, const Backend* backend,
                   nlohmann::ordered_json extra) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["model"] = backend ? backend->model_name() : config.backend.model;
    j["config"] = config.to_json();
    j["seed"] = config.seed;
    j["timestamp"] = timestamp_utc();
    if (backend) {
        auto stats = backend->stats();
        j["backend_stats"] = {{"queries", stats.queries},
                              {"network_calls", stats.network_calls},
                              {"cache_hits", stats.cache_hits}};
    }
    for (auto& [key, value] : extra.items()) j[key] = value;
    write_text_file(path, j.dump(2) + "\n");
}

struct QuestionFailure {
    std::string question_id;
    std::string message;
};

nlohmann::ordered_json failures_json(const std::vector<QuestionFailure>& failures) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& f : failures) j[f.question_id] = f.message;
    return j;
}

csv::Table responses_table(const Questionnaire& questionnaire,
                           const std::map<std::string, ResponseDistribution>& responses) {
    int max_k = 0;
    for (const auto& q : questionnaire.questions) max_k = std::max(max_k, q.option_count());
    csv::Table t;
    t.header = {"question", "k", "entropy_norm"};
    for (int i = 0; i < max_k; ++i) t.header.push_back("p" + std::to_string(i));
    for (const auto& q : questionnaire.questions) {
        auto it = responses.find(q.id);
        if (it == responses.end()) continue;
        const auto& d = it->second;
        std::vector<std::string> row = {q.id, std::to_string(d.size()),
                                        csv::format_double(normalized_entropy(d))};
        for (int i = 0; i < max_k; ++i) {
            row.push_back(i < d.size() ? csv::format_double(d.probs[static_cast<std::size_t>(i)]) : "");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

csv::Table responses_long_table(const Questionnaire& questionnaire,
                                const std::map<std::string, ResponseDistribution>& responses) {
    csv::Table t;
    t.header = {"question", "answer_code", "prob"};
    for (const auto& q : questionnaire.questions) {
        auto it = responses.find(q.id);
        if (it == responses.end()) continue;
        for (std::size_t i = 0; i < it->second.probs.size(); ++i) {
            t.rows.push_back({q.id, q.answers[i].code, csv::format_double(it->second.probs[i])});
        }
    }
    return t;
}

}  // namespace

long RunConfig::resolved_permutation_cap() const {
    if (permutation_cap > 0) return permutation_cap;
    return backend.is_openai() ? 50 : 5000;
}

long RunConfig::resolved_generate_n() const {
    if (generate_n > 0) return generate_n;
    return backend.is_openai() ? 500 : 100000;
}

std::filesystem::path RunConfig::resolved_cache_dir() const {
    if (!cache_dir.empty()) return cache_dir;
    return std::filesystem::path(output_dir) / "cache";
}

void RunConfig::apply_json(const nlohmann::json& j) {
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        backend.kind = b.value("kind", backend.kind);
        backend.endpoint = b.value("endpoint", backend.endpoint);
        backend.model = b.value("model", backend.model);
        backend.api_key_env = b.value("api_key_env", backend.api_key_env);
        backend.top_logprobs = b.value("top_logprobs", backend.top_logprobs);
        backend.requests_per_second = b.value("requests_per_second", backend.requests_per_second);
        backend.system_prompt = b.value("system_prompt", backend.system_prompt);
        backend.fixture_path = b.value("fixture", backend.fixture_path);
        backend.synthetic_spec_path = b.value("spec", backend.synthetic_spec_path);
    }
    questionnaire_path = j.value("questionnaire", questionnaire_path);
    label_set = j.value("label_set", label_set);
    prompt_style = j.value("prompt_style", prompt_style);
    permutation_cap = j.value("permutation_cap", permutation_cap);
    seed = j.value("seed", seed);
    output_dir = j.value("output_dir", output_dir);
    cache_dir = j.value("cache_dir", cache_dir);
    workers = j.value("workers", workers);
    plot_data = j.value("plot_data", plot_data);
    chi2_samples = j.value("chi2_samples", chi2_samples);
    run_chi2 = j.value("run_chi2", run_chi2);
    randomize_labels = j.value("randomize_labels", randomize_labels);
    reference_path = j.value("reference", reference_path);
    responses_path = j.value("responses", responses_path);
    subgroup_column = j.value("subgroup_column", subgroup_column);
    weighted = j.value("weighted", weighted);
    metric = j.value("metric", metric);
    epsilon = j.value("epsilon", epsilon);
    generate_n = j.value("generate_n", generate_n);
    sequential_mode = j.value("sequential_mode", sequential_mode);
    adjustment = j.value("adjustment", adjustment);
    step_permutation_cap = j.value("step_permutation_cap", step_permutation_cap);
    token_budget = j.value("token_budget", token_budget);
    apply_ask_if = j.value("apply_ask_if", apply_ask_if);
    max_rows_per_run = j.value("max_rows_per_run", max_rows_per_run);
    discriminator_n = j.value("discriminator_n", discriminator_n);
    discriminator_seeds = j.value("discriminator_seeds", discriminator_seeds);
    classifier = j.value("classifier", classifier);
    if (j.contains("gbdt")) {
        const auto& g = j["gbdt"];
        gbdt.n_trees = g.value("trees", gbdt.n_trees);
        gbdt.max_depth = g.value("depth", gbdt.max_depth);
        gbdt.learning_rate = g.value("learning_rate", gbdt.learning_rate);
        gbdt.lambda_l2 = g.value("lambda_l2", gbdt.lambda_l2);
        gbdt.min_child_weight = g.value("min_child_weight", gbdt.min_child_weight);
    }
}

void RunConfig::apply_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: malformed JSON: ") + e.what());
    }
    apply_json(j);
}

void RunConfig::apply_env() {
    if (const char* v = std::getenv("SURVEYLM_ENDPOINT")) backend.endpoint = v;
    if (const char* v = std::getenv("SURVEYLM_MODEL")) backend.model = v;
    if (const char* v = std::getenv("SURVEYLM_OUTPUT_DIR")) output_dir = v;
    if (const char* v = std::getenv("SURVEYLM_CACHE_DIR")) cache_dir = v;
    if (const char* v = std::getenv("SURVEYLM_WORKERS")) workers = std::atoi(v);
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["backend"] = {{"kind", backend.kind},
                    {"endpoint", backend.endpoint},
                    {"model", backend.model},
                    {"api_key_env", backend.api_key_env},
                    {"top_logprobs", backend.top_logprobs},
                    {"requests_per_second", backend.requests_per_second},
                    {"system_prompt", backend.system_prompt},
                    {"fixture", backend.fixture_path},
                    {"spec", backend.synthetic_spec_path}};
    j["questionnaire"] = questionnaire_path;
    j["label_set"] = label_set;
    j["prompt_style"] = prompt_style;
    j["permutation_cap"] = resolved_permutation_cap();
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["cache_dir"] = resolved_cache_dir().string();
    j["workers"] = workers;
    j["chi2_samples"] = chi2_samples;
    j["run_chi2"] = run_chi2;
    j["randomize_labels"] = randomize_labels;
    j["metric"] = metric;
    j["epsilon"] = epsilon;
    j["weighted"] = weighted;
    j["sequential_mode"] = sequential_mode;
    j["adjustment"] = adjustment;
    j["step_permutation_cap"] = step_permutation_cap;
    j["token_budget"] = token_budget;
    j["apply_ask_if"] = apply_ask_if;
    j["discriminator_seeds"] = discriminator_seeds;
    j["classifier"] = classifier;
    j["gbdt"] = {{"trees", gbdt.n_trees},
                 {"depth", gbdt.max_depth},
                 {"learning_rate", gbdt.learning_rate}};
    return j;
}

BackendHandle make_backend(const RunConfig& config) {
    BackendHandle handle;
    const auto& b = config.backend;
    if (b.kind == "synthetic") {
        SyntheticModelSpec spec;
        if (!b.synthetic_spec_path.empty()) {
            spec = SyntheticModelSpec::load(b.synthetic_spec_path);
        } else {
            spec.default_content_score = 0.0;  // neutral respondent: uniform everywhere
        }
        handle.backend = std::make_unique<SyntheticBackend>(std::move(spec), b.model);
    } else if (b.kind == "fixture") {
        if (b.fixture_path.empty()) throw Error("backend: fixture kind needs backend.fixture");
        handle.backend = std::make_unique<FixtureBackend>(b.fixture_path, b.endpoint, b.model,
                                                          /*chat=*/false, b.top_logprobs);
    } else if (b.kind == "fixture-chat") {
        if (b.fixture_path.empty()) throw Error("backend: fixture kind needs backend.fixture");
        handle.backend = std::make_unique<FixtureBackend>(b.fixture_path, b.endpoint, b.model,
                                                          /*chat=*/true, b.top_logprobs,
                                                          b.system_prompt);
    } else if (b.kind == "openai" || b.kind == "openai-chat") {
        HttpBackendConfig http;
        http.endpoint = b.endpoint;
        http.model = b.model;
        http.api_key_env = b.api_key_env;
        http.chat = b.kind == "openai-chat";
        http.top_logprobs = b.top_logprobs;
        http.system_prompt = b.system_prompt;
        http.requests_per_second = b.requests_per_second;
        handle.cache = std::make_unique<DiskCache>(config.resolved_cache_dir());
        handle.backend = std::make_unique<HttpBackend>(std::move(http), handle.cache.get());
    } else {
        throw Error("backend: unknown kind '" + b.kind + "'");
    }
    return handle;
}

namespace {

struct SurveyArtifacts {
    std::map<std::string, ResponseDistribution> responses;
    std::vector<QuestionFailure> failures;
};

// One query per question, choices in questionnaire order.
SurveyArtifacts run_raw_survey(Backend& backend, const Questionnaire& questionnaire,
                               const LabelSet& labels, PromptStyle style) {
    SurveyArtifacts art;
    for (const auto& q : questionnaire.questions) {
        try {
            auto prompt = render_prompt(q, labels, Permutation::identity(q.option_count()), style);
            auto observed = query_label_logits(backend, LabelQuery::from_render(prompt));
            ResponseDistribution d;
            d.question_id = q.id;
            d.probs = renormalize_topk(observed, prompt.slot_labels);
            d.provenance = Provenance::ModelRaw;
            art.responses[q.id] = std::move(d);
        } catch (const std::exception& e) {
            art.failures.push_back({q.id, e.what()});
        }
    }
    return art;
}

struct AdjustArtifacts {
    std::map<std::string, ResponseDistribution> responses;  // adjusted
    std::map<std::string, AdjustedResponse> adjusted;
    std::vector<QuestionFailure> failures;
};

AdjustArtifacts run_adjusted_survey(Backend& backend, const Questionnaire& questionnaire,
                                    const LabelSet& labels, PromptStyle style,
                                    const RunConfig& config) {
    AdjustArtifacts art;
    for (std::size_t qi = 0; qi < questionnaire.questions.size(); ++qi) {
        const auto& q = questionnaire.questions[qi];
        try {
            auto plan = enumerate_permutations(q.option_count(), config.resolved_permutation_cap(),
                                               rng::derive_seed(config.seed, "perm-plan", qi));
            AdjustOptions options;
            options.randomize_labels = config.randomize_labels;
            options.workers = config.workers;
            options.label_seed = rng::derive_seed(config.seed, "label-plan", qi);
            auto adjusted = adjusted_response(backend, q, plan, labels, style, options);
            art.responses[q.id] = adjusted.adjusted();
            art.adjusted[q.id] = std::move(adjusted);
        } catch (const std::exception& e) {
            art.failures.push_back({q.id, e.what()});
        }
    }
    return art;
}

}  // namespace

ResponseMap read_responses_csv(const std::filesystem::path& path, const Questionnaire& questionnaire) {
    csv::Table t = csv::read_file(path);
    if (t.header.size() < 3 || t.header[0] != "question" || t.header[1] != "k") {
        throw ParseError("responses: unexpected header in " + path.string());
    }
    ResponseMap out;
    for (const auto& row : t.rows) {
        const Question* q = questionnaire.find(row[0]);
        if (!q) throw ParseError("responses: unknown question '" + row[0] + "'");
        int k = std::stoi(row[1]);
        if (k != q->option_count()) {
            throw ParseError("responses: k mismatch for '" + row[0] + "'");
        }
        ResponseDistribution d;
        d.question_id = row[0];
        for (int i = 0; i < k; ++i) {
            d.probs.push_back(std::stod(row[static_cast<std::size_t>(3 + i)]));
        }
        validate_distribution(d.probs);
        d.provenance = Provenance::ModelAdjusted;
        out[row[0]] = std::move(d);
    }
    return out;
}

int cmd_survey(const RunConfig& config) {
    auto questionnaire = load_questionnaire(config.questionnaire_path);
    const auto& labels = LabelSet::by_name(config.label_set);
    auto style = prompt_style_from_name(config.prompt_style);
    auto handle = make_backend(config);
    std::filesystem::create_directories(config.output_dir);

    auto art = run_raw_survey(*handle.backend, questionnaire, labels, style);

    auto out_dir = std::filesystem::path(config.output_dir);
    csv::write_file(out_dir / "survey_responses.csv", responses_table(questionnaire, art.responses));
    if (config.plot_data) {
        csv::write_file(out_dir / "survey_responses_long.csv",
                        responses_long_table(questionnaire, art.responses));
    }
    write_sidecar(out_dir / "survey.meta.json", config, "survey", handle.backend.get(),
                  {{"questions_total", questionnaire.questions.size()},
                   {"questions_failed", art.failures.size()},
                   {"failures", failures_json(art.failures)}});
    return art.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_adjust(const RunConfig& config) {
    auto questionnaire = load_questionnaire(config.questionnaire_path);
    const auto& labels = LabelSet::by_name(config.label_set);
    auto style = prompt_style_from_name(config.prompt_style);
    auto handle = make_backend(config);
    std::filesystem::create_directories(config.output_dir);
    auto out_dir = std::filesystem::path(config.output_dir);

    auto art = run_adjusted_survey(*handle.backend, questionnaire, labels, style, config);

    csv::Table bias;
    bias.header = {"question", "k",      "n_perms",      "full_enum",
                   "a_bias",   "first_choice_bias", "chi2_label_p", "chi2_pos_p"};
    for (std::size_t qi = 0; qi < questionnaire.questions.size(); ++qi) {
        const auto& q = questionnaire.questions[qi];
        auto it = art.adjusted.find(q.id);
        if (it == art.adjusted.end()) continue;
        const auto& adj = it->second;
        std::string chi2_label = "", chi2_pos = "";
        if (config.run_chi2) {
            try {
                auto selections = sample_selections(*handle.backend, q, labels, style,
                                                    config.chi2_samples,
                                                    rng::derive_seed(config.seed, "chi2", qi),
                                                    config.randomize_labels);
                auto label_test =
                    uniformity_test(count_by_label(selections, q.option_count()), "label");
                auto pos_test = uniformity_test(count_by_slot(selections, q.option_count()), "position");
                chi2_label = csv::format_double(label_test.p_value);
                chi2_pos = csv::format_double(pos_test.p_value);
            } catch (const std::exception& e) {
                art.failures.push_back({q.id, std::string("chi2: ") + e.what()});
            }
        }
        bias.rows.push_back({q.id, std::to_string(q.option_count()),
                             std::to_string(adj.permutation_count),
                             adj.full_enumeration ? "true" : "false",
                             csv::format_double(a_bias(adj, labels)),
                             csv::format_double(position_bias(adj, 0)), chi2_label, chi2_pos});
    }
    csv::write_file(out_dir / "bias_report.csv", bias);
    csv::write_file(out_dir / "adjusted_responses.csv", responses_table(questionnaire, art.responses));
    if (config.plot_data) {
        csv::write_file(out_dir / "adjusted_responses_long.csv",
                        responses_long_table(questionnaire, art.responses));
    }
    write_sidecar(out_dir / "adjust.meta.json", config, "adjust", handle.backend.get(),
                  {{"randomization_mode", config.randomize_labels ? "joint" : "order-only"},
                   {"questions_total", questionnaire.questions.size()},
                   {"questions_failed", art.failures.size()},
                   {"failures", failures_json(art.failures)}});
    return art.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_align(const RunConfig& config) {
    auto questionnaire = load_questionnaire(config.questionnaire_path);
    if (config.reference_path.empty()) throw Error("align: reference table path required");
    auto table = ReferenceTable::load_csv(config.reference_path, &questionnaire, config.subgroup_column);
    std::filesystem::create_directories(config.output_dir);
    auto out_dir = std::filesystem::path(config.output_dir);

    ResponseMap responses;
    BackendHandle handle;
    std::vector<QuestionFailure> failures;
    if (!config.responses_path.empty()) {
        responses = read_responses_csv(config.responses_path, questionnaire);
    } else {
        const auto& labels = LabelSet::by_name(config.label_set);
        auto style = prompt_style_from_name(config.prompt_style);
        handle = make_backend(config);
        auto art = run_adjusted_survey(*handle.backend, questionnaire, labels, style, config);
        if (!art.failures.empty()) {
            // An alignment report over a partial question set would not be
            // comparable across models; fail hard instead.
            throw Error("align: " + std::to_string(art.failures.size()) +
                        " questions failed; rerun survey or fix the backend");
        }
        responses = std::move(art.responses);
    }

    AlignmentOptions options;
    options.weighted = config.weighted;
    options.epsilon = config.epsilon;
    if (config.metric == "kl") {
        options.metric = AlignmentMetric::Kl;
    } else if (config.metric == "wasserstein") {
        options.metric = AlignmentMetric::WassersteinOrdinal;
    } else {
        throw Error("align: unknown metric '" + config.metric + "'");
    }
    auto report = build_alignment_report(config.backend.model, responses, table, questionnaire, options);

    nlohmann::ordered_json report_json = report.to_json();
    if (report.subgroups.size() >= 3) {
        auto corr = entropy_alignment_correlation(report);
        nlohmann::ordered_json jc;
        jc["defined"] = corr.defined;
        if (corr.defined) {
            jc["pearson_r"] = corr.pearson_r;
            jc["spearman_rho"] = corr.spearman_rho;
        }
        report_json["entropy_alignment_correlation"] = jc;
        if (config.plot_data) {
            csv::Table scatter;
            scatter.header = {"subgroup", "mean_normalized_entropy", "mean_divergence"};
            for (const auto& p : corr.points) {
                scatter.rows.push_back({p.subgroup, csv::format_double(p.mean_entropy),
                                        csv::format_double(p.mean_divergence)});
            }
            csv::write_file(out_dir / "alignment_scatter.csv", scatter);
        }
    }
    csv::write_file(out_dir / "alignment.csv", report.to_csv());
    write_text_file(out_dir / "alignment.json", report_json.dump(2) + "\n");
    write_sidecar(out_dir / "align.meta.json", config, "align", handle.backend.get(),
                  {{"reference", config.reference_path},
                   {"responses", config.responses_path},
                   {"failures", failures_json(failures)}});
    return kExitOk;
}

int cmd_generate(const RunConfig& config) {
    auto questionnaire = load_questionnaire(config.questionnaire_path);
    const auto& labels = LabelSet::by_name(config.label_set);
    auto handle = make_backend(config);
    std::filesystem::create_directories(config.output_dir);
    auto out_dir = std::filesystem::path(config.output_dir);

    GenerationConfig gen;
    gen.num_respondents = config.resolved_generate_n();
    gen.style = prompt_style_from_name(config.prompt_style);
    gen.sequential_mode = sequential_mode_from_name(config.sequential_mode);
    if (config.adjustment == "raw") {
        gen.adjustment = GenerationConfig::Adjustment::Raw;
    } else if (config.adjustment == "adjusted-per-step") {
        gen.adjustment = GenerationConfig::Adjustment::AdjustedPerStep;
    } else {
        throw Error("generate: unknown adjustment '" + config.adjustment + "'");
    }
    gen.step_permutation_cap = config.step_permutation_cap;
    gen.seed = config.seed;
    gen.workers = config.workers;
    gen.token_budget = config.token_budget;
    gen.apply_ask_if = config.apply_ask_if;
    gen.max_rows_per_run = config.max_rows_per_run;

    auto progress = generate_dataset_csv(*handle.backend, questionnaire, labels, gen,
                                         out_dir / "generated.csv",
                                         out_dir / "generated.checkpoint.json");

    write_sidecar(out_dir / "generated.meta.json", config, "generate", handle.backend.get(),
                  {{"prompt_style", config.prompt_style},
                   {"sequential_mode", config.sequential_mode},
                   {"adjustment_mode", config.adjustment},
                   {"rows_done", progress.rows_done},
                   {"rows_requested", progress.rows_requested},
                   {"complete", progress.complete()}});
    return kExitOk;
}

int cmd_discriminate(const RunConfig& config, const std::filesystem::path& synthetic_csv,
                     const std::filesystem::path& reference_csv) {
    auto synthetic = ReferenceTable::load_csv(synthetic_csv);
    auto reference = ReferenceTable::load_csv(reference_csv);
    std::filesystem::create_directories(config.output_dir);
    auto out_dir = std::filesystem::path(config.output_dir);

    long n = config.discriminator_n;
    if (n <= 0) n = std::min(synthetic.row_count(), reference.row_count());
    DiscriminatorOptions options;
    options.classifier = config.classifier;
    options.gbdt = config.gbdt;
    options.workers = config.workers;
    auto report = discriminator_test(synthetic, reference, n, config.discriminator_seeds,
                                     rng::derive_seed(config.seed, "discriminate"), options);

    write_text_file(out_dir / "discriminator.json", report.to_json().dump(2) + "\n");
    csv::write_file(out_dir / "discriminator_per_seed.csv", report.per_seed_csv());
    write_sidecar(out_dir / "discriminate.meta.json", config, "discriminate", nullptr,
                  {{"synthetic", synthetic_csv.string()},
                   {"reference", reference_csv.string()},
                   {"n_per_side", n},
                   {"mean_accuracy", report.mean_accuracy},
                   {"tv_lower_bound", report.tv_lower_bound}});
    return kExitOk;
}

int cmd_baseline(const RunConfig& config) {
    if (config.reference_path.empty()) throw Error("baseline: reference table path required");
    auto reference = ReferenceTable::load_csv(config.reference_path, nullptr, config.subgroup_column);
    std::filesystem::create_directories(config.output_dir);
    auto out_dir = std::filesystem::path(config.output_dir);

    DiscriminatorOptions options;
    options.classifier = config.classifier;
    options.gbdt = config.gbdt;
    options.workers = config.workers;
    auto rows = subgroup_vs_rest_baseline(reference, config.discriminator_n,
                                          config.discriminator_seeds,
                                          rng::derive_seed(config.seed, "baseline"), options);

    csv::Table t;
    t.header = {"subgroup", "n", "mean_accuracy", "stddev_accuracy", "seeds", "tv_lower_bound"};
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        t.rows.push_back({row.subgroup, std::to_string(row.n), csv::format_double(row.mean_accuracy),
                          csv::format_double(row.stddev_accuracy), std::to_string(row.seeds),
                          csv::format_double(row.tv_lower_bound)});
        j.push_back({{"subgroup", row.subgroup},
                     {"n", row.n},
                     {"mean_accuracy", row.mean_accuracy},
                     {"stddev_accuracy", row.stddev_accuracy},
                     {"seeds", row.seeds},
                     {"tv_lower_bound", row.tv_lower_bound}});
    }
    csv::write_file(out_dir / "baseline.csv", t);
    write_text_file(out_dir / "baseline.json", j.dump(2) + "\n");
    write_sidecar(out_dir / "baseline.meta.json", config, "baseline", nullptr,
                  {{"reference", config.reference_path}});
    return kExitOk;
}

int cmd_dump_prompts(const RunConfig& config, std::ostream& out) {
    auto questionnaire = load_questionnaire(config.questionnaire_path);
    const auto& labels = LabelSet::by_name(config.label_set);
    auto style = prompt_style_from_name(config.prompt_style);
    for (const auto& q : questionnaire.questions) {
        auto prompt = render_prompt(q, labels, Permutation::identity(q.option_count()), style);
        out << "### " << q.id << " (k=" << q.option_count() << ")\n";
        out << prompt.text << "\n";
        out << "### end\n";
    }
    return kExitOk;
}

int cmd_export_fixture(const RunConfig& config, const std::filesystem::path& out_path) {
    DiskCache cache(config.resolved_cache_dir());
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("export-fixture: cannot write " + out_path.string());
    cache.export_fixture(out);
    return kExitOk;
}

}  // namespace surveylm
