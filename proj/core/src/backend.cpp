#include "surveylm/backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace surveylm {

LabelQuery LabelQuery::from_render(const RenderedPrompt& r) {
    LabelQuery q;
    q.prompt = r.text;
    q.labels = r.slot_labels;
    q.question_id = r.question_id;
    q.slot_answer_codes = r.slot_answer_codes;
    return q;
}

void LabelLogProbs::validate() const {
    for (const auto& [label, p] : observed) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error("label probs: probability for '" + label + "' outside [0,1]");
        }
    }
    if (reported_mass > 1.0 + 1e-9) {
        throw Error("label probs: reported top-k mass exceeds 1");
    }
}

LabelLogProbs query_label_logits(Backend& backend, const LabelQuery& q) {
    if (q.labels.empty()) throw Error("query_label_logits: no candidate labels");
    LabelLogProbs result = backend.query(q);
    result.validate();
    return result;
}

std::vector<double> renormalize_topk(const LabelLogProbs& observed, std::span<const std::string> labels) {
    if (labels.empty()) throw Error("renormalize_topk: no candidate labels");
    observed.validate();

    double smallest_observed = 1.0;
    int observed_count = 0;
    for (const auto& label : labels) {
        auto it = observed.observed.find(label);
        if (it != observed.observed.end()) {
            smallest_observed = std::min(smallest_observed, it->second);
            ++observed_count;
        }
    }
    if (observed_count == 0) {
        throw BackendError("renormalize_topk: no candidate label observed (unusable query)");
    }

    const double remaining = std::max(0.0, 1.0 - observed.reported_mass);
    const double unseen_value = std::min(remaining, smallest_observed);

    std::vector<double> probs(labels.size());
    double total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = observed.observed.find(labels[i]);
        probs[i] = it != observed.observed.end() ? it->second : unseen_value;
        total += probs[i];
    }
    if (total <= 0) throw BackendError("renormalize_topk: zero total candidate mass");
    for (double& p : probs) p /= total;
    return probs;
}

double SyntheticModelSpec::content(const std::string& question_id, const std::string& code) const {
    auto qit = content_scores.find(question_id);
    if (qit == content_scores.end()) {
        if (default_content_score) return *default_content_score;
        throw Error("synthetic spec: missing content scores for question '" + question_id + "'");
    }
    auto cit = qit->second.find(code);
    if (cit == qit->second.end()) {
        if (default_content_score) return *default_content_score;
        throw Error("synthetic spec: missing content score for '" + question_id + "' code '" + code + "'");
    }
    return cit->second;
}

SyntheticModelSpec SyntheticModelSpec::from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synthetic spec: malformed JSON: ") + e.what());
    }
    SyntheticModelSpec spec;
    spec.temperature = j.value("temperature", 1.0);
    if (!(spec.temperature > 0)) throw ParseError("synthetic spec: temperature must be > 0");
    if (j.contains("label_bonus")) {
        for (const auto& [label, v] : j["label_bonus"].items()) {
            spec.label_bonus[label] = v.get<double>();
        }
    }
    if (j.contains("position_bonus")) {
        for (const auto& v : j["position_bonus"]) spec.position_bonus.push_back(v.get<double>());
    }
    if (j.contains("questions")) {
        for (const auto& [qid, scores] : j["questions"].items()) {
            if (!scores.contains("content_scores")) continue;
            for (const auto& [code, v] : scores["content_scores"].items()) {
                double score = v.get<double>();
                if (!std::isfinite(score)) throw ParseError("synthetic spec: non-finite score");
                spec.content_scores[qid][code] = score;
            }
        }
    }
    if (j.contains("default_content_score")) {
        spec.default_content_score = j["default_content_score"].get<double>();
    }
    return spec;
}

SyntheticModelSpec SyntheticModelSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("synthetic spec: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string SyntheticModelSpec::to_json_text() const {
    nlohmann::ordered_json j;
    j["temperature"] = temperature;
    j["label_bonus"] = label_bonus;
    j["position_bonus"] = position_bonus;
    nlohmann::ordered_json questions;
    for (const auto& [qid, scores] : content_scores) {
        questions[qid] = {{"content_scores", scores}};
    }
    j["questions"] = std::move(questions);
    if (default_content_score) j["default_content_score"] = *default_content_score;
    return j.dump(2) + "\n";
}

namespace {

LabelLogProbs score_slots(const SyntheticModelSpec& spec, const std::string& question_id,
                          std::span<const std::string> slot_labels,
                          std::span<const std::string> slot_codes) {
    const std::size_t k = slot_labels.size();
    std::vector<double> scores(k);
    for (std::size_t slot = 0; slot < k; ++slot) {
        double s = spec.content(question_id, slot_codes[slot]);
        auto lit = spec.label_bonus.find(slot_labels[slot]);
        if (lit != spec.label_bonus.end()) s += lit->second;
        if (slot < spec.position_bonus.size()) s += spec.position_bonus[slot];
        scores[slot] = s / spec.temperature;
    }
    double max_score = *std::max_element(scores.begin(), scores.end());
    double z = 0;
    for (double s : scores) z += std::exp(s - max_score);
    LabelLogProbs out;
    for (std::size_t slot = 0; slot < k; ++slot) {
        out.observed[slot_labels[slot]] = std::exp(scores[slot] - max_score) / z;
    }
    out.reported_mass = 1.0;
    out.full_visibility = true;
    return out;
}

}  // namespace

LabelLogProbs simulate_response(const SyntheticModelSpec& spec, const Question& question,
                                const LabelSet& labels, const Permutation& order,
                                const Permutation* label_assignment) {
    RenderedPrompt r = render_prompt(question, labels, order, PromptStyle::Standard, label_assignment);
    return score_slots(spec, question.id, r.slot_labels, r.slot_answer_codes);
}

SyntheticBackend::SyntheticBackend(SyntheticModelSpec spec, std::string name)
    : spec_(std::move(spec)), name_(std::move(name)) {}

LabelLogProbs SyntheticBackend::query(const LabelQuery& q) {
    if (q.slot_answer_codes.size() != q.labels.size()) {
        throw Error("synthetic backend: query lacks slot answer codes");
    }
    ++stats_.queries;
    return score_slots(spec_, q.question_id, q.labels, q.slot_answer_codes);
}

}  // namespace surveylm
