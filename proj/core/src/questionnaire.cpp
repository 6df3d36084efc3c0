#include "surveylm/questionnaire.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace surveylm {

namespace {

using ordered_json = nlohmann::ordered_json;

bool all_numeric_codes(const std::vector<AnswerOption>& answers, std::vector<double>* values) {
    values->clear();
    for (const auto& a : answers) {
        try {
            std::size_t pos = 0;
            double v = std::stod(a.code, &pos);
            if (pos != a.code.size()) return false;
            values->push_back(v);
        } catch (const std::exception&) {
            return false;
        }
    }
    return true;
}

void validate_question(const Question& q) {
    if (q.id.empty()) throw ParseError("questionnaire: question with empty id");
    if (q.answers.size() < 2) {
        throw ParseError("questionnaire: question '" + q.id + "' has fewer than 2 answers");
    }
    std::set<std::string> codes;
    for (const auto& a : q.answers) {
        if (a.code.empty()) throw ParseError("questionnaire: empty answer code in '" + q.id + "'");
        if (a.text.empty()) throw ParseError("questionnaire: empty answer text in '" + q.id + "'");
        if (!codes.insert(a.code).second) {
            throw ParseError("questionnaire: duplicate answer code '" + a.code + "' in '" + q.id + "'");
        }
    }
    if (q.kind == QuestionKind::Ordinal) {
        // List order is the total order; numeric codes must agree with it.
        std::vector<double> numeric;
        if (all_numeric_codes(q.answers, &numeric)) {
            for (std::size_t i = 1; i < numeric.size(); ++i) {
                if (numeric[i] <= numeric[i - 1]) {
                    throw ParseError("questionnaire: ordinal flag on unordered codes in '" + q.id + "'");
                }
            }
        }
    }
    if (!q.bin_edges.empty()) {
        if (q.bin_edges.size() != q.answers.size() + 1) {
            throw ParseError("questionnaire: '" + q.id + "' declares " +
                             std::to_string(q.bin_edges.size()) + " bin edges for " +
                             std::to_string(q.answers.size()) + " answers (need answers+1)");
        }
        for (std::size_t i = 1; i < q.bin_edges.size(); ++i) {
            if (!(q.bin_edges[i] > q.bin_edges[i - 1])) {
                throw ParseError("questionnaire: non-ascending bin edges in '" + q.id + "'");
            }
        }
    }
}

Question parse_question(const ordered_json& j) {
    Question q;
    q.id = j.value("id", "");
    q.text = j.value("text", "");
    std::string kind = j.value("kind", "nominal");
    if (kind == "nominal") q.kind = QuestionKind::Nominal;
    else if (kind == "ordinal") q.kind = QuestionKind::Ordinal;
    else throw ParseError("questionnaire: unknown kind '" + kind + "' in '" + q.id + "'");
    if (!j.contains("answers") || !j["answers"].is_array()) {
        throw ParseError("questionnaire: question '" + q.id + "' missing answers array");
    }
    for (const auto& ja : j["answers"]) {
        q.answers.push_back({ja.value("code", ""), ja.value("text", "")});
    }
    if (j.contains("numeric_binning")) {
        const auto& jb = j["numeric_binning"];
        if (!jb.contains("edges") || !jb["edges"].is_array()) {
            throw ParseError("questionnaire: numeric_binning without edges in '" + q.id + "'");
        }
        for (const auto& e : jb["edges"]) q.bin_edges.push_back(e.get<double>());
    }
    if (j.contains("ask_if")) {
        const auto& ja = j["ask_if"];
        AskIf gate;
        gate.question_id = ja.value("question", "");
        if (ja.contains("equals")) {
            gate.any_of.push_back(ja["equals"].get<std::string>());
        } else if (ja.contains("in")) {
            for (const auto& c : ja["in"]) gate.any_of.push_back(c.get<std::string>());
        }
        if (gate.question_id.empty() || gate.any_of.empty()) {
            throw ParseError("questionnaire: incomplete ask_if in '" + q.id + "'");
        }
        q.ask_if = std::move(gate);
    }
    return q;
}

}  // namespace

int Question::index_of_code(std::string_view code) const {
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (answers[i].code == code) return static_cast<int>(i);
    }
    return -1;
}

const Question* Questionnaire::find(std::string_view id) const {
    for (const auto& q : questions) {
        if (q.id == id) return &q;
    }
    return nullptr;
}

int Questionnaire::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (questions[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

Questionnaire parse_questionnaire(std::string_view json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("questionnaire: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("questions") || !j["questions"].is_array()) {
        throw ParseError("questionnaire: document must be {name, questions:[...]}");
    }
    Questionnaire doc;
    doc.name = j.value("name", "");
    doc.notes = j.value("notes", "");
    std::set<std::string> ids;
    for (const auto& jq : j["questions"]) {
        Question q = parse_question(jq);
        validate_question(q);
        if (!ids.insert(q.id).second) {
            throw ParseError("questionnaire: duplicate question id '" + q.id + "'");
        }
        doc.questions.push_back(std::move(q));
    }
    if (doc.questions.empty()) throw ParseError("questionnaire: no questions");
    // ask_if must point at an earlier question and at valid codes for it.
    for (std::size_t i = 0; i < doc.questions.size(); ++i) {
        const auto& gate = doc.questions[i].ask_if;
        if (!gate) continue;
        int target = doc.index_of(gate->question_id);
        if (target < 0 || static_cast<std::size_t>(target) >= i) {
            throw ParseError("questionnaire: ask_if on '" + doc.questions[i].id +
                             "' must reference an earlier question");
        }
        for (const auto& code : gate->any_of) {
            if (doc.questions[static_cast<std::size_t>(target)].index_of_code(code) < 0) {
                throw ParseError("questionnaire: ask_if on '" + doc.questions[i].id +
                                 "' references unknown code '" + code + "'");
            }
        }
    }
    return doc;
}

Questionnaire load_questionnaire(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("questionnaire: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_questionnaire(buf.str());
}

std::string serialize_questionnaire(const Questionnaire& doc) {
    ordered_json j;
    j["name"] = doc.name;
    if (!doc.notes.empty()) j["notes"] = doc.notes;
    j["questions"] = ordered_json::array();
    for (const auto& q : doc.questions) {
        ordered_json jq;
        jq["id"] = q.id;
        jq["text"] = q.text;
        jq["kind"] = q.kind == QuestionKind::Ordinal ? "ordinal" : "nominal";
        jq["answers"] = ordered_json::array();
        for (const auto& a : q.answers) {
            jq["answers"].push_back({{"code", a.code}, {"text", a.text}});
        }
        if (!q.bin_edges.empty()) jq["numeric_binning"] = {{"edges", q.bin_edges}};
        if (q.ask_if) jq["ask_if"] = {{"question", q.ask_if->question_id}, {"in", q.ask_if->any_of}};
        j["questions"].push_back(std::move(jq));
    }
    return j.dump(2) + "\n";
}

int bin_index(double value, std::span<const double> edges) {
    if (edges.size() < 2) return -1;
    if (value < edges.front() || value >= edges.back()) return -1;
    // upper_bound gives the first edge > value; the bin is the one before it.
    auto it = std::upper_bound(edges.begin(), edges.end(), value);
    return static_cast<int>(it - edges.begin()) - 1;
}

std::vector<BinnedOption> bin_numeric(std::span<const double> values, std::span<const double> edges) {
    if (edges.size() < 2) throw Error("bin_numeric: need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw Error("bin_numeric: edges must be strictly ascending");
    }
    std::vector<BinnedOption> bins;
    bins.reserve(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        std::ostringstream label;
        label << "[" << edges[i] << ", " << edges[i + 1] << ")";
        bins.push_back({{std::to_string(i + 1), label.str()}, 0});
    }
    for (double v : values) {
        int b = bin_index(v, edges);
        if (b < 0) {
            std::ostringstream msg;
            msg << "bin_numeric: value " << v << " outside [" << edges.front() << ", "
                << edges.back() << ")";
            throw Error(msg.str());
        }
        ++bins[static_cast<std::size_t>(b)].count;
    }
    return bins;
}

}  // namespace surveylm
