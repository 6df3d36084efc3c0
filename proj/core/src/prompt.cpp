#include "surveylm/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "surveylm/rng.hpp"

namespace surveylm {

namespace {

LabelSet make_alpha() {
    LabelSet s;
    s.name = "alpha";
    for (char c = 'A'; c <= 'Z'; ++c) s.labels.push_back(std::string(1, c));
    return s;
}

LabelSet make_ai() {
    LabelSet s = make_alpha();
    s.name = "a-i-swap";
    s.labels[1] = "I";  // "B" replaced by "I"
    s.labels[8] = "B";  // keep labels unique
    return s;
}

LabelSet make_balanced() {
    LabelSet s;
    s.name = "balanced-frequency";
    for (const char* l : {"R", "S", "N", "L", "O", "T", "M", "P", "W", "U", "Y", "V"}) {
        s.labels.push_back(l);
    }
    return s;
}

}  // namespace

const LabelSet& LabelSet::alphabet() {
    static const LabelSet s = make_alpha();
    return s;
}

const LabelSet& LabelSet::a_i_swap() {
    static const LabelSet s = make_ai();
    return s;
}

const LabelSet& LabelSet::balanced_frequency() {
    static const LabelSet s = make_balanced();
    return s;
}

const LabelSet& LabelSet::by_name(std::string_view name) {
    if (name == "alpha") return alphabet();
    if (name == "a-i-swap" || name == "ai") return a_i_swap();
    if (name == "balanced-frequency" || name == "rsn") return balanced_frequency();
    throw Error("label set: unknown name '" + std::string(name) + "'");
}

Permutation::Permutation(std::vector<int> slot_to_index) : map_(std::move(slot_to_index)) {
    std::vector<bool> seen(map_.size(), false);
    for (int v : map_) {
        if (v < 0 || static_cast<std::size_t>(v) >= map_.size() || seen[static_cast<std::size_t>(v)]) {
            throw Error("permutation: not a bijection on {0..k-1}");
        }
        seen[static_cast<std::size_t>(v)] = true;
    }
}

Permutation Permutation::identity(int k) {
    std::vector<int> m(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) m[static_cast<std::size_t>(i)] = i;
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::vector<int> inv(map_.size());
    for (std::size_t slot = 0; slot < map_.size(); ++slot) {
        inv[static_cast<std::size_t>(map_[slot])] = static_cast<int>(slot);
    }
    return Permutation(std::move(inv));
}

PermutationPlan enumerate_permutations(int k, long cap, std::uint64_t seed) {
    if (k < 2) throw Error("enumerate_permutations: k must be >= 2");
    if (cap < 1) throw Error("enumerate_permutations: cap must be >= 1");
    PermutationPlan plan;
    plan.k = k;
    plan.seed = seed;

    double factorial = 1;
    for (int i = 2; i <= k; ++i) factorial *= i;

    if (factorial <= static_cast<double>(cap)) {
        std::vector<int> current(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) current[static_cast<std::size_t>(i)] = i;
        do {
            plan.permutations.emplace_back(current);
        } while (std::next_permutation(current.begin(), current.end()));
        plan.full_enumeration = true;
        return plan;
    }

    rng::Stream stream(seed);
    plan.full_enumeration = false;
    if (k <= 9) {
        // Small enough to enumerate: partial shuffle gives an exact
        // without-replacement sample even when cap is close to k!.
        std::vector<std::vector<int>> all;
        all.reserve(static_cast<std::size_t>(factorial));
        std::vector<int> current(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) current[static_cast<std::size_t>(i)] = i;
        do {
            all.push_back(current);
        } while (std::next_permutation(current.begin(), current.end()));
        auto picks = stream.sample_indices(static_cast<long>(all.size()), cap);
        for (long idx : picks) plan.permutations.emplace_back(all[static_cast<std::size_t>(idx)]);
    } else {
        // k! dwarfs any practical cap; rejection on duplicates is cheap.
        std::set<std::vector<int>> seen;
        while (static_cast<long>(plan.permutations.size()) < cap) {
            auto p = stream.permutation(k);
            if (seen.insert(p).second) plan.permutations.emplace_back(std::move(p));
        }
    }
    return plan;
}

PromptStyle prompt_style_from_name(std::string_view name) {
    if (name == "standard") return PromptStyle::Standard;
    if (name == "p1") return PromptStyle::P1;
    if (name == "p2") return PromptStyle::P2;
    if (name == "p3") return PromptStyle::P3;
    if (name == "p4") return PromptStyle::P4;
    if (name == "p5") return PromptStyle::P5;
    if (name == "p6") return PromptStyle::P6;
    if (name == "p7" || name == "chat") return PromptStyle::P7;
    if (name == "p8" || name == "interview") return PromptStyle::P8;
    throw Error("prompt style: unknown name '" + std::string(name) + "'");
}

std::string prompt_style_name(PromptStyle style) {
    switch (style) {
        case PromptStyle::Standard: return "standard";
        case PromptStyle::P1: return "p1";
        case PromptStyle::P2: return "p2";
        case PromptStyle::P3: return "p3";
        case PromptStyle::P4: return "p4";
        case PromptStyle::P5: return "p5";
        case PromptStyle::P6: return "p6";
        case PromptStyle::P7: return "chat";
        case PromptStyle::P8: return "interview";
    }
    return "standard";
}

SequentialMode sequential_mode_from_name(std::string_view name) {
    if (name == "bullet_summary") return SequentialMode::BulletSummary;
    if (name == "qa_history") return SequentialMode::QaHistory;
    if (name == "interview_history") return SequentialMode::InterviewHistory;
    throw Error("sequential mode: unknown name '" + std::string(name) + "'");
}

std::string sequential_mode_name(SequentialMode mode) {
    switch (mode) {
        case SequentialMode::BulletSummary: return "bullet_summary";
        case SequentialMode::QaHistory: return "qa_history";
        case SequentialMode::InterviewHistory: return "interview_history";
    }
    return "bullet_summary";
}

namespace {

// Fixed preamble sentences for the ablation styles.
const char* kP1Prefix = "Bellow is a question from the American Community Survey.";
const char* kP2Prefix = "Answer the following question from the American Community Survey.";
const char* kP3Prefix = "Answer the following question as if you lived at a household in the United States.";
const char* kP5Prefix =
    "Please read the following multiple-choice question carefully and select ONE of the listed options.";
const char* kP6Prefix =
    "Please read the multiple-choice question below carefully and select ONE of the listed options. "
    "Here is an example of the format:\nQuestion: Question 1\nA. Option 1\nB. Option 2\nC. Option 3\nAnswer: C";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

// Rule-based third-person -> second-person rewrite for the P4 ablation.
std::string to_second_person(std::string text) {
    replace_all(text, "Does this person", "Do you");
    replace_all(text, "does this person", "do you");
    replace_all(text, "Is this person", "Are you");
    replace_all(text, "is this person", "are you");
    replace_all(text, "Has this person", "Have you");
    replace_all(text, "has this person", "have you");
    replace_all(text, "Was this person", "Were you");
    replace_all(text, "was this person", "were you");
    replace_all(text, "this person's", "your");
    replace_all(text, "This person's", "Your");
    replace_all(text, "this person", "you");
    replace_all(text, "This person", "You");
    return text;
}

struct SlotLayout {
    std::vector<std::string> labels;
    std::vector<std::string> codes;
    std::vector<const AnswerOption*> options;
};

SlotLayout layout_slots(const Question& question, const LabelSet& label_set,
                        const Permutation& order, const Permutation* label_assignment) {
    const int k = question.option_count();
    if (order.size() != k) {
        throw Error("render: permutation size " + std::to_string(order.size()) +
                    " does not match k=" + std::to_string(k) + " for '" + question.id + "'");
    }
    if (static_cast<int>(label_set.labels.size()) < k) {
        throw Error("render: label set '" + label_set.name + "' too short for k=" + std::to_string(k));
    }
    if (label_assignment && label_assignment->size() != k) {
        throw Error("render: label assignment size does not match k for '" + question.id + "'");
    }
    SlotLayout s;
    for (int slot = 0; slot < k; ++slot) {
        int label_idx = label_assignment ? label_assignment->at(slot) : slot;
        const auto& option = question.answers[static_cast<std::size_t>(order.at(slot))];
        s.labels.push_back(label_set.labels[static_cast<std::size_t>(label_idx)]);
        s.codes.push_back(option.code);
        s.options.push_back(&option);
    }
    return s;
}

// "<label>. <choice>" lines, one per slot.
std::string options_block(const SlotLayout& slots) {
    std::string out;
    for (std::size_t i = 0; i < slots.labels.size(); ++i) {
        out += slots.labels[i];
        out += ". ";
        out += slots.options[i]->text;
        if (i + 1 < slots.labels.size()) out += '\n';
    }
    return out;
}

std::string question_body(const Question& question, const SlotLayout& slots, PromptStyle style,
                          bool terminal) {
    std::string text = style == PromptStyle::P4 ? to_second_person(question.text) : question.text;
    std::string opts = options_block(slots);
    std::string body;
    switch (style) {
        case PromptStyle::P7:
            body = "Human: " + text + "\nHere are the options:\n" + opts +
                   "\nAssistant: If had to select one of the options, my answer would be";
            if (!terminal) throw Error("render: chat style has no history form");
            return body;
        case PromptStyle::P8:
            body = "Interviewer: " + text + "\n" + opts + "\nMe:";
            return body;
        default:
            body = "Question: " + text + "\n" + opts + "\nAnswer:";
            return body;
    }
}

std::string style_prefix(PromptStyle style) {
    switch (style) {
        case PromptStyle::P1: return std::string(kP1Prefix) + "\n";
        case PromptStyle::P2: return std::string(kP2Prefix) + "\n";
        case PromptStyle::P3: return std::string(kP3Prefix) + "\n";
        case PromptStyle::P5: return std::string(kP5Prefix) + "\n";
        case PromptStyle::P6: return std::string(kP6Prefix) + "\n";
        default: return "";
    }
}

}  // namespace

RenderedPrompt render_prompt(const Question& question, const LabelSet& label_set,
                             const Permutation& order, PromptStyle style,
                             const Permutation* label_assignment) {
    SlotLayout slots = layout_slots(question, label_set, order, label_assignment);
    RenderedPrompt r;
    r.question_id = question.id;
    r.text = style_prefix(style) + question_body(question, slots, style, /*terminal=*/true);
    r.slot_labels = slots.labels;
    r.slot_answer_codes = slots.codes;
    for (int slot = 0; slot < static_cast<int>(slots.labels.size()); ++slot) {
        r.label_to_answer[slots.labels[static_cast<std::size_t>(slot)]] = order.at(slot);
    }
    return r;
}

RenderedPrompt render_sequential_prompt(const Questionnaire& questionnaire,
                                        std::span<const AnsweredQuestion> prefix,
                                        const Question& next, const LabelSet& label_set,
                                        const Permutation& order, PromptStyle style,
                                        SequentialMode mode) {
    int next_pos = questionnaire.index_of(next.id);
    if (next_pos < 0) throw Error("render_sequential: '" + next.id + "' not in questionnaire");
    int last_pos = -1;
    for (const auto& answered : prefix) {
        if (!answered.question) throw Error("render_sequential: null question in prefix");
        int pos = questionnaire.index_of(answered.question->id);
        if (pos < 0 || pos >= next_pos || pos <= last_pos) {
            throw Error("render_sequential: prefix out of order at '" + answered.question->id + "'");
        }
        if (answered.answer_index < 0 || answered.answer_index >= answered.question->option_count()) {
            throw Error("render_sequential: missing prior answer for '" + answered.question->id + "'");
        }
        last_pos = pos;
    }

    std::string history;
    for (const auto& answered : prefix) {
        const Question& q = *answered.question;
        SlotLayout slots = layout_slots(q, label_set, answered.order, nullptr);
        int answer_slot = answered.order.inverse().at(answered.answer_index);
        const std::string& label = slots.labels[static_cast<std::size_t>(answer_slot)];
        switch (mode) {
            case SequentialMode::BulletSummary:
                history += "- " + q.id + ": " +
                           q.answers[static_cast<std::size_t>(answered.answer_index)].text + "\n";
                break;
            case SequentialMode::QaHistory:
                history += "Question: " + q.text + "\n" + options_block(slots) + "\nAnswer: " + label + "\n";
                break;
            case SequentialMode::InterviewHistory:
                history += "Interviewer: " + q.text + "\n" + options_block(slots) + "\nMe: " + label + "\n";
                break;
        }
    }

    PromptStyle block_style = style;
    if (mode == SequentialMode::QaHistory && style == PromptStyle::P8) block_style = PromptStyle::Standard;
    if (mode == SequentialMode::InterviewHistory) block_style = PromptStyle::P8;

    RenderedPrompt r = render_prompt(next, label_set, order, block_style, nullptr);
    r.text = history + r.text;
    return r;
}

int approximate_token_count(std::string_view text) {
    long words = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return static_cast<int>(std::ceil(static_cast<double>(words) * 1.5));
}

}  // namespace surveylm
