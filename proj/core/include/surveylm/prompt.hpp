#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surveylm/error.hpp"
#include "surveylm/questionnaire.hpp"

namespace surveylm {

/// Ordered choice labels. The default is the alphabet; alternatives cover the
/// A/I swap and the twelve-letter set with balanced English word frequency.
struct LabelSet {
    std::string name;
    std::vector<std::string> labels;

    static const LabelSet& alphabet();
    static const LabelSet& a_i_swap();
    static const LabelSet& balanced_frequency();
    static const LabelSet& by_name(std::string_view name);

    bool operator==(const LabelSet&) const = default;
};

/// Bijection slot -> index on {0..k-1} (slot = presentation position).
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<int> slot_to_index);
    static Permutation identity(int k);

    int size() const { return static_cast<int>(map_.size()); }
    int at(int slot) const { return map_[static_cast<std::size_t>(slot)]; }
    std::span<const int> slots() const { return map_; }
    Permutation inverse() const;

    bool operator==(const Permutation&) const = default;

private:
    std::vector<int> map_;
};

struct PermutationPlan {
    int k = 0;
    std::vector<Permutation> permutations;
    bool full_enumeration = false;
    std::uint64_t seed = 0;
};

/// All k! permutations when k! <= cap (full-enumeration flag set), otherwise
/// `cap` distinct permutations sampled without replacement from the given
/// seed. Deterministic for a fixed seed.
PermutationPlan enumerate_permutations(int k, long cap, std::uint64_t seed);

enum class PromptStyle { Standard, P1, P2, P3, P4, P5, P6, P7, P8 };

/// Accepts "standard", "p1".."p8", and the aliases "chat" (P7) and
/// "interview" (P8).
PromptStyle prompt_style_from_name(std::string_view name);
std::string prompt_style_name(PromptStyle style);

enum class SequentialMode { BulletSummary, QaHistory, InterviewHistory };
SequentialMode sequential_mode_from_name(std::string_view name);
std::string sequential_mode_name(SequentialMode mode);

/// System prompt injected for top-k-restricted chat APIs.
inline constexpr const char* kDefaultChatSystemPrompt = "Please respond with a single letter.";

struct RenderedPrompt {
    std::string text;
    std::string question_id;
    std::vector<std::string> slot_labels;        // label shown at each slot
    std::vector<std::string> slot_answer_codes;  // answer code at each slot
    std::map<std::string, int> label_to_answer;  // label -> answer index
};

/// Renders one question under a choice ordering. `label_assignment`, when
/// given, permutes which label lands on which slot (the joint-randomization
/// mode); by default labels run alphabetically down the slots.
RenderedPrompt render_prompt(const Question& question, const LabelSet& labels,
                             const Permutation& order, PromptStyle style,
                             const Permutation* label_assignment = nullptr);

struct AnsweredQuestion {
    const Question* question = nullptr;
    Permutation order;  // choice ordering shown when this question was asked
    int answer_index = 0;
};

/// Renders the next question with the answered prefix in context. The prefix
/// must cover questions strictly before `next` in questionnaire order.
RenderedPrompt render_sequential_prompt(const Questionnaire& questionnaire,
                                        std::span<const AnsweredQuestion> prefix,
                                        const Question& next, const LabelSet& labels,
                                        const Permutation& order, PromptStyle style,
                                        SequentialMode mode);

/// Default token counter: whitespace-word count x 1.5 safety factor, rounded up.
int approximate_token_count(std::string_view text);

using TokenCounter = std::function<int(std::string_view)>;

}  // namespace surveylm
