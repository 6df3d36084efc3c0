#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "surveylm/backend.hpp"
#include "surveylm/cache.hpp"
#include "surveylm/discriminator.hpp"
#include "surveylm/generate.hpp"

namespace surveylm {

struct BackendConfig {
    std::string kind = "synthetic";  // synthetic | fixture | openai | openai-chat
    std::string endpoint;
    std::string model = "synthetic";
    std::string api_key_env = "OPENAI_API_KEY";
    int top_logprobs = 5;
    double requests_per_second = 0;
    std::string system_prompt = kDefaultChatSystemPrompt;
    std::string fixture_path;
    std::string synthetic_spec_path;

    bool is_openai() const { return kind == "openai" || kind == "openai-chat"; }
};

struct RunConfig {
    BackendConfig backend;
    std::string questionnaire_path;
    std::string label_set = "alpha";
    std::string prompt_style = "standard";
    long permutation_cap = -1;  // -1: 5000, or 50 against OpenAI-style endpoints
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::string cache_dir;  // empty: <output_dir>/cache
    int workers = 1;
    bool plot_data = false;

    // adjust
    long chi2_samples = 3000;
    bool run_chi2 = true;
    bool randomize_labels = false;

    // align
    std::string reference_path;
    std::string responses_path;  // reuse a survey/adjust artifact instead of querying
    std::string subgroup_column = ReferenceTable::kSubgroupColumn;
    bool weighted = false;
    std::string metric = "kl";
    double epsilon = 1e-9;

    // generate
    long generate_n = -1;  // -1: 100000, or 500 against OpenAI-style endpoints
    std::string sequential_mode = "bullet_summary";
    std::string adjustment = "raw";
    long step_permutation_cap = 50;
    int token_budget = 1024;
    bool apply_ask_if = false;
    long max_rows_per_run = 0;

    // discriminate / baseline
    long discriminator_n = 0;  // 0: as many rows as both sides afford
    int discriminator_seeds = 100;
    std::string classifier = "gbdt";
    GbdtParams gbdt;

    long resolved_permutation_cap() const;
    long resolved_generate_n() const;
    std::filesystem::path resolved_cache_dir() const;

    /// Overwrites only the fields present in the JSON object.
    void apply_json(const nlohmann::json& j);
    void apply_json_file(const std::filesystem::path& path);
    /// Fills settings from SURVEYLM_* environment variables (lowest precedence).
    void apply_env();
    nlohmann::ordered_json to_json() const;
};

struct BackendHandle {
    std::unique_ptr<DiskCache> cache;
    std::unique_ptr<Backend> backend;
};

BackendHandle make_backend(const RunConfig& config);

/// Exit codes: 0 success, 2 partial (some questions failed), 1 fatal.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

int cmd_survey(const RunConfig& config);
int cmd_adjust(const RunConfig& config);
int cmd_align(const RunConfig& config);
int cmd_generate(const RunConfig& config);
int cmd_discriminate(const RunConfig& config, const std::filesystem::path& synthetic_csv,
                     const std::filesystem::path& reference_csv);
int cmd_baseline(const RunConfig& config);
int cmd_dump_prompts(const RunConfig& config, std::ostream& out);
int cmd_export_fixture(const RunConfig& config, const std::filesystem::path& out_path);

/// Reads a survey/adjust responses artifact back into distributions.
ResponseMap read_responses_csv(const std::filesystem::path& path, const Questionnaire& questionnaire);

}  // namespace surveylm
