#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "surveylm/backend.hpp"
#include "surveylm/cache.hpp"

namespace surveylm {

struct HttpBackendConfig {
    std::string endpoint;  // e.g. "http://127.0.0.1:8080" or "https://api.example.com"
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    bool chat = false;  // chat-completions wire format instead of completions
    int top_logprobs = 5;
    std::string system_prompt;          // injected for chat backends
    double requests_per_second = 0;     // 0 = unlimited
    int max_attempts = 5;
    int backoff_initial_ms = 250;       // exponential backoff base, with jitter
    int timeout_seconds = 60;
};

/// Token-bucket rate limiter shared by a backend's workers.
class TokenBucket {
public:
    explicit TokenBucket(double tokens_per_second, double burst = 1.0);
    void acquire();

private:
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
};

/// OpenAI-compatible scoring client: completions or chat-completions with
/// max_tokens=1, temperature=0, logprobs=top-k. Consults the disk cache
/// first; retries transient failures with exponential backoff; records the
/// raw wire response for audit.
class HttpBackend : public Backend {
public:
    HttpBackend(HttpBackendConfig config, DiskCache* cache);
    ~HttpBackend() override;

    LabelLogProbs query(const LabelQuery& q) override;
    std::string model_name() const override { return config_.model; }
    std::string endpoint_id() const override { return config_.endpoint; }
    Stats stats() const override;

    DecodingParams decoding_params() const;
    nlohmann::ordered_json build_request(const LabelQuery& q) const;

    /// Extracts candidate-label probabilities from a raw response body.
    /// Tokens matching either "<label>" or " <label>" count toward the label.
    static LabelLogProbs parse_response_body(const std::string& body,
                                             std::span<const std::string> labels, bool chat);

private:
    std::string fetch(const LabelQuery& q);

    HttpBackendConfig config_;
    DiskCache* cache_;
    std::unique_ptr<TokenBucket> limiter_;
    mutable std::mutex stats_mutex_;
    Stats stats_;
};

/// Replay-only backend over a recorded fixture file (JSON lines of
/// {key, request, response}). Misses are errors: a fixture run must be
/// complete to be reproducible.
class FixtureBackend : public Backend {
public:
    FixtureBackend(const std::filesystem::path& fixture_file, std::string endpoint,
                   std::string model, bool chat, int top_logprobs, std::string system_prompt = "");

    LabelLogProbs query(const LabelQuery& q) override;
    std::string model_name() const override { return model_; }
    std::string endpoint_id() const override { return endpoint_; }
    Stats stats() const override { return stats_; }

    std::size_t record_count() const { return responses_.size(); }

private:
    std::map<std::string, std::string> responses_;  // key hex -> raw body
    std::string endpoint_;
    std::string model_;
    bool chat_;
    DecodingParams params_;
    Stats stats_;
};

}  // namespace surveylm
