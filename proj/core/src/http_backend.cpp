#include "surveylm/http_backend.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>

namespace surveylm {

TokenBucket::TokenBucket(double tokens_per_second, double burst)
    : rate_(tokens_per_second),
      capacity_(std::max(burst, 1.0)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
    if (rate_ <= 0) return;
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        double wait_s = (1.0 - tokens_) / rate_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

HttpBackend::HttpBackend(HttpBackendConfig config, DiskCache* cache)
    : config_(std::move(config)), cache_(cache) {
    if (config_.requests_per_second > 0) {
        limiter_ = std::make_unique<TokenBucket>(config_.requests_per_second);
    }
}

HttpBackend::~HttpBackend() = default;

DecodingParams HttpBackend::decoding_params() const {
    DecodingParams p;
    p.max_tokens = 1;
    p.temperature = 0.0;
    p.top_logprobs = config_.top_logprobs;
    p.system_prompt = config_.chat ? config_.system_prompt : "";
    return p;
}

nlohmann::ordered_json HttpBackend::build_request(const LabelQuery& q) const {
    nlohmann::ordered_json body;
    body["model"] = config_.model;
    if (config_.chat) {
        nlohmann::ordered_json messages = nlohmann::ordered_json::array();
        if (!config_.system_prompt.empty()) {
            messages.push_back({{"role", "system"}, {"content", config_.system_prompt}});
        }
        messages.push_back({{"role", "user"}, {"content", q.prompt}});
        body["messages"] = std::move(messages);
        body["max_tokens"] = 1;
        body["temperature"] = 0.0;
        body["logprobs"] = true;
        body["top_logprobs"] = config_.top_logprobs;
    } else {
        body["prompt"] = q.prompt;
        body["max_tokens"] = 1;
        body["temperature"] = 0.0;
        body["logprobs"] = config_.top_logprobs;
    }
    return body;
}

LabelLogProbs HttpBackend::parse_response_body(const std::string& body,
                                               std::span<const std::string> labels, bool chat) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("http backend: unparseable response: ") + e.what());
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw BackendError("http backend: response has no choices");
    }
    const auto& choice = j["choices"][0];

    // token string -> probability over the top-k listing
    std::map<std::string, double> top;
    if (chat) {
        if (!choice.contains("logprobs") || !choice["logprobs"].contains("content") ||
            choice["logprobs"]["content"].empty()) {
            throw BackendError("http backend: chat response lacks logprobs.content");
        }
        for (const auto& entry : choice["logprobs"]["content"][0]["top_logprobs"]) {
            top[entry.value("token", "")] = std::exp(entry.value("logprob", -1e30));
        }
    } else {
        if (!choice.contains("logprobs") || !choice["logprobs"].contains("top_logprobs") ||
            choice["logprobs"]["top_logprobs"].empty()) {
            throw BackendError("http backend: response lacks logprobs.top_logprobs");
        }
        for (const auto& [token, lp] : choice["logprobs"]["top_logprobs"][0].items()) {
            top[token] = std::exp(lp.get<double>());
        }
    }

    LabelLogProbs out;
    out.full_visibility = false;
    for (const auto& [token, p] : top) out.reported_mass += p;
    // Match rule: a candidate counts the mass of both its bare and
    // leading-space token forms (tokenizers disagree on which one exists).
    for (const auto& label : labels) {
        double p = 0;
        bool seen = false;
        if (auto it = top.find(label); it != top.end()) {
            p += it->second;
            seen = true;
        }
        if (auto it = top.find(" " + label); it != top.end()) {
            p += it->second;
            seen = true;
        }
        if (seen) out.observed[label] = std::min(p, 1.0);
    }
    return out;
}

std::string HttpBackend::fetch(const LabelQuery& q) {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const std::string path = config_.chat ? "/v1/chat/completions" : "/v1/completions";
    const std::string payload = build_request(q).dump();

    static thread_local std::mt19937_64 jitter_rng(std::random_device{}());
    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            double base = config_.backoff_initial_ms * std::pow(2.0, attempt - 1);
            double jitter = 0.5 + static_cast<double>(jitter_rng() >> 11) * 0x1.0p-53;
            std::this_thread::sleep_for(std::chrono::milliseconds(
                static_cast<long>(base * jitter)));
        }
        if (limiter_) limiter_->acquire();
        {
            std::lock_guard<std::mutex> lock(stats_mutex_);
            ++stats_.network_calls;
        }
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        last_error = "HTTP " + std::to_string(res->status);
        bool transient = res->status == 429 || res->status >= 500;
        if (!transient) break;
    }
    throw BackendError("http backend: request failed after retries (" + last_error + ")");
}

LabelLogProbs HttpBackend::query(const LabelQuery& q) {
    {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        ++stats_.queries;
    }
    auto key = QueryCacheKey::compute(config_.endpoint, config_.model, q, decoding_params());
    if (cache_) {
        if (auto rec = cache_->get(key)) {
            {
                std::lock_guard<std::mutex> lock(stats_mutex_);
                ++stats_.cache_hits;
            }
            return parse_response_body(rec->response_body, q.labels, config_.chat);
        }
    }
    std::string body = fetch(q);
    if (cache_) {
        CacheRecord rec;
        rec.key = key.hex;
        rec.request = build_request(q);
        rec.response_body = body;
        cache_->put(rec);
    }
    return parse_response_body(body, q.labels, config_.chat);
}

Backend::Stats HttpBackend::stats() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return stats_;
}

FixtureBackend::FixtureBackend(const std::filesystem::path& fixture_file, std::string endpoint,
                               std::string model, bool chat, int top_logprobs,
                               std::string system_prompt)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), chat_(chat) {
    params_.max_tokens = 1;
    params_.temperature = 0.0;
    params_.top_logprobs = top_logprobs;
    params_.system_prompt = chat_ ? system_prompt : "";

    std::ifstream in(fixture_file, std::ios::binary);
    if (!in) throw ParseError("fixture: cannot open " + fixture_file.string());
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("fixture: bad JSON at line " + std::to_string(line_no) + ": " + e.what());
        }
        responses_[j.value("key", "")] = j.value("response", "");
    }
}

LabelLogProbs FixtureBackend::query(const LabelQuery& q) {
    ++stats_.queries;
    auto key = QueryCacheKey::compute(endpoint_, model_, q, params_);
    auto it = responses_.find(key.hex);
    if (it == responses_.end()) {
        throw BackendError("fixture: miss for key " + key.hex + " (replay-only mode)");
    }
    ++stats_.cache_hits;
    return HttpBackend::parse_response_body(it->second, q.labels, chat_);
}

}  // namespace surveylm
