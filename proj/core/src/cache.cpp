#include "surveylm/cache.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "surveylm/hash.hpp"

namespace surveylm {

QueryCacheKey QueryCacheKey::compute(const std::string& endpoint, const std::string& model,
                                     const LabelQuery& query, const DecodingParams& params) {
    // Canonical JSON payload; key order is fixed by construction order.
    nlohmann::ordered_json j;
    j["endpoint"] = endpoint;
    j["model"] = model;
    j["prompt"] = query.prompt;
    j["labels"] = query.labels;
    j["params"] = {{"max_tokens", params.max_tokens},
                   {"temperature", params.temperature},
                   {"top_logprobs", params.top_logprobs},
                   {"system_prompt", params.system_prompt}};
    return QueryCacheKey{sha256_hex(j.dump())};
}

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path DiskCache::record_path(const std::string& key_hex) const {
    return dir_ / key_hex.substr(0, 2) / (key_hex + ".json");
}

std::optional<CacheRecord> DiskCache::get(const QueryCacheKey& key) const {
    std::ifstream in(record_path(key.hex), std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // partial or corrupt record: treat as a miss
    }
    CacheRecord rec;
    rec.key = j.value("key", "");
    rec.request = j.value("request", nlohmann::json::object());
    rec.response_body = j.value("response", "");
    if (rec.key != key.hex) return std::nullopt;
    return rec;
}

void DiskCache::put(const CacheRecord& record) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto path = record_path(record.key);
    if (std::filesystem::exists(path)) return;  // append-only: first writer wins
    std::filesystem::create_directories(path.parent_path());
    nlohmann::ordered_json j;
    j["key"] = record.key;
    j["request"] = record.request;
    j["response"] = record.response_body;
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cache: cannot write " + tmp.string());
        out << j.dump();
    }
    std::filesystem::rename(tmp, path);
}

void DiskCache::export_fixture(std::ostream& out) const {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(dir_)) {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(dir_)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
    }
    std::sort(files.begin(), files.end());  // stable fixture ordering
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception&) {
            continue;
        }
        nlohmann::ordered_json line;
        line["key"] = j.value("key", "");
        line["request"] = j.value("request", nlohmann::json::object());
        line["response"] = j.value("response", "");
        out << line.dump() << "\n";
    }
}

}  // namespace surveylm
