#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "surveylm/backend.hpp"

namespace surveylm {

/// Content hash identifying one scoring query against one backend.
struct QueryCacheKey {
    std::string hex;

    static QueryCacheKey compute(const std::string& endpoint, const std::string& model,
                                 const LabelQuery& query, const DecodingParams& params);

    bool operator==(const QueryCacheKey&) const = default;
};

/// One cached query: the request we sent and the raw wire bytes we got back.
struct CacheRecord {
    std::string key;
    nlohmann::json request;
    std::string response_body;
};

/// Append-only content-addressed store, one file per key. Writes go through a
/// temp file and an atomic rename, so concurrent readers never observe a
/// partial record and the first writer of a key wins.
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path dir);

    std::optional<CacheRecord> get(const QueryCacheKey& key) const;
    void put(const CacheRecord& record);

    /// Writes every record as a fixture line: {key, request, response}.
    void export_fixture(std::ostream& out) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path record_path(const std::string& key_hex) const;

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

}  // namespace surveylm
