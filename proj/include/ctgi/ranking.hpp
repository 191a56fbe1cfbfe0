#pragma once

#include "ctgi/embedding.hpp"
#include "ctgi/gallery.hpp"

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ctgi {

struct RankEntry {
    std::string item_id;
    double score = 0.0;

    friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

/// Entries sorted by score descending, ties by ascending item id.
struct Ranking {
    std::string query_id;
    std::vector<RankEntry> entries;

    friend bool operator==(const Ranking&, const Ranking&) = default;
};

/// Strict weak order used everywhere a ranking is sorted.
inline bool ranks_before(const RankEntry& a, const RankEntry& b) noexcept
{
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
}

void sort_entries(std::vector<RankEntry>& entries);

/// The min(k, |gallery|) best items for `query`. Scoring runs on `threads`
/// OpenMP threads; the result does not depend on the thread count.
Ranking top_k(const Embedding& query, const Gallery& gallery, std::size_t k,
              std::string query_id = {}, int threads = 1);

/// Full ranking of the gallery (k = |gallery|).
Ranking rank_all(const Embedding& query, const Gallery& gallery, std::string query_id = {},
                 int threads = 1);

void to_json(nlohmann::json& j, const RankEntry& e);
void from_json(const nlohmann::json& j, RankEntry& e);
void to_json(nlohmann::json& j, const Ranking& r);
void from_json(const nlohmann::json& j, Ranking& r);

} // namespace ctgi
