#include "ctgi/ranking.hpp"

#include "ctgi/error.hpp"
#include "ctgi/kernels.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace ctgi {

void sort_entries(std::vector<RankEntry>& entries)
{
    std::sort(entries.begin(), entries.end(), ranks_before);
}

Ranking top_k(const Embedding& query, const Gallery& gallery, std::size_t k, std::string query_id,
              int threads)
{
    if (k == 0) throw Error(Errc::OutOfRange, "k must be at least 1");
    if (gallery.size() == 0) throw Error(Errc::EmptyGallery, "cannot rank an empty gallery");
    if (query.dim() != gallery.dim()) {
        throw Error(Errc::DimMismatch, "query dim " + std::to_string(query.dim()) + ", gallery dim "
                                           + std::to_string(gallery.dim()));
    }
    const Embedding unit = normalize(query);
    const auto scores = kernels::score_gallery(unit.values(), gallery, threads);

    std::vector<RankEntry> entries;
    entries.reserve(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        entries.push_back({gallery.at(i).id, scores[i]});
    }
    const std::size_t keep = std::min(k, entries.size());
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(),
                      ranks_before);
    entries.resize(keep);
    return Ranking{std::move(query_id), std::move(entries)};
}

Ranking rank_all(const Embedding& query, const Gallery& gallery, std::string query_id, int threads)
{
    return top_k(query, gallery, gallery.size(), std::move(query_id), threads);
}

void to_json(nlohmann::json& j, const RankEntry& e)
{
    j = nlohmann::json{{"id", e.item_id}, {"score", e.score}};
}

void from_json(const nlohmann::json& j, RankEntry& e)
{
    j.at("id").get_to(e.item_id);
    j.at("score").get_to(e.score);
}

void to_json(nlohmann::json& j, const Ranking& r)
{
    j = nlohmann::json{{"query_id", r.query_id}, {"entries", r.entries}};
}

void from_json(const nlohmann::json& j, Ranking& r)
{
    j.at("query_id").get_to(r.query_id);
    j.at("entries").get_to(r.entries);
}

} // namespace ctgi
