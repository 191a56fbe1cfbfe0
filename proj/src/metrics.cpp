#include "ctgi/metrics.hpp"

#include "ctgi/error.hpp"

namespace ctgi {

namespace {

const std::set<std::string>& relevant_for(const Ranking& r, const RelevanceMap& relevant)
{
    auto it = relevant.find(r.query_id);
    if (it == relevant.end()) {
        throw Error(Errc::MissingRelevance, "no relevance entry for query '" + r.query_id + "'");
    }
    return it->second;
}

} // namespace

double rank_k_accuracy(std::span<const Ranking> rankings, const RelevanceMap& relevant, std::size_t k)
{
    if (k == 0) throw Error(Errc::OutOfRange, "k must be at least 1");
    if (rankings.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& r : rankings) {
        const auto& rel = relevant_for(r, relevant);
        const std::size_t depth = std::min(k, r.entries.size());
        for (std::size_t i = 0; i < depth; ++i) {
            if (rel.contains(r.entries[i].item_id)) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double average_precision(const Ranking& ranking, const std::set<std::string>& relevant)
{
    std::size_t found = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        if (relevant.contains(ranking.entries[i].item_id)) {
            ++found;
            sum += static_cast<double>(found) / static_cast<double>(i + 1);
        }
    }
    return found == 0 ? 0.0 : sum / static_cast<double>(found);
}

double mean_average_precision(std::span<const Ranking> rankings, const RelevanceMap& relevant)
{
    if (rankings.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : rankings) sum += average_precision(r, relevant_for(r, relevant));
    return sum / static_cast<double>(rankings.size());
}

} // namespace ctgi
