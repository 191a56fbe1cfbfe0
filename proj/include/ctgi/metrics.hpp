#pragma once

#include "ctgi/ranking.hpp"

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>

namespace ctgi {

/// query_id -> ids of the gallery items that count as correct for it.
using RelevanceMap = std::map<std::string, std::set<std::string>>;

/// Fraction of queries with at least one relevant item in the top k.
/// Throws MissingRelevance for a ranking whose query_id is not in `relevant`.
double rank_k_accuracy(std::span<const Ranking> rankings, const RelevanceMap& relevant, std::size_t k);

/// Mean over relevant hits of (relevant items at or above the hit) / rank.
/// Averages over hits found in the ranking; 0 if there are none.
double average_precision(const Ranking& ranking, const std::set<std::string>& relevant);

double mean_average_precision(std::span<const Ranking> rankings, const RelevanceMap& relevant);

} // namespace ctgi
