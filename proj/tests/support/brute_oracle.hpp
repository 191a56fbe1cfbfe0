#pragma once

// Reference implementations for retrieval scoring, metrics and positional
// stretching. Deliberately naive and built on std types only, so they share
// no code with the library they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace brute {

using Vec = std::vector<double>;
using Scored = std::vector<std::pair<std::string, double>>;

inline double cosine(const Vec& a, const Vec& b)
{
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

/// Scores every item, sorts the whole list, keeps the first k.
inline Scored rank(const Vec& query, const std::vector<std::string>& ids, const std::vector<Vec>& items,
                   std::size_t k)
{
    Scored all;
    for (std::size_t i = 0; i < ids.size(); ++i) all.emplace_back(ids[i], cosine(query, items[i]));
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        if (x.second > y.second) return true;
        if (x.second < y.second) return false;
        return x.first < y.first;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

using Lists = std::vector<std::pair<std::string, std::vector<std::string>>>; // (query id, ranked ids)
using Truth = std::map<std::string, std::set<std::string>>;

inline double rank_k(const Lists& lists, const Truth& truth, std::size_t k)
{
    if (lists.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& [q, ids] : lists) {
        const auto& rel = truth.at(q);
        bool hit = false;
        for (std::size_t i = 0; i < ids.size() && i < k; ++i) {
            if (rel.count(ids[i])) hit = true;
        }
        if (hit) ++hits;
    }
    return double(hits) / double(lists.size());
}

inline double ap(const std::vector<std::string>& ids, const std::set<std::string>& rel)
{
    double sum = 0;
    int found = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!rel.count(ids[i])) continue;
        ++found;
        sum += double(found) / double(i + 1);
    }
    return found == 0 ? 0.0 : sum / found;
}

inline double map(const Lists& lists, const Truth& truth)
{
    if (lists.empty()) return 0.0;
    double sum = 0;
    for (const auto& [q, ids] : lists) sum += ap(ids, truth.at(q));
    return sum / double(lists.size());
}

/// Stretched row `pos` (1-based) of a rows x dim table, evaluated directly
/// from the definition with long double positions.
inline Vec stretch_row(const std::vector<Vec>& table, std::size_t pos, std::size_t keep, std::size_t dst)
{
    const std::size_t src_rows = table.size();
    if (pos <= keep) return table[pos - 1];
    const long double lambda = (long double)(dst - keep) / (long double)(src_rows - keep);
    const long double src = keep + (long double)(pos - keep) / lambda;
    const auto lo = (std::size_t)std::floor(src);
    const auto hi = (std::size_t)std::ceil(src);
    const long double alpha = src - lo;
    Vec out(table[0].size());
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d] = double((1 - alpha) * table[lo - 1][d] + alpha * table[hi - 1][d]);
    }
    return out;
}

} // namespace brute
