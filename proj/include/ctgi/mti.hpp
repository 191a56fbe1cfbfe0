#pragma once

#include "ctgi/chat.hpp"
#include "ctgi/embedding.hpp"
#include "ctgi/gallery.hpp"
#include "ctgi/mtg.hpp"
#include "ctgi/prompt.hpp"
#include "ctgi/ranking.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

// Inference-time query refinement: confirm an anchor among the top
// candidates, ask the model about attributes the query leaves out, merge the
// answers into a refined query and re-rank with fused scores.
namespace ctgi::mti {

struct DiagnosticTemplate {
    std::string question;
    std::string category;
};

/// Ordered category -> keyword list used to decide what a text mentions.
using CategoryLexicon = std::vector<std::pair<std::string, std::vector<std::string>>>;

CategoryLexicon default_lexicon();
std::vector<DiagnosticTemplate> default_diagnostics();

/// Categories whose keywords appear in `text` (as whole words), lexicon order.
std::vector<std::string> mentioned_categories(std::string_view text, const CategoryLexicon& lexicon);

struct MTIConfig {
    std::size_t top_k = 20;
    double fusion_lambda = 0.5;
    double early_stop_xi = 0.85;
    std::size_t max_diagnostics = 6;
    std::vector<DiagnosticTemplate> diagnostic_templates = default_diagnostics();
    CategoryLexicon lexicon = default_lexicon();
    std::string alignment_prompt{prompt::kAlignment};
    std::string vqa_prompt{prompt::kVisualQa};
    std::string aggregate_prompt{prompt::kAggregate};
    /// OpenMP threads for gallery scoring.
    int threads = 1;

    void validate() const;
};

using TextEmbedder = std::function<Embedding(std::string_view)>;

struct RefinementSession {
    std::string query_id;
    std::string original_query;
    Ranking initial_ranking;
    std::optional<std::string> anchor_id;
    std::size_t anchor_probe_count = 0;
    /// True when the initial top-1 cleared xi and a confirmation was asked.
    bool early_stop_checked = false;
    std::vector<mtg::QATurn> diagnostics;
    std::string vqa_summary;
    std::optional<std::string> refined_query;
    /// Set when the refined query embedded to zero and was not used for scoring.
    bool refinement_abandoned = false;
    Ranking final_ranking;
    bool early_stopped = false;

    friend bool operator==(const RefinementSession&, const RefinementSession&) = default;
};

void to_json(nlohmann::json& j, const RefinementSession& s);
void from_json(const nlohmann::json& j, RefinementSession& s);
std::string session_to_line(const RefinementSession& s);
std::vector<RefinementSession> load_session_log(const std::filesystem::path& path);

/// One alignment probe: does `image_id` match `query_text`? Ambiguous
/// replies count as no.
bool judge_alignment(const std::string& query_text, const std::string& image_id, chat::ChatGateway& gateway,
                     const MTIConfig& cfg);

struct AnchorResult {
    std::optional<std::string> anchor_id;
    std::size_t probes = 0;
};

/// Probes the top_k candidates in rank order; the first yes is the anchor.
/// `progress`, when given, tracks probes as they happen so a caller still
/// sees the count if the backend fails mid-walk.
AnchorResult find_anchor(const std::string& query_text, const Embedding& query_emb, const Gallery& gallery,
                         const MTIConfig& cfg, chat::ChatGateway& gateway, AnchorResult* progress = nullptr);

/// Diagnostic templates whose category the query does not mention, in
/// template order, at most max_diagnostics.
std::vector<std::string> diagnostic_questions(std::string_view query_text, const MTIConfig& cfg);

struct VisualQa {
    std::vector<mtg::QATurn> turns;
    /// Non-empty answers joined by single spaces.
    std::string summary;
};

VisualQa visual_qa(const std::string& anchor_id, std::span<const std::string> questions, chat::ChatGateway& gateway,
                   const MTIConfig& cfg);

/// Refined query from the model; an empty summary returns the original
/// query without calling the backend.
std::string aggregate_query(const std::string& vqa_summary, const std::string& original_query,
                            chat::ChatGateway& gateway, const MTIConfig& cfg);

/// lambda * initial + (1 - lambda) * refined per item, then the anchor is
/// pinned to exactly 1.0 and the list re-sorted.
Ranking fuse_scores(const Ranking& initial, const Ranking& refined, const std::optional<std::string>& anchor_id,
                    double lambda);

/// Full refinement for one query. State is written into `session` as each
/// step completes, so it holds the partial record if a step throws.
void run_search(const std::string& query_text, const Gallery& gallery, const MTIConfig& cfg,
                chat::ChatGateway& gateway, const TextEmbedder& embedder, RefinementSession& session);

RefinementSession search(const std::string& query_text, const Gallery& gallery, const MTIConfig& cfg,
                         chat::ChatGateway& gateway, const TextEmbedder& embedder, std::string query_id = {});

} // namespace ctgi::mti
