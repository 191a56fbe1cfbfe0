#pragma once

#include "ctgi/chat.hpp"
#include "ctgi/prompt.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

// Pseudo-caption generation: an initial caption, a fixed number of question
// rounds against the image, filtering of the answers, and one rephrasing
// call that folds the surviving answers into the initial caption.
namespace ctgi::mtg {

enum class RejectReason { Redundant, Irrelevant, Empty };

std::string_view reason_name(RejectReason r) noexcept;
RejectReason parse_reason(std::string_view name);

struct QATurn {
    std::string question;
    std::string answer;
    bool kept = false;
    std::optional<RejectReason> reject_reason;

    friend bool operator==(const QATurn&, const QATurn&) = default;
};

/// Ordered question templates with a parallel list of category tags.
struct QuestionPool {
    std::vector<std::string> templates;
    std::vector<std::string> categories;

    /// Throws InvalidSpec if empty, ragged or containing duplicates.
    void validate() const;

    /// One question per line; a "# category" line tags the questions after it.
    static QuestionPool parse(const std::string& text);
    static QuestionPool load(const std::filesystem::path& path);
    static QuestionPool defaults();
};

struct MTGConfig {
    std::size_t rounds_n = 6;
    double redundancy_threshold = 0.7;
    std::size_t max_tokens = 248;
    std::string init_prompt{prompt::kInitCaption};
    std::string rephrase_prompt{prompt::kRephrase};
    /// Lowercase substrings that mark an answer as uninformative.
    std::vector<std::string> dont_know_patterns{"i don't know", "i do not know", "don't know", "not sure",
                                                "cannot tell", "can't tell", "cannot determine",
                                                "unable to determine", "not visible"};

    void validate() const;
};

struct PseudoLabel {
    std::string image_id;
    std::string static_caption;
    std::vector<QATurn> turns;
    std::string enriched_caption;
    std::string final_caption;
    bool token_budget_applied = false;

    friend bool operator==(const PseudoLabel&, const PseudoLabel&) = default;
};

void to_json(nlohmann::json& j, const QATurn& t);
void from_json(const nlohmann::json& j, QATurn& t);
void to_json(nlohmann::json& j, const PseudoLabel& p);
void from_json(const nlohmann::json& j, PseudoLabel& p);

/// Caption store: one PseudoLabel object per line, in the given order.
std::string to_caption_store(std::span<const PseudoLabel> labels);
std::vector<PseudoLabel> load_caption_store(const std::filesystem::path& path);

/// Static caption from the init prompt. Throws EmptyReply on a blank reply.
std::string initial_caption(const std::string& image_id, chat::ChatGateway& gateway, const MTGConfig& cfg);

/// Asks one question about the image. `history` is the dialogue so far; when
/// empty the question message itself carries the image.
QATurn qa_round(const std::string& image_id, const std::string& question, chat::ChatGateway& gateway,
                std::span<const chat::ChatMessage> history = {});

/// Marks turns kept or rejected, in order: empty (no letters), irrelevant
/// (matches a dont-know pattern), redundant (Jaccard with an earlier kept
/// answer >= threshold).
std::vector<QATurn> filter_turns(std::vector<QATurn> turns, const MTGConfig& cfg);

/// Kept answers joined by single spaces. Throws NoKeptTurns.
std::string enrich(std::span<const QATurn> turns);

struct Truncation {
    std::string text;
    bool applied = false;
};

/// Cuts `reply` to at most `max_tokens` whitespace tokens, at the last
/// sentence end ([.?!] then space or end of text) inside the budget. With no
/// sentence end in budget the cut falls after the last whole token.
Truncation truncate_to_budget(const std::string& reply, std::size_t max_tokens);

Truncation reconstruct(const std::string& enriched, const std::string& static_caption, chat::ChatGateway& gateway,
                       const MTGConfig& cfg);

PseudoLabel generate_pseudo_label(const std::string& image_id, const QuestionPool& pool, const MTGConfig& cfg,
                                  chat::ChatGateway& gateway);

/// Runs generate_pseudo_label over many images, up to `jobs` at a time.
/// Results and transcript exchanges come back ordered by image id whatever
/// the completion order; on failure the first failing image (by id) wins
/// and exchanges of every finished image are still appended.
std::vector<PseudoLabel> generate_batch(std::vector<std::string> image_ids, const QuestionPool& pool,
                                        const MTGConfig& cfg, chat::ChatBackend& backend,
                                        chat::Transcript* transcript, int jobs = 1);

} // namespace ctgi::mtg
