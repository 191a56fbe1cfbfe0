#include "ctgi/mti.hpp"

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"
#include "ctgi/text.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace ctgi::mti {

CategoryLexicon default_lexicon()
{
    return {
        {"clothing-upper", {"jacket", "shirt", "coat", "sweater", "hoodie", "top", "blouse", "vest", "upper", "tshirt"}},
        {"clothing-lower", {"jeans", "trousers", "skirt", "shorts", "pants", "leggings", "lower"}},
        {"footwear", {"sneakers", "boots", "shoes", "shoe", "sandals", "loafers", "heels", "footwear"}},
        {"hair", {"hair", "haired", "bald", "ponytail"}},
        {"carried-items", {"backpack", "handbag", "umbrella", "suitcase", "bag", "carrying", "holding"}},
        {"accessories", {"cap", "sunglasses", "glasses", "scarf", "watch", "hat", "accessories", "accessory"}},
        {"action", {"riding", "walking", "running", "sitting", "standing", "doing", "bicycle"}},
    };
}

std::vector<DiagnosticTemplate> default_diagnostics()
{
    return {
        {"What is the person wearing on the upper body?", "clothing-upper"},
        {"What is the person wearing on the lower body?", "clothing-lower"},
        {"What kind of shoes is the person wearing?", "footwear"},
        {"What does the person's hair look like?", "hair"},
        {"What is the person carrying?", "carried-items"},
        {"What accessories does the person have?", "accessories"},
        {"What is the person doing?", "action"},
    };
}

std::vector<std::string> mentioned_categories(std::string_view text_in, const CategoryLexicon& lexicon)
{
    const auto ws = text::words(text_in);
    const std::set<std::string> present(ws.begin(), ws.end());
    std::vector<std::string> out;
    for (const auto& [category, keywords] : lexicon) {
        if (std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) { return present.contains(k); })) {
            out.push_back(category);
        }
    }
    return out;
}

void MTIConfig::validate() const
{
    if (top_k < 1) throw Error(Errc::InvalidSpec, "top_k must be >= 1");
    if (fusion_lambda < 0.0 || fusion_lambda > 1.0) throw Error(Errc::InvalidSpec, "fusion lambda must be in [0, 1]");
    if (early_stop_xi < 0.0 || early_stop_xi > 1.0) throw Error(Errc::InvalidSpec, "xi must be in [0, 1]");
    if (max_diagnostics < 1) throw Error(Errc::InvalidSpec, "max_diagnostics must be >= 1");
    if (diagnostic_templates.empty()) throw Error(Errc::InvalidSpec, "diagnostic templates must be non-empty");
}

bool judge_alignment(const std::string& query_text, const std::string& image_id, chat::ChatGateway& gateway,
                     const MTIConfig& cfg)
{
    const auto reply = gateway.chat({chat::user(prompt::render(cfg.alignment_prompt, {{"query", query_text}}), image_id)});
    return chat::is_affirmative(reply);
}

AnchorResult find_anchor(const std::string& query_text, const Embedding& query_emb, const Gallery& gallery,
                         const MTIConfig& cfg, chat::ChatGateway& gateway, AnchorResult* progress)
{
    AnchorResult local;
    AnchorResult& result = progress ? *progress : local;
    result = {};
    const auto candidates = top_k(query_emb, gallery, cfg.top_k, {}, cfg.threads);
    for (const auto& c : candidates.entries) {
        ++result.probes;
        if (judge_alignment(query_text, c.item_id, gateway, cfg)) {
            result.anchor_id = c.item_id;
            break;
        }
    }
    return result;
}

std::vector<std::string> diagnostic_questions(std::string_view query_text, const MTIConfig& cfg)
{
    const auto mentioned = mentioned_categories(query_text, cfg.lexicon);
    std::vector<std::string> out;
    for (const auto& t : cfg.diagnostic_templates) {
        if (out.size() >= cfg.max_diagnostics) break;
        if (std::find(mentioned.begin(), mentioned.end(), t.category) != mentioned.end()) continue;
        out.push_back(t.question);
    }
    return out;
}

VisualQa visual_qa(const std::string& anchor_id, std::span<const std::string> questions, chat::ChatGateway& gateway,
                   const MTIConfig& cfg)
{
    if (questions.empty()) throw Error(Errc::InvalidMessage, "visual QA needs at least one question");
    VisualQa out;
    std::vector<std::string> answers;
    for (const auto& q : questions) {
        mtg::QATurn turn;
        turn.question = q;
        turn.answer = gateway.chat({chat::user(prompt::render(cfg.vqa_prompt, {{"question", q}}), anchor_id)});
        const auto trimmed = text::trim(turn.answer);
        turn.kept = !trimmed.empty();
        if (!turn.kept) turn.reject_reason = mtg::RejectReason::Empty;
        if (turn.kept) answers.push_back(trimmed);
        out.turns.push_back(std::move(turn));
    }
    out.summary = text::join(answers, " ");
    return out;
}

std::string aggregate_query(const std::string& vqa_summary, const std::string& original_query,
                            chat::ChatGateway& gateway, const MTIConfig& cfg)
{
    if (original_query.empty()) throw Error(Errc::InvalidMessage, "original query is empty");
    if (text::trim(vqa_summary).empty()) return original_query;
    const auto reply = gateway.chat(
        {chat::user(prompt::render(cfg.aggregate_prompt, {{"query", original_query}, {"details", vqa_summary}}))});
    if (text::trim(reply).empty()) throw Error(Errc::EmptyReply, "empty aggregation reply");
    return reply;
}

Ranking fuse_scores(const Ranking& initial, const Ranking& refined, const std::optional<std::string>& anchor_id,
                    double lambda)
{
    if (lambda < 0.0 || lambda > 1.0) throw Error(Errc::InvalidSpec, "fusion lambda must be in [0, 1]");
    if (initial.entries.size() != refined.entries.size()) {
        throw Error(Errc::ItemSetMismatch, "rankings have " + std::to_string(initial.entries.size()) + " and "
                                               + std::to_string(refined.entries.size()) + " entries");
    }
    std::unordered_map<std::string_view, double> refined_score;
    refined_score.reserve(refined.entries.size());
    for (const auto& e : refined.entries) refined_score.emplace(e.item_id, e.score);

    Ranking out{initial.query_id, {}};
    out.entries.reserve(initial.entries.size());
    bool anchor_seen = false;
    for (const auto& e : initial.entries) {
        auto it = refined_score.find(e.item_id);
        if (it == refined_score.end()) {
            throw Error(Errc::ItemSetMismatch, "item '" + e.item_id + "' missing from refined ranking");
        }
        double fused = std::clamp(lambda * e.score + (1.0 - lambda) * it->second, -1.0, 1.0);
        if (anchor_id && e.item_id == *anchor_id) {
            fused = 1.0;
            anchor_seen = true;
        }
        out.entries.push_back({e.item_id, fused});
    }
    if (refined_score.size() != out.entries.size()) {
        throw Error(Errc::ItemSetMismatch, "refined ranking has duplicate items");
    }
    if (anchor_id && !anchor_seen) {
        throw Error(Errc::ItemSetMismatch, "anchor '" + *anchor_id + "' is not in the ranking");
    }
    sort_entries(out.entries);
    if (anchor_id) {
        // Another item can also reach exactly 1.0; the anchor still leads.
        auto it = std::find_if(out.entries.begin(), out.entries.end(),
                               [&](const RankEntry& e) { return e.item_id == *anchor_id; });
        std::rotate(out.entries.begin(), it, it + 1);
    }
    return out;
}

void run_search(const std::string& query_text, const Gallery& gallery, const MTIConfig& cfg,
                chat::ChatGateway& gateway, const TextEmbedder& embedder, RefinementSession& session)
{
    cfg.validate();
    session.original_query = query_text;

    const Embedding query_emb = embedder(query_text);
    session.initial_ranking = rank_all(query_emb, gallery, session.query_id, cfg.threads);
    session.final_ranking = session.initial_ranking;

    const auto& top = session.initial_ranking.entries.front();
    if (top.score >= cfg.early_stop_xi) {
        session.early_stop_checked = true;
        if (judge_alignment(query_text, top.item_id, gateway, cfg)) {
            session.early_stopped = true;
            return;
        }
    }

    AnchorResult anchor;
    try {
        find_anchor(query_text, query_emb, gallery, cfg, gateway, &anchor);
    } catch (...) {
        session.anchor_probe_count = anchor.probes;
        throw;
    }
    session.anchor_probe_count = anchor.probes;
    session.anchor_id = anchor.anchor_id;
    if (!session.anchor_id) return;

    std::string refined = query_text;
    const auto questions = diagnostic_questions(query_text, cfg);
    if (!questions.empty()) {
        auto vqa = visual_qa(*session.anchor_id, questions, gateway, cfg);
        session.diagnostics = std::move(vqa.turns);
        session.vqa_summary = std::move(vqa.summary);
        refined = aggregate_query(session.vqa_summary, query_text, gateway, cfg);
    }
    session.refined_query = refined;

    const Embedding refined_emb = embedder(refined);
    Ranking refined_ranking;
    if (refined_emb.is_zero()) {
        session.refinement_abandoned = true;
        refined_ranking = session.initial_ranking;
    } else {
        refined_ranking = rank_all(refined_emb, gallery, session.query_id, cfg.threads);
    }
    session.final_ranking = fuse_scores(session.initial_ranking, refined_ranking, session.anchor_id, cfg.fusion_lambda);
}

RefinementSession search(const std::string& query_text, const Gallery& gallery, const MTIConfig& cfg,
                         chat::ChatGateway& gateway, const TextEmbedder& embedder, std::string query_id)
{
    RefinementSession session;
    session.query_id = std::move(query_id);
    run_search(query_text, gallery, cfg, gateway, embedder, session);
    return session;
}

namespace {

nlohmann::ordered_json session_json(const RefinementSession& s)
{
    auto ranking = [](const Ranking& r) {
        nlohmann::ordered_json o;
        o["query_id"] = r.query_id;
        auto entries = nlohmann::ordered_json::array();
        for (const auto& e : r.entries) {
            nlohmann::ordered_json entry;
            entry["id"] = e.item_id;
            entry["score"] = e.score;
            entries.push_back(std::move(entry));
        }
        o["entries"] = std::move(entries);
        return o;
    };
    nlohmann::ordered_json o;
    o["query_id"] = s.query_id;
    o["original_query"] = s.original_query;
    o["initial_ranking"] = ranking(s.initial_ranking);
    o["anchor_id"] = s.anchor_id ? nlohmann::ordered_json(*s.anchor_id) : nlohmann::ordered_json(nullptr);
    o["anchor_probe_count"] = s.anchor_probe_count;
    o["early_stop_checked"] = s.early_stop_checked;
    auto diags = nlohmann::ordered_json::array();
    for (const auto& t : s.diagnostics) {
        nlohmann::ordered_json turn;
        turn["q"] = t.question;
        turn["a"] = t.answer;
        turn["kept"] = t.kept;
        if (t.reject_reason) turn["reject_reason"] = mtg::reason_name(*t.reject_reason);
        diags.push_back(std::move(turn));
    }
    o["diagnostics"] = std::move(diags);
    o["vqa_summary"] = s.vqa_summary;
    o["refined_query"] = s.refined_query ? nlohmann::ordered_json(*s.refined_query) : nlohmann::ordered_json(nullptr);
    o["refinement_abandoned"] = s.refinement_abandoned;
    o["final_ranking"] = ranking(s.final_ranking);
    o["early_stopped"] = s.early_stopped;
    return o;
}

} // namespace

void to_json(nlohmann::json& j, const RefinementSession& s)
{
    j = nlohmann::json::parse(session_json(s).dump());
}

void from_json(const nlohmann::json& j, RefinementSession& s)
{
    j.at("query_id").get_to(s.query_id);
    j.at("original_query").get_to(s.original_query);
    j.at("initial_ranking").get_to(s.initial_ranking);
    s.anchor_id.reset();
    if (!j.at("anchor_id").is_null()) s.anchor_id = j.at("anchor_id").get<std::string>();
    j.at("anchor_probe_count").get_to(s.anchor_probe_count);
    s.early_stop_checked = j.value("early_stop_checked", false);
    j.at("diagnostics").get_to(s.diagnostics);
    j.at("vqa_summary").get_to(s.vqa_summary);
    s.refined_query.reset();
    if (!j.at("refined_query").is_null()) s.refined_query = j.at("refined_query").get<std::string>();
    s.refinement_abandoned = j.value("refinement_abandoned", false);
    j.at("final_ranking").get_to(s.final_ranking);
    j.at("early_stopped").get_to(s.early_stopped);
}

std::string session_to_line(const RefinementSession& s)
{
    return session_json(s).dump();
}

std::vector<RefinementSession> load_session_log(const std::filesystem::path& path)
{
    std::vector<RefinementSession> out;
    const auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(lines[i]).get<RefinementSession>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

} // namespace ctgi::mti
