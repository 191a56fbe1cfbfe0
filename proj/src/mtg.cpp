#include "ctgi/mtg.hpp"

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"
#include "ctgi/parallel.hpp"
#include "ctgi/text.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <set>

#include <nlohmann/json.hpp>

namespace ctgi::mtg {

std::string_view reason_name(RejectReason r) noexcept
{
    switch (r) {
    case RejectReason::Redundant: return "redundant";
    case RejectReason::Irrelevant: return "irrelevant";
    case RejectReason::Empty: return "empty";
    }
    return "empty";
}

RejectReason parse_reason(std::string_view name)
{
    if (name == "redundant") return RejectReason::Redundant;
    if (name == "irrelevant") return RejectReason::Irrelevant;
    if (name == "empty") return RejectReason::Empty;
    throw Error(Errc::ParseError, "unknown reject reason '" + std::string(name) + "'");
}

void QuestionPool::validate() const
{
    if (templates.empty()) throw Error(Errc::InvalidSpec, "question pool is empty");
    if (categories.size() != templates.size()) throw Error(Errc::InvalidSpec, "categories must parallel templates");
    std::set<std::string> seen;
    for (const auto& t : templates) {
        if (!seen.insert(t).second) throw Error(Errc::InvalidSpec, "duplicate question '" + t + "'");
    }
}

QuestionPool QuestionPool::parse(const std::string& content)
{
    QuestionPool pool;
    std::string category = "general";
    std::size_t start = 0;
    while (start <= content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        const auto line = text::trim(std::string_view(content).substr(start, end - start));
        start = end + 1;
        if (line.empty()) continue;
        if (line.front() == '#') {
            category = text::trim(std::string_view(line).substr(1));
            continue;
        }
        pool.templates.push_back(line);
        pool.categories.push_back(category);
    }
    pool.validate();
    return pool;
}

QuestionPool QuestionPool::load(const std::filesystem::path& path)
{
    return parse(io::read_file(path));
}

QuestionPool QuestionPool::defaults()
{
    return parse(R"(# clothing-upper
What is the person wearing on the upper body?
# footwear
What kind of shoes is the person wearing?
# carried-items
Is the person carrying a black backpack?
# accessories
Is the person wearing sunglasses?
# hair
Does the person have long black hair?
# clothing-upper
What color is the person's top?
# clothing-lower
What is the person wearing on the lower body?
# carried-items
What is the person carrying?
# accessories
What accessories does the person have?
)");
}

void MTGConfig::validate() const
{
    if (rounds_n < 1) throw Error(Errc::InvalidSpec, "rounds_n must be >= 1");
    if (redundancy_threshold < 0.0 || redundancy_threshold > 1.0) {
        throw Error(Errc::InvalidSpec, "redundancy_threshold must be in [0, 1]");
    }
    if (max_tokens < 1) throw Error(Errc::InvalidSpec, "max_tokens must be >= 1");
    if (init_prompt.empty() || rephrase_prompt.empty()) throw Error(Errc::InvalidSpec, "prompts must be non-empty");
}

void to_json(nlohmann::json& j, const QATurn& t)
{
    j = nlohmann::json{{"q", t.question}, {"a", t.answer}, {"kept", t.kept}};
    if (t.reject_reason) j["reject_reason"] = reason_name(*t.reject_reason);
}

void from_json(const nlohmann::json& j, QATurn& t)
{
    j.at("q").get_to(t.question);
    j.at("a").get_to(t.answer);
    j.at("kept").get_to(t.kept);
    t.reject_reason.reset();
    if (j.contains("reject_reason")) t.reject_reason = parse_reason(j.at("reject_reason").get<std::string>());
}

namespace {

nlohmann::ordered_json label_json(const PseudoLabel& p)
{
    nlohmann::ordered_json o;
    o["image_id"] = p.image_id;
    o["static"] = p.static_caption;
    auto turns = nlohmann::ordered_json::array();
    for (const auto& t : p.turns) {
        nlohmann::ordered_json turn;
        turn["q"] = t.question;
        turn["a"] = t.answer;
        turn["kept"] = t.kept;
        if (t.reject_reason) turn["reject_reason"] = reason_name(*t.reject_reason);
        turns.push_back(std::move(turn));
    }
    o["turns"] = std::move(turns);
    o["enriched"] = p.enriched_caption;
    o["final"] = p.final_caption;
    o["token_budget_applied"] = p.token_budget_applied;
    return o;
}

bool has_alpha(std::string_view s)
{
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c) != 0; });
}

} // namespace

void to_json(nlohmann::json& j, const PseudoLabel& p)
{
    j = nlohmann::json::parse(label_json(p).dump());
}

void from_json(const nlohmann::json& j, PseudoLabel& p)
{
    j.at("image_id").get_to(p.image_id);
    j.at("static").get_to(p.static_caption);
    j.at("turns").get_to(p.turns);
    j.at("enriched").get_to(p.enriched_caption);
    j.at("final").get_to(p.final_caption);
    j.at("token_budget_applied").get_to(p.token_budget_applied);
}

std::string to_caption_store(std::span<const PseudoLabel> labels)
{
    std::string out;
    for (const auto& p : labels) {
        out += label_json(p).dump();
        out += '\n';
    }
    return out;
}

std::vector<PseudoLabel> load_caption_store(const std::filesystem::path& path)
{
    std::vector<PseudoLabel> out;
    const auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(lines[i]).get<PseudoLabel>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string initial_caption(const std::string& image_id, chat::ChatGateway& gateway, const MTGConfig& cfg)
{
    auto reply = gateway.chat({chat::user(cfg.init_prompt, image_id)});
    if (text::trim(reply).empty()) throw Error(Errc::EmptyReply, "empty caption for image '" + image_id + "'");
    return reply;
}

QATurn qa_round(const std::string& image_id, const std::string& question, chat::ChatGateway& gateway,
                std::span<const chat::ChatMessage> history)
{
    std::vector<chat::ChatMessage> request(history.begin(), history.end());
    if (request.empty()) {
        request.push_back(chat::user(question, image_id));
    } else {
        request.push_back(chat::user(question));
    }
    QATurn turn;
    turn.question = question;
    turn.answer = gateway.chat(request);
    return turn;
}

std::vector<QATurn> filter_turns(std::vector<QATurn> turns, const MTGConfig& cfg)
{
    std::vector<const std::string*> kept_answers;
    for (auto& t : turns) {
        t.kept = false;
        t.reject_reason.reset();
        if (!has_alpha(t.answer)) {
            t.reject_reason = RejectReason::Empty;
            continue;
        }
        const auto lowered = text::to_lower(t.answer);
        const bool dont_know = std::any_of(cfg.dont_know_patterns.begin(), cfg.dont_know_patterns.end(),
                                           [&](const std::string& p) { return lowered.find(p) != std::string::npos; });
        if (dont_know) {
            t.reject_reason = RejectReason::Irrelevant;
            continue;
        }
        const bool redundant = std::any_of(kept_answers.begin(), kept_answers.end(), [&](const std::string* prev) {
            return text::jaccard(*prev, t.answer) >= cfg.redundancy_threshold;
        });
        if (redundant) {
            t.reject_reason = RejectReason::Redundant;
            continue;
        }
        t.kept = true;
        kept_answers.push_back(&t.answer);
    }
    return turns;
}

std::string enrich(std::span<const QATurn> turns)
{
    std::vector<std::string> answers;
    for (const auto& t : turns) {
        if (t.kept) answers.push_back(t.answer);
    }
    if (answers.empty()) throw Error(Errc::NoKeptTurns, "no kept turns to enrich from");
    return text::join(answers, " ");
}

Truncation truncate_to_budget(const std::string& reply, std::size_t max_tokens)
{
    if (text::token_count(reply) <= max_tokens) return {reply, false};

    // End offset of the max_tokens-th token.
    std::size_t tokens = 0;
    std::size_t limit = 0;
    for (std::size_t i = 0; i < reply.size(); ++i) {
        const bool space = std::isspace(static_cast<unsigned char>(reply[i])) != 0;
        const bool starts = !space && (i == 0 || std::isspace(static_cast<unsigned char>(reply[i - 1])) != 0);
        if (starts && ++tokens > max_tokens) break;
        if (!space) limit = i + 1;
    }

    std::size_t cut = 0;
    for (std::size_t i = 0; i < limit; ++i) {
        const char c = reply[i];
        if (c != '.' && c != '?' && c != '!') continue;
        const bool boundary = i + 1 == reply.size() || std::isspace(static_cast<unsigned char>(reply[i + 1])) != 0;
        if (boundary) cut = i + 1;
    }
    if (cut == 0) cut = limit;
    return {text::trim(std::string_view(reply).substr(0, cut)), true};
}

Truncation reconstruct(const std::string& enriched, const std::string& static_caption, chat::ChatGateway& gateway,
                       const MTGConfig& cfg)
{
    if (enriched.empty() || static_caption.empty()) {
        throw Error(Errc::InvalidMessage, "reconstruction needs both captions");
    }
    const auto request = prompt::render(cfg.rephrase_prompt, {{"static", static_caption}, {"enriched", enriched}});
    const auto reply = gateway.chat({chat::user(request)});
    if (text::trim(reply).empty()) throw Error(Errc::EmptyReply, "empty reconstruction reply");
    return truncate_to_budget(reply, cfg.max_tokens);
}

PseudoLabel generate_pseudo_label(const std::string& image_id, const QuestionPool& pool, const MTGConfig& cfg,
                                  chat::ChatGateway& gateway)
{
    pool.validate();
    cfg.validate();

    PseudoLabel label;
    label.image_id = image_id;
    label.static_caption = initial_caption(image_id, gateway, cfg);

    std::vector<chat::ChatMessage> history{chat::user(cfg.init_prompt, image_id),
                                           chat::assistant(label.static_caption)};
    const std::size_t rounds = std::min(cfg.rounds_n, pool.templates.size());
    std::vector<QATurn> turns;
    for (std::size_t i = 0; i < rounds; ++i) {
        auto turn = qa_round(image_id, pool.templates[i], gateway, history);
        history.push_back(chat::user(turn.question));
        // An empty reply cannot be replayed as an assistant message.
        history.push_back(chat::assistant(turn.answer.empty() ? std::string(" ") : turn.answer));
        turns.push_back(std::move(turn));
    }
    label.turns = filter_turns(std::move(turns), cfg);

    const bool any_kept = std::any_of(label.turns.begin(), label.turns.end(), [](const QATurn& t) { return t.kept; });
    if (!any_kept) {
        label.final_caption = label.static_caption;
        return label;
    }
    label.enriched_caption = enrich(label.turns);
    auto rebuilt = reconstruct(label.enriched_caption, label.static_caption, gateway, cfg);
    label.final_caption = std::move(rebuilt.text);
    label.token_budget_applied = rebuilt.applied;
    return label;
}

std::vector<PseudoLabel> generate_batch(std::vector<std::string> image_ids, const QuestionPool& pool,
                                        const MTGConfig& cfg, chat::ChatBackend& backend,
                                        chat::Transcript* transcript, int jobs)
{
    std::sort(image_ids.begin(), image_ids.end());
    const std::size_t n = image_ids.size();
    std::vector<PseudoLabel> labels(n);
    std::vector<std::unique_ptr<chat::Transcript>> logs(n);
    std::vector<std::exception_ptr> errors(n);

    parallel_for(n, jobs, [&](std::size_t i) {
        logs[i] = std::make_unique<chat::Transcript>();
        chat::ChatGateway gateway(backend, logs[i].get());
        try {
            labels[i] = generate_pseudo_label(image_ids[i], pool, cfg, gateway);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });

    if (transcript) {
        for (const auto& log : logs) {
            if (log) transcript->append_all(log->exchanges());
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return labels;
}

} // namespace ctgi::mtg
