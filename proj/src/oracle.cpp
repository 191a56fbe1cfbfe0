#include "ctgi/oracle.hpp"

#include "ctgi/error.hpp"
#include "ctgi/prompt.hpp"
#include "ctgi/text.hpp"

#include <algorithm>
#include <random>

namespace ctgi::sim {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

const chat::ChatMessage* last_user(std::span<const chat::ChatMessage> messages)
{
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == chat::Role::User) return &*it;
    }
    return nullptr;
}

const std::string* last_image(std::span<const chat::ChatMessage> messages)
{
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->image_ref) return &*it->image_ref;
    }
    return nullptr;
}

} // namespace

void OracleConfig::validate() const
{
    if (yes_no_error_rate < 0.0 || yes_no_error_rate > 1.0) {
        throw Error(Errc::InvalidSpec, "error rate must be in [0, 1]");
    }
    if (caption_attributes < 1) throw Error(Errc::InvalidSpec, "captions need at least one attribute");
    if (noise_table_size < 1) throw Error(Errc::InvalidSpec, "noise table must be non-empty");
}

OraclePrompts OraclePrompts::from(const mtg::MTGConfig& mtg, const mti::MTIConfig& mti)
{
    return {mtg.init_prompt, mtg.rephrase_prompt, mti.alignment_prompt, mti.vqa_prompt, mti.aggregate_prompt};
}

OracleChat::OracleChat(const World& world, OracleConfig config, OraclePrompts prompts, mti::CategoryLexicon lexicon)
{
    config.validate();
    auto state = std::make_shared<State>(State{world.schema, std::move(config), std::move(prompts),
                                               std::move(lexicon), {}, {}});
    for (const auto& identity : world.identities) state->attributes.emplace(identity.id, identity.attributes);
    std::mt19937_64 rng(mix(state->config.seed ^ 0x6f7261636c65ULL));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    state->noise.resize(state->config.noise_table_size);
    for (double& u : state->noise) u = unit(rng);
    state_ = std::move(state);
}

OracleChat OracleChat::bound_to(std::vector<std::string> subject_attributes) const
{
    OracleChat copy(*this);
    copy.subject_ = std::move(subject_attributes);
    return copy;
}

const std::vector<std::string>& OracleChat::attributes_of(const std::string& image_id) const
{
    auto it = state_->attributes.find(image_id);
    if (it == state_->attributes.end()) throw Error(Errc::UnknownImage, "no image '" + image_id + "' in the world");
    return it->second;
}

std::string OracleChat::render_attributes(const std::vector<std::string>& attrs) const
{
    return prompt::render(state_->config.caption_template, {{"attributes", text::join_natural(attrs)}});
}

std::string OracleChat::caption_for(const std::string& image_id) const
{
    const auto& attrs = attributes_of(image_id);
    std::vector<std::size_t> order(attrs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(mix(state_->config.seed ^ fnv1a(image_id)));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(state_->config.caption_attributes, order.size()));
    std::sort(order.begin(), order.end());
    std::vector<std::string> picked;
    for (auto i : order) picked.push_back(attrs[i]);
    return render_attributes(picked);
}

std::string OracleChat::answer_question(const std::string& image_id, const std::string& question) const
{
    const auto& attrs = attributes_of(image_id);
    const auto& schema = state_->schema;
    const auto named = schema.mentioned(question);
    if (!named.empty()) {
        const bool present = std::find(attrs.begin(), attrs.end(), named.front()) != attrs.end();
        if (!present) return state_->config.negative_answer;
        return prompt::render(state_->config.answer_template, {{"attributes", named.front()}});
    }
    auto categories = mti::mentioned_categories(question, state_->lexicon);
    for (const auto& [name, values] : schema.categories()) {
        // A schema category can also be asked about by its own name.
        const auto name_words = text::words(name);
        if (text::contains_words(text::words(question), name_words)) categories.push_back(name);
    }
    for (const auto& category : categories) {
        for (const auto& a : attrs) {
            const auto idx = schema.index_of(a);
            if (idx && schema.categories()[schema.category_of(*idx)].first == category) {
                return prompt::render(state_->config.answer_template, {{"attributes", a}});
            }
        }
    }
    return state_->config.unknown_answer;
}

bool OracleChat::truthful_alignment(const std::string& query_text, const std::string& image_id) const
{
    const auto& attrs = attributes_of(image_id);
    const auto target = subject_ ? *subject_ : state_->schema.mentioned(query_text);
    return std::all_of(target.begin(), target.end(), [&](const std::string& a) {
        return std::find(attrs.begin(), attrs.end(), a) != attrs.end();
    });
}

bool OracleChat::flipped(const std::string& query_text, const std::string& image_id) const
{
    const auto h = mix(fnv1a(image_id, fnv1a("\x1f", fnv1a(query_text))) ^ state_->config.seed);
    return state_->noise[h % state_->noise.size()] < state_->config.yes_no_error_rate;
}

bool OracleChat::judge(const std::string& query_text, const std::string& image_id) const
{
    return truthful_alignment(query_text, image_id) != flipped(query_text, image_id);
}

std::string OracleChat::combine(const std::string& first, const std::string& second) const
{
    auto attrs = state_->schema.mentioned(first);
    for (auto& a : state_->schema.mentioned(second)) {
        if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(std::move(a));
    }
    if (attrs.empty()) return first;
    return render_attributes(attrs);
}

std::string OracleChat::complete(std::span<const chat::ChatMessage> messages)
{
    const auto* msg = last_user(messages);
    if (!msg) return state_->config.unknown_answer;
    const auto& p = state_->prompts;
    if (const auto* image = last_image(messages)) {
        if (msg->text == p.init_caption) return caption_for(*image);
        if (auto vars = prompt::match(p.alignment, msg->text)) {
            return judge((*vars)["query"], *image) ? state_->config.match_answer : state_->config.mismatch_answer;
        }
        if (auto vars = prompt::match(p.vqa, msg->text)) return answer_question(*image, (*vars)["question"]);
        return answer_question(*image, msg->text);
    }
    if (auto vars = prompt::match(p.rephrase, msg->text)) return combine((*vars)["static"], (*vars)["enriched"]);
    if (auto vars = prompt::match(p.aggregate, msg->text)) return combine((*vars)["query"], (*vars)["details"]);
    return state_->config.unknown_answer;
}

} // namespace ctgi::sim
