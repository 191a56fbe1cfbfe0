#include "ctgi/sim_world.hpp"

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"
#include "ctgi/text.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

namespace ctgi::sim {

AttributeSchema::AttributeSchema(std::vector<Category> categories)
    : categories_(std::move(categories))
{
    if (categories_.size() < 4) throw Error(Errc::InvalidSchema, "schema needs at least 4 categories");
    std::set<std::string> names;
    for (std::size_t c = 0; c < categories_.size(); ++c) {
        const auto& [name, values] = categories_[c];
        if (!names.insert(name).second) throw Error(Errc::InvalidSchema, "duplicate category '" + name + "'");
        if (values.size() < 3) throw Error(Errc::InvalidSchema, "category '" + name + "' needs at least 3 values");
        for (const auto& v : values) {
            auto ws = text::words(v);
            if (ws.empty()) throw Error(Errc::InvalidSchema, "attribute '" + v + "' has no words");
            if (index_of(v)) throw Error(Errc::InvalidSchema, "duplicate attribute '" + v + "'");
            attributes_.push_back(v);
            attribute_words_.push_back(std::move(ws));
            category_of_.push_back(c);
        }
    }
}

AttributeSchema AttributeSchema::defaults()
{
    return AttributeSchema({
        {"clothing-upper", {"a red jacket", "a white shirt", "a black coat", "a blue sweater", "a green hoodie"}},
        {"clothing-lower", {"blue jeans", "black trousers", "a gray skirt", "khaki shorts", "white pants"}},
        {"footwear", {"white sneakers", "brown boots", "black shoes", "red sandals", "gray loafers"}},
        {"hair", {"long black hair", "short brown hair", "blond hair", "curly red hair", "gray hair"}},
        {"carried-items", {"a black backpack", "a brown handbag", "an umbrella", "a blue suitcase", "a shopping bag"}},
        {"accessories", {"a baseball cap", "sunglasses", "a wool scarf", "a silver watch", "a straw hat"}},
    });
}

AttributeSchema AttributeSchema::parse_json(const std::string& text_in)
{
    try {
        const auto j = nlohmann::ordered_json::parse(text_in);
        if (!j.is_object()) throw Error(Errc::InvalidSchema, "schema must be a JSON object");
        std::vector<Category> cats;
        for (const auto& [key, value] : j.items()) {
            cats.emplace_back(key, value.get<std::vector<std::string>>());
        }
        return AttributeSchema(std::move(cats));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("schema: ") + e.what());
    }
}

AttributeSchema AttributeSchema::load(const std::filesystem::path& path)
{
    return parse_json(io::read_file(path));
}

std::string AttributeSchema::to_json() const
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, values] : categories_) j[name] = values;
    return j.dump(2) + "\n";
}

std::optional<std::size_t> AttributeSchema::index_of(std::string_view attribute) const
{
    auto it = std::find(attributes_.begin(), attributes_.end(), attribute);
    if (it == attributes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - attributes_.begin());
}

std::uint64_t AttributeSchema::combinations() const noexcept
{
    std::uint64_t total = 1;
    for (const auto& [name, values] : categories_) {
        if (total > std::numeric_limits<std::uint64_t>::max() / values.size()) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        total *= values.size();
    }
    return total;
}

std::vector<std::string> AttributeSchema::mentioned(std::string_view text_in) const
{
    const auto ws = text::words(text_in);
    std::vector<std::pair<std::size_t, std::size_t>> hits; // (position, attribute index)
    for (std::size_t a = 0; a < attributes_.size(); ++a) {
        const auto pos = text::find_words(ws, attribute_words_[a]);
        if (pos != std::string::npos) hits.emplace_back(pos, a);
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::string> out;
    out.reserve(hits.size());
    for (const auto& [pos, a] : hits) out.push_back(attributes_[a]);
    return out;
}

Embedding AttributeEmbedder::embed_attributes(std::span<const std::string> attributes) const
{
    std::vector<double> v(schema_.size(), 0.0);
    for (const auto& a : attributes) {
        const auto idx = schema_.index_of(a);
        if (!idx) throw Error(Errc::InvalidSchema, "attribute '" + a + "' is not in the schema");
        v[*idx] = 1.0;
    }
    Embedding e(std::move(v));
    return e.is_zero() ? e : normalize(e);
}

Embedding AttributeEmbedder::embed_text(std::string_view text_in) const
{
    const auto found = schema_.mentioned(text_in);
    return embed_attributes(found);
}

const SimIdentity* World::find(std::string_view id) const
{
    for (const auto& identity : identities) {
        if (identity.id == id) return &identity;
    }
    return nullptr;
}

namespace {

std::string identity_id(std::size_t index, std::size_t n)
{
    int width = 4;
    for (std::size_t m = n; m >= 10000; m /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof buf, "id%0*zu", width, index);
    return buf;
}

World assemble(AttributeSchema schema, std::vector<std::pair<std::string, std::vector<std::string>>> rows)
{
    AttributeEmbedder embedder(schema);
    std::vector<SimIdentity> identities;
    std::vector<GalleryItem> items;
    RelevanceMap relevance;
    for (auto& [id, attrs] : rows) {
        auto emb = embedder.embed_attributes(attrs);
        items.push_back({id, emb, attrs});
        relevance[id] = {id};
        identities.push_back({id, std::move(attrs), std::move(emb)});
    }
    Gallery gallery(std::move(items));
    return World{std::move(schema), std::move(identities), std::move(gallery), std::move(relevance)};
}

} // namespace

World generate_world(std::uint64_t seed, std::size_t n_identities, const AttributeSchema& schema)
{
    if (n_identities < 2) throw Error(Errc::SchemaTooSmall, "need at least 2 identities");
    if (n_identities > schema.combinations()) {
        throw Error(Errc::SchemaTooSmall, std::to_string(n_identities) + " identities but only "
                                              + std::to_string(schema.combinations()) + " attribute combinations");
    }
    std::mt19937_64 rng(seed);
    std::set<std::vector<std::size_t>> used;
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    rows.reserve(n_identities);
    while (rows.size() < n_identities) {
        std::vector<std::size_t> pick;
        std::vector<std::string> attrs;
        for (const auto& [name, values] : schema.categories()) {
            std::uniform_int_distribution<std::size_t> dist(0, values.size() - 1);
            pick.push_back(dist(rng));
            attrs.push_back(values[pick.back()]);
        }
        if (!used.insert(pick).second) continue;
        rows.emplace_back(identity_id(rows.size(), n_identities), std::move(attrs));
    }
    return assemble(schema, std::move(rows));
}

World world_from_gallery(Gallery gallery, const AttributeSchema& schema)
{
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    for (const auto& item : gallery.items()) {
        if (!item.attributes) throw Error(Errc::InvalidSchema, "gallery item '" + item.id + "' has no attributes");
        rows.emplace_back(item.id, *item.attributes);
    }
    return assemble(schema, std::move(rows));
}

std::string ground_truth_json(const World& world)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& identity : world.identities) j[identity.id] = identity.attributes;
    return j.dump(2) + "\n";
}

void save_world(const World& world, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    save_gallery(world.gallery, dir / "gallery.jsonl");
    io::write_file_atomic(dir / "ground_truth.json", ground_truth_json(world));
    io::write_file_atomic(dir / "schema.json", world.schema.to_json());
}

World load_world(const std::filesystem::path& dir)
{
    return world_from_gallery(load_gallery(dir / "gallery.jsonl"), AttributeSchema::load(dir / "schema.json"));
}

} // namespace ctgi::sim
