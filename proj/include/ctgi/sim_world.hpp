#pragma once

#include "ctgi/embedding.hpp"
#include "ctgi/gallery.hpp"
#include "ctgi/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ctgi::sim {

/// Ordered categories, each with its attribute phrases. Attribute strings
/// are unique across the schema; at least 4 categories with 3+ values each.
class AttributeSchema {
public:
    using Category = std::pair<std::string, std::vector<std::string>>;

    explicit AttributeSchema(std::vector<Category> categories);

    /// Six categories of five values each.
    static AttributeSchema defaults();
    /// JSON object {category: [values...]}, key order preserved.
    static AttributeSchema parse_json(const std::string& text);
    static AttributeSchema load(const std::filesystem::path& path);
    std::string to_json() const;

    const std::vector<Category>& categories() const noexcept { return categories_; }
    /// Total attribute count; also the embedding dimension.
    std::size_t size() const noexcept { return attributes_.size(); }
    const std::string& attribute(std::size_t index) const { return attributes_.at(index); }
    std::optional<std::size_t> index_of(std::string_view attribute) const;
    /// Index of the category an attribute belongs to.
    std::size_t category_of(std::size_t attribute_index) const { return category_of_.at(attribute_index); }
    /// Number of distinct one-value-per-category combinations, saturating.
    std::uint64_t combinations() const noexcept;

    /// Attributes whose word sequence occurs in `text`, ordered by first
    /// occurrence (schema order on ties), without duplicates.
    std::vector<std::string> mentioned(std::string_view text) const;

private:
    std::vector<Category> categories_;
    std::vector<std::string> attributes_;
    std::vector<std::vector<std::string>> attribute_words_;
    std::vector<std::size_t> category_of_;
};

/// Bag-of-attributes stand-in for an image/text encoder: normalized
/// multi-hot vectors over the schema vocabulary.
class AttributeEmbedder {
public:
    explicit AttributeEmbedder(AttributeSchema schema) : schema_(std::move(schema)) {}

    std::size_t dim() const noexcept { return schema_.size(); }
    const AttributeSchema& schema() const noexcept { return schema_; }

    /// Zero vector for an empty set. Throws InvalidSchema for unknown attributes.
    Embedding embed_attributes(std::span<const std::string> attributes) const;
    /// Zero vector when the text mentions no schema attribute.
    Embedding embed_text(std::string_view text) const;

private:
    AttributeSchema schema_;
};

struct SimIdentity {
    std::string id;
    /// One value per category, in schema category order.
    std::vector<std::string> attributes;
    Embedding image_embedding;
};

struct World {
    AttributeSchema schema;
    std::vector<SimIdentity> identities;
    Gallery gallery;
    /// Each identity is relevant only to the query derived from it.
    RelevanceMap relevance;

    const SimIdentity* find(std::string_view id) const;
};

/// Deterministic in (seed, n, schema). Throws SchemaTooSmall when n exceeds
/// the number of distinct attribute combinations.
World generate_world(std::uint64_t seed, std::size_t n_identities, const AttributeSchema& schema);

/// Builds a world from a gallery whose items carry attributes.
World world_from_gallery(Gallery gallery, const AttributeSchema& schema);

/// Writes gallery.jsonl, ground_truth.json and schema.json under `dir`.
void save_world(const World& world, const std::filesystem::path& dir);
World load_world(const std::filesystem::path& dir);

std::string ground_truth_json(const World& world);

} // namespace ctgi::sim
