#pragma once

#include "ctgi/embedding.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctgi {

struct GalleryItem {
    std::string id;
    Embedding embedding;
    /// Ground-truth attributes; only present for simulated worlds.
    std::optional<std::vector<std::string>> attributes;
};

/// Immutable, non-empty set of items with unique ids and a shared dimension.
/// Embeddings are normalized once here so scoring reduces to a dot product.
class Gallery {
public:
    explicit Gallery(std::vector<GalleryItem> items);

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<GalleryItem>& items() const noexcept { return items_; }
    const GalleryItem& at(std::size_t index) const { return items_.at(index); }

    const GalleryItem* find(std::string_view id) const;

    /// Row `index` of the normalized embedding matrix.
    std::span<const double> unit_row(std::size_t index) const
    {
        return std::span<const double>(unit_.data() + index * dim_, dim_);
    }

private:
    std::vector<GalleryItem> items_;
    std::size_t dim_ = 0;
    std::vector<double> unit_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// JSON Lines: {"id": str, "embedding": [f64...], "attributes": [str...]?}.
/// Errors carry the 1-based line number.
Gallery load_gallery(const std::filesystem::path& path);
std::string gallery_to_jsonl(const Gallery& gallery);
void save_gallery(const Gallery& gallery, const std::filesystem::path& path);

} // namespace ctgi
