#include "ctgi/gallery.hpp"

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"

#include <nlohmann/json.hpp>

namespace ctgi {

Gallery::Gallery(std::vector<GalleryItem> items)
    : items_(std::move(items))
{
    if (items_.empty()) throw Error(Errc::EmptyGallery, "gallery has no items");
    dim_ = items_.front().embedding.dim();
    unit_.reserve(items_.size() * dim_);
    for (std::size_t i = 0; i < items_.size(); ++i) {
        auto& item = items_[i];
        if (item.embedding.dim() != dim_) {
            throw Error(Errc::DimMismatch, "item '" + item.id + "' has dim "
                                               + std::to_string(item.embedding.dim()) + ", expected "
                                               + std::to_string(dim_));
        }
        if (!by_id_.emplace(item.id, i).second) {
            throw Error(Errc::DuplicateId, "duplicate item id '" + item.id + "'");
        }
        item.embedding = normalize(item.embedding);
        const auto v = item.embedding.values();
        unit_.insert(unit_.end(), v.begin(), v.end());
    }
}

const GalleryItem* Gallery::find(std::string_view id) const
{
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &items_[it->second];
}

Gallery load_gallery(const std::filesystem::path& path)
{
    const auto lines = io::read_lines(path);
    std::vector<GalleryItem> items;
    std::size_t expected_dim = 0;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto& line = lines[n];
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, where + ": " + e.what());
        }
        try {
            auto values = j.at("embedding").get<std::vector<double>>();
            if (expected_dim == 0) {
                expected_dim = values.size();
            } else if (values.size() != expected_dim) {
                throw Error(Errc::DimMismatch, where + ": embedding dim " + std::to_string(values.size())
                                                   + ", expected " + std::to_string(expected_dim));
            }
            GalleryItem item{j.at("id").get<std::string>(), Embedding(std::move(values)), std::nullopt};
            if (j.contains("attributes")) {
                item.attributes = j.at("attributes").get<std::vector<std::string>>();
            }
            items.push_back(std::move(item));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, where + ": " + e.what());
        } catch (const Error& e) {
            if (e.code() == Errc::DimMismatch) throw;
            throw Error(e.code(), where + ": " + e.detail());
        }
    }
    if (items.empty()) throw Error(Errc::EmptyGallery, path.string() + " has no items");
    return Gallery(std::move(items));
}

std::string gallery_to_jsonl(const Gallery& gallery)
{
    std::string out;
    for (const auto& item : gallery.items()) {
        nlohmann::ordered_json j;
        j["id"] = item.id;
        j["embedding"] = std::vector<double>(item.embedding.values().begin(), item.embedding.values().end());
        if (item.attributes) j["attributes"] = *item.attributes;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_gallery(const Gallery& gallery, const std::filesystem::path& path)
{
    io::write_file_atomic(path, gallery_to_jsonl(gallery));
}

} // namespace ctgi
