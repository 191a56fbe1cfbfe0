#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ctgi {

/// Dense real vector. Always non-empty and finite; may be the zero vector
/// (text that mentions nothing embeds to zero and fails later at scoring).
class Embedding {
public:
    explicit Embedding(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double norm() const noexcept;
    bool is_zero() const noexcept;

    friend bool operator==(const Embedding&, const Embedding&) = default;

private:
    std::vector<double> values_;
};

/// Unit-length copy. Throws ZeroVector when every entry is zero.
Embedding normalize(const Embedding& v);

double dot(const Embedding& u, const Embedding& v);

/// Cosine similarity clamped to [-1, 1]. Throws DimMismatch or ZeroVector.
double cosine(const Embedding& u, const Embedding& v);

} // namespace ctgi
