#include "ctgi/embedding.hpp"

#include "ctgi/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ctgi {

Embedding::Embedding(std::vector<double> values)
    : values_(std::move(values))
{
    if (values_.empty()) {
        throw Error(Errc::InvalidEmbedding, "embedding must have at least one dimension");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(Errc::InvalidEmbedding, "non-finite value at index " + std::to_string(i));
        }
    }
}

double Embedding::norm() const noexcept
{
    double sum = 0.0;
    for (double x : values_) sum += x * x;
    return std::sqrt(sum);
}

bool Embedding::is_zero() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

Embedding normalize(const Embedding& v)
{
    if (v.is_zero()) {
        throw Error(Errc::ZeroVector, "cannot normalize the zero vector");
    }
    const double n = v.norm();
    std::vector<double> out(v.values().begin(), v.values().end());
    for (double& x : out) x /= n;
    return Embedding(std::move(out));
}

double dot(const Embedding& u, const Embedding& v)
{
    if (u.dim() != v.dim()) {
        throw Error(Errc::DimMismatch,
                    "dims " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) sum += u[i] * v[i];
    return sum;
}

double cosine(const Embedding& u, const Embedding& v)
{
    const double d = dot(u, v);
    if (u.is_zero() || v.is_zero()) {
        throw Error(Errc::ZeroVector, "cosine with a zero vector");
    }
    return std::clamp(d / (u.norm() * v.norm()), -1.0, 1.0);
}

} // namespace ctgi
