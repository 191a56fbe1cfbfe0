#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ctgi::pe {

/// Learned positional-embedding table, positions 1..rows, row-major.
class PEMatrix {
public:
    PEMatrix(std::size_t rows, std::size_t dim, std::vector<double> data);
    PEMatrix(std::size_t rows, std::size_t dim);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }

    /// 1-based row access.
    std::span<const double> row(std::size_t pos) const;
    std::span<double> row(std::size_t pos);

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const PEMatrix&, const PEMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t dim_;
    std::vector<double> data_;
};

/// Keep the first `n_keep` positions, then map n_src positions onto n_dst.
/// The stretch factor is always derived from the three lengths.
class StretchSpec {
public:
    StretchSpec() : StretchSpec(20, 77, 248) {}
    StretchSpec(std::size_t n_keep, std::size_t n_src, std::size_t n_dst);

    std::size_t n_keep() const noexcept { return n_keep_; }
    std::size_t n_src() const noexcept { return n_src_; }
    std::size_t n_dst() const noexcept { return n_dst_; }

    /// (n_dst - n_keep) / (n_src - n_keep); 4 exactly for 20/77/248.
    double lambda() const noexcept;

private:
    std::size_t n_keep_;
    std::size_t n_src_;
    std::size_t n_dst_;
};

/// Fractional source position read for output position `pos` (1-based):
/// pos itself up to n_keep, then n_keep + (pos - n_keep) / lambda.
double source_position(std::size_t pos, const StretchSpec& spec);

/// Stretched table with spec.n_dst() rows. Rows are independent, so they are
/// filled in parallel; `stretch_serial` is the reference.
PEMatrix stretch(const PEMatrix& pe, const StretchSpec& spec, int threads = 1);
PEMatrix stretch_serial(const PEMatrix& pe, const StretchSpec& spec);

/// Text format: "PEM1 <rows> <dim>" then one space-separated row per line,
/// 17 significant digits so values round-trip exactly.
std::string to_pem_text(const PEMatrix& pe);
PEMatrix parse_pem_text(const std::string& text);

PEMatrix load_pe(const std::filesystem::path& path);
void save_pe(const PEMatrix& pe, const std::filesystem::path& path);

} // namespace ctgi::pe
