#include "ctgi/pe_stretch.hpp"

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace ctgi::pe {

PEMatrix::PEMatrix(std::size_t rows, std::size_t dim, std::vector<double> data)
    : rows_(rows)
    , dim_(dim)
    , data_(std::move(data))
{
    if (rows_ < 2 || dim_ == 0) {
        throw Error(Errc::DimInconsistent, "PE matrix needs at least 2 rows and 1 column");
    }
    if (data_.size() != rows_ * dim_) {
        throw Error(Errc::DimInconsistent, "data holds " + std::to_string(data_.size()) + " values, expected "
                                               + std::to_string(rows_ * dim_));
    }
    for (double x : data_) {
        if (!std::isfinite(x)) throw Error(Errc::InvalidEmbedding, "non-finite positional embedding value");
    }
}

PEMatrix::PEMatrix(std::size_t rows, std::size_t dim)
    : PEMatrix(rows, dim, std::vector<double>(rows * dim, 0.0))
{
}

std::span<const double> PEMatrix::row(std::size_t pos) const
{
    if (pos < 1 || pos > rows_) throw Error(Errc::OutOfRange, "row " + std::to_string(pos));
    return {data_.data() + (pos - 1) * dim_, dim_};
}

std::span<double> PEMatrix::row(std::size_t pos)
{
    if (pos < 1 || pos > rows_) throw Error(Errc::OutOfRange, "row " + std::to_string(pos));
    return {data_.data() + (pos - 1) * dim_, dim_};
}

StretchSpec::StretchSpec(std::size_t n_keep, std::size_t n_src, std::size_t n_dst)
    : n_keep_(n_keep)
    , n_src_(n_src)
    , n_dst_(n_dst)
{
    // n_dst == n_src is allowed: lambda is 1 and the stretch is the identity.
    if (n_keep_ < 1 || n_keep_ >= n_src_ || n_src_ > n_dst_) {
        throw Error(Errc::InvalidSpec, "need 1 <= keep < src <= dst, got keep=" + std::to_string(n_keep_)
                                           + " src=" + std::to_string(n_src_) + " dst=" + std::to_string(n_dst_));
    }
}

double StretchSpec::lambda() const noexcept
{
    return static_cast<double>(n_dst_ - n_keep_) / static_cast<double>(n_src_ - n_keep_);
}

double source_position(std::size_t pos, const StretchSpec& spec)
{
    if (pos < 1 || pos > spec.n_dst()) {
        throw Error(Errc::OutOfRange, "position " + std::to_string(pos) + " outside [1, "
                                          + std::to_string(spec.n_dst()) + "]");
    }
    if (pos <= spec.n_keep()) return static_cast<double>(pos);
    // Integer product first so the last position lands exactly on n_src.
    const auto offset = static_cast<double>((pos - spec.n_keep()) * (spec.n_src() - spec.n_keep()));
    return static_cast<double>(spec.n_keep()) + offset / static_cast<double>(spec.n_dst() - spec.n_keep());
}

namespace {

void fill_row(const PEMatrix& pe, const StretchSpec& spec, std::size_t pos, std::span<double> out)
{
    const double src = source_position(pos, spec);
    const double lower = std::floor(src);
    const double alpha = src - lower;
    const auto lo = pe.row(static_cast<std::size_t>(lower));
    if (alpha == 0.0) {
        std::copy(lo.begin(), lo.end(), out.begin());
        return;
    }
    const auto hi = pe.row(static_cast<std::size_t>(std::ceil(src)));
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d] = (1.0 - alpha) * lo[d] + alpha * hi[d];
    }
}

void check_rows(const PEMatrix& pe, const StretchSpec& spec)
{
    if (pe.rows() != spec.n_src()) {
        throw Error(Errc::RowMismatch, "matrix has " + std::to_string(pe.rows()) + " rows, spec expects "
                                           + std::to_string(spec.n_src()));
    }
}

} // namespace

PEMatrix stretch_serial(const PEMatrix& pe, const StretchSpec& spec)
{
    check_rows(pe, spec);
    PEMatrix out(spec.n_dst(), pe.dim());
    for (std::size_t pos = 1; pos <= spec.n_dst(); ++pos) fill_row(pe, spec, pos, out.row(pos));
    return out;
}

PEMatrix stretch(const PEMatrix& pe, const StretchSpec& spec, int threads)
{
    if (threads <= 1) return stretch_serial(pe, spec);
    check_rows(pe, spec);
    PEMatrix out(spec.n_dst(), pe.dim());
    const auto n = static_cast<long long>(spec.n_dst());
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 1; i <= n; ++i) {
        const auto pos = static_cast<std::size_t>(i);
        fill_row(pe, spec, pos, out.row(pos));
    }
    return out;
}

std::string to_pem_text(const PEMatrix& pe)
{
    std::string out = "PEM1 " + std::to_string(pe.rows()) + " " + std::to_string(pe.dim()) + "\n";
    char buf[64];
    for (std::size_t pos = 1; pos <= pe.rows(); ++pos) {
        const auto r = pe.row(pos);
        for (std::size_t d = 0; d < r.size(); ++d) {
            if (d > 0) out += ' ';
            auto res = std::to_chars(buf, buf + sizeof buf, r[d], std::chars_format::general, 17);
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    return out;
}

PEMatrix parse_pem_text(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](Errc code, const std::string& what) {
        throw Error(code, "line " + std::to_string(line_no) + ": " + what);
    };

    if (!std::getline(in, line)) {
        line_no = 1;
        fail(Errc::ParseError, "missing header");
    }
    ++line_no;
    std::istringstream header(line);
    std::string magic;
    long long rows = 0;
    long long dim = 0;
    if (!(header >> magic >> rows >> dim) || magic != "PEM1") fail(Errc::ParseError, "expected 'PEM1 <rows> <dim>'");
    std::string trailing;
    if (header >> trailing) fail(Errc::ParseError, "unexpected text after header");
    if (rows < 2 || dim < 1) fail(Errc::DimInconsistent, "header declares an invalid shape");

    const auto n_rows = static_cast<std::size_t>(rows);
    const auto n_dim = static_cast<std::size_t>(dim);
    std::vector<double> data;
    data.reserve(n_rows * n_dim);
    std::size_t rows_read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (rows_read == n_rows) fail(Errc::DimInconsistent, "more rows than the declared " + std::to_string(n_rows));
        std::size_t cols = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p == end) break;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t')) {
                fail(Errc::ParseError, "malformed number in column " + std::to_string(cols + 1));
            }
            if (!std::isfinite(v)) fail(Errc::ParseError, "non-finite value in column " + std::to_string(cols + 1));
            data.push_back(v);
            ++cols;
            p = next;
        }
        if (cols != n_dim) {
            fail(Errc::DimInconsistent, "row has " + std::to_string(cols) + " values, expected " + std::to_string(n_dim));
        }
        ++rows_read;
    }
    if (rows_read != n_rows) {
        throw Error(Errc::DimInconsistent, "header declares " + std::to_string(n_rows) + " rows, found "
                                               + std::to_string(rows_read));
    }
    return PEMatrix(n_rows, n_dim, std::move(data));
}

PEMatrix load_pe(const std::filesystem::path& path)
{
    try {
        return parse_pem_text(io::read_file(path));
    } catch (const Error& e) {
        if (e.code() == Errc::IOError) throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

void save_pe(const PEMatrix& pe, const std::filesystem::path& path)
{
    io::write_file_atomic(path, to_pem_text(pe));
}

} // namespace ctgi::pe
