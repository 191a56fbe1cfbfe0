#include "ctgi/kernels.hpp"

#include <algorithm>

namespace ctgi::kernels {

namespace {

double unit_dot(std::span<const double> a, std::span<const double> b)
{
    double sum = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) sum += a[d] * b[d];
    return std::clamp(sum, -1.0, 1.0);
}

} // namespace

std::vector<double> score_gallery_serial(std::span<const double> unit_query, const Gallery& gallery)
{
    std::vector<double> scores(gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        scores[i] = unit_dot(unit_query, gallery.unit_row(i));
    }
    return scores;
}

std::vector<double> score_gallery(std::span<const double> unit_query, const Gallery& gallery, int threads)
{
    if (threads <= 1) return score_gallery_serial(unit_query, gallery);
    const auto n = static_cast<long long>(gallery.size());
    std::vector<double> scores(gallery.size());
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        scores[row] = unit_dot(unit_query, gallery.unit_row(row));
    }
    return scores;
}

} // namespace ctgi::kernels
