// Serial reference kernels against their OpenMP counterparts.

#include "ctgi/gallery.hpp"
#include "ctgi/kernels.hpp"
#include "ctgi/pe_stretch.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace ctgi;

namespace {

Gallery random_gallery(std::size_t n, std::size_t dim)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    std::vector<GalleryItem> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (auto& x : v) x = nd(rng);
        items.push_back({"g" + std::to_string(i), Embedding(std::move(v)), std::nullopt});
    }
    return Gallery(std::move(items));
}

std::vector<double> unit_query(std::size_t dim)
{
    std::vector<double> q(dim, 1.0 / std::sqrt(double(dim)));
    return q;
}

pe::PEMatrix random_pe(std::size_t dim)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> data(77 * dim);
    for (auto& x : data) x = u(rng);
    return pe::PEMatrix(77, dim, std::move(data));
}

void BM_ScoreSerial(benchmark::State& state)
{
    const auto g = random_gallery(std::size_t(state.range(0)), 512);
    const auto q = unit_query(512);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::score_gallery_serial(q, g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreParallel(benchmark::State& state)
{
    const auto g = random_gallery(std::size_t(state.range(0)), 512);
    const auto q = unit_query(512);
    const int threads = omp_get_max_threads();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::score_gallery(q, g, threads));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_StretchSerial(benchmark::State& state)
{
    const auto pe = random_pe(std::size_t(state.range(0)));
    const pe::StretchSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(pe::stretch_serial(pe, spec));
}

void BM_StretchParallel(benchmark::State& state)
{
    const auto pe = random_pe(std::size_t(state.range(0)));
    const pe::StretchSpec spec;
    const int threads = omp_get_max_threads();
    for (auto _ : state) benchmark::DoNotOptimize(pe::stretch(pe, spec, threads));
}

} // namespace

BENCHMARK(BM_ScoreSerial)->Arg(1000)->Arg(10000)->Arg(50000);
BENCHMARK(BM_ScoreParallel)->Arg(1000)->Arg(10000)->Arg(50000);
BENCHMARK(BM_StretchSerial)->Arg(512)->Arg(768);
BENCHMARK(BM_StretchParallel)->Arg(512)->Arg(768);

BENCHMARK_MAIN();
