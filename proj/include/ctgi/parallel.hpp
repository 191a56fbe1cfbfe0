#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ctgi {

inline int max_threads() noexcept
{
#if defined(_OPENMP)
    return ::omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs f(i) for i in [0, n). With threads <= 1 the loop is plain serial.
/// If any iteration throws, the exception from the lowest index is rethrown
/// once every iteration has finished, so failures are reported in the same
/// order a serial run would report them.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f)
{
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace ctgi
