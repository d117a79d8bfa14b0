#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace qsr {

/// Sets the OpenMP team size used by every parallel kernel; 0 restores the runtime default.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n) across the OpenMP team with a dynamic schedule.
/// Results must be written to per-index slots; the first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace qsr
