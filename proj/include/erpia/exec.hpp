#pragma once

#include <cstddef>

namespace erpia {

/// Serial runs the straightforward reference loops; Parallel runs the blocked
/// OpenMP kernels whose results do not depend on the thread count.
enum class Exec { Serial, Parallel };

/// Paths per reduction block in the parallel kernels. Partial sums are formed
/// per block and combined in block order.
inline constexpr std::size_t kReduceBlock = 2048;

/// Sets the OpenMP thread count; 0 keeps the runtime default.
void set_threads(int n);
[[nodiscard]] int max_threads();

} // namespace erpia

#include <exception>

namespace erpia {

/// Runs f(i) for i in [0, n). Exceptions thrown by f are rethrown on the
/// calling thread (the first one wins).
template <class F>
void parallel_for(std::size_t n, Exec exec, F&& f) {
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr error;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(erpia_parallel_for_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace erpia
