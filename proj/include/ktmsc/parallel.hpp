#pragma once

#include <Eigen/Core>

#include <exception>
#include <mutex>

namespace ktmsc {

// Every data-parallel kernel takes an execution policy. `serial` is the
// reference path; `parallel` distributes independent loop iterations with
// OpenMP and must produce bit-identical results.
enum class Exec { serial, parallel };

// Runs body(i) for i in [0, n). Each iteration must write only to its own
// outputs. The first exception thrown by any iteration is rethrown.
template <class Body>
void parallel_for(Exec exec, Eigen::Index n, Body&& body) {
    if (exec == Exec::serial || n < 2) {
        for (Eigen::Index i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ktmsc
