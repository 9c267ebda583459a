#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <istratde/benchmarks.hpp>
#include <istratde/error.hpp>

namespace istratde {

/// Environment variable consulted for the default worker count.
inline constexpr const char* kWorkersEnv = "ISTRATDE_WORKERS";

inline std::size_t default_worker_count()
{
    if (const char* env = std::getenv(kWorkersEnv)) {
        try {
            const long long value = std::stoll(env);
            if (value >= 1)
                return static_cast<std::size_t>(value);
        }
        catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(k) for k in [0, count) on up to `workers` threads using a static
/// contiguous partition. Each index is visited exactly once; the first
/// exception thrown by any worker is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn)
{
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t k = 0; k < count; ++k)
            fn(k);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end)
            break;
        threads.emplace_back([&, begin, end] {
            try {
                for (std::size_t k = begin; k < end; ++k)
                    fn(k);
            }
            catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    threads.clear(); // joins
    if (failure)
        std::rethrow_exception(failure);
}

/// Objective values for every row of `vectors`. Rows are independent and each
/// result lands in its own slot, so the output is identical for any worker count.
template <typename Scalar>
Vector<Scalar> evaluate_population(const BenchmarkProblem<Scalar>& problem, const RowMatrix<Scalar>& vectors, std::size_t workers = 1)
{
    if (vectors.rows() < 1)
        throw Error(ErrorCode::InvalidArgument, "evaluation batch must contain at least one row");
    if (vectors.cols() != problem.dim())
        throw Error(ErrorCode::DimensionMismatch,
            "batch rows have " + std::to_string(vectors.cols()) + " coordinates, problem has " + std::to_string(problem.dim()));
    Vector<Scalar> out(vectors.rows());
    parallel_for(static_cast<std::size_t>(vectors.rows()), workers,
        [&](std::size_t k) { out[static_cast<Eigen::Index>(k)] = evaluate(problem, vectors.row(static_cast<Eigen::Index>(k))); });
    return out;
}

} // namespace istratde
