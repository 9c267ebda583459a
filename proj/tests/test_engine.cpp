#include <doctest.h>

#include <array>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <vector>

#include <istratde/engine.hpp>

using namespace istratde;

TEST_CASE("derive_stream is a pure function of its triple")
{
    RngStream a = derive_stream(7, 3, 11);
    RngStream b = derive_stream(7, 3, 11);
    for (int k = 0; k < 1000; ++k)
        CHECK(a() == b());
}

TEST_CASE("neighbouring triples give different streams")
{
    auto first_draws = [](RngStream s) {
        std::vector<std::uint64_t> out(1000);
        for (auto& x : out)
            x = s();
        return out;
    };
    const auto base = first_draws(derive_stream(7, 3, 11));
    CHECK(base != first_draws(derive_stream(7, 3, 12)));
    CHECK(base != first_draws(derive_stream(8, 3, 11)));
    CHECK(base != first_draws(derive_stream(7, 4, 11)));
    // generation and individual are not interchangeable
    CHECK(first_draws(derive_stream(7, 1, 2)) != first_draws(derive_stream(7, 2, 1)));
}

TEST_CASE("uniform and index ranges")
{
    RngStream rng(1, 2, 3);
    double sum = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        sum += u;
        CHECK(rng.index(7) < 7);
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("parallel_for visits every index once and propagates exceptions")
{
    for (std::size_t workers : {1u, 3u, 8u}) {
        std::vector<std::atomic<int>> hits(101);
        parallel_for(hits.size(), workers, [&](std::size_t k) { hits[k].fetch_add(1); });
        for (const auto& h : hits)
            CHECK(h.load() == 1);
        CHECK_THROWS_AS(parallel_for(10, workers, [](std::size_t k) {
            if (k == 7)
                throw Error(ErrorCode::InvalidArgument, "boom");
        }),
            Error);
    }
}

TEST_CASE("evaluate_population is bit-identical for any worker count")
{
    const auto problem = make_problem<double>(FunctionId::Rastrigin, 10, 3, true);
    RowMatrix<double> points(1000, 10);
    RngStream rng(11, 0, 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index j = 0; j < 10; ++j)
            points(i, j) = problem.lb[j] + rng.uniform() * (problem.ub[j] - problem.lb[j]);

    const Vector<double> one = evaluate_population(problem, points, 1);
    const Vector<double> eight = evaluate_population(problem, points, 8);
    CHECK(std::memcmp(one.data(), eight.data(), sizeof(double) * 1000) == 0);
    for (Eigen::Index i = 0; i < 1000; i += 97)
        CHECK(one[i] == evaluate(problem, points.row(i)));

    const RowMatrix<double> single = points.topRows(1);
    CHECK(evaluate_population(problem, single, 4)[0] == evaluate(problem, points.row(0)));
}

TEST_CASE("evaluate_population rejects empty and mismatched batches")
{
    const auto problem = make_problem<double>(FunctionId::Sphere, 3, 1, false);
    CHECK_THROWS_AS(evaluate_population(problem, RowMatrix<double>(0, 3)), Error);
    try {
        evaluate_population(problem, RowMatrix<double>(RowMatrix<double>::Zero(2, 4)));
        FAIL("expected DimensionMismatch");
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("default worker count honours the environment")
{
    ::setenv(kWorkersEnv, "3", 1);
    CHECK(default_worker_count() == 3);
    ::setenv(kWorkersEnv, "garbage", 1);
    CHECK(default_worker_count() >= 1);
    ::unsetenv(kWorkersEnv);
}
