#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include <istratde/operators.hpp>

using namespace istratde;

namespace {

RowMatrix<double> random_vectors(Eigen::Index n, Eigen::Index d, std::uint64_t seed)
{
    RowMatrix<double> m(n, d);
    RngStream rng(seed, 0, 0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            m(i, j) = 10.0 * rng.uniform() - 5.0;
    return m;
}

Vector<double> fitness_of(const RowMatrix<double>& m)
{
    Vector<double> f(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        f[i] = m.row(i).squaredNorm();
    return f;
}

Vector<double> vec(std::initializer_list<double> values)
{
    Vector<double> v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double x : values)
        v[k++] = x;
    return v;
}

// Upper 1% point of chi-square with 4 degrees of freedom.
constexpr double kChi2Crit4 = 13.276704135987622;

} // namespace

TEST_CASE("pbest_count is ceil(0.05 N), at least one")
{
    CHECK(pbest_count(100) == 5);
    CHECK(pbest_count(20) == 1);
    CHECK(pbest_count(21) == 2);
    CHECK(pbest_count(11) == 1);
    CHECK(pbest_count(2000) == 100);
}

TEST_CASE("select_base")
{
    RngStream rng(1, 1, 1);

    SUBCASE("current is the target")
    {
        const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(random_vectors(12, 2, 3)));
        CHECK(select_base(BaseVectorKind::Current, ref, 7, {}, rng) == 7);
    }
    SUBCASE("best breaks ties by lowest index")
    {
        const ReferenceSet ref = ReferenceSet::from_fitness(vec({3, 1, 1, 9}));
        CHECK(select_base(BaseVectorKind::Best, ref, 0, {}, rng) == 1);
    }
    SUBCASE("pbest draws from the five best of 100")
    {
        Vector<double> fitness(100);
        for (Eigen::Index i = 0; i < 100; ++i)
            fitness[i] = static_cast<double>((i * 37) % 100); // a permutation of 0..99
        const ReferenceSet ref = ReferenceSet::from_fitness(fitness);
        std::set<std::size_t> top;
        for (Eigen::Index i = 0; i < 100; ++i)
            if (fitness[i] < 5)
                top.insert(static_cast<std::size_t>(i));
        std::set<std::size_t> seen;
        for (int k = 0; k < 2000; ++k)
            seen.insert(select_base(BaseVectorKind::Pbest, ref, 0, {}, rng));
        CHECK(seen == top);
    }
    SUBCASE("rand avoids target and exclusions")
    {
        const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(random_vectors(5, 2, 3)));
        const std::array<std::size_t, 2> excluded{1, 3};
        std::set<std::size_t> seen;
        for (int k = 0; k < 500; ++k)
            seen.insert(select_base(BaseVectorKind::Rand, ref, 0, excluded, rng));
        CHECK(seen == std::set<std::size_t>{2, 4});
    }
    SUBCASE("rand with nothing eligible is InsufficientPopulation")
    {
        const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(random_vectors(3, 2, 3)));
        const std::array<std::size_t, 2> excluded{1, 2};
        try {
            select_base(BaseVectorKind::Rand, ref, 0, excluded, rng);
            FAIL("expected InsufficientPopulation");
        }
        catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InsufficientPopulation);
        }
    }
}

TEST_CASE("generalized mutation with F = 0 returns the left base exactly")
{
    const RowMatrix<double> x = random_vectors(15, 4, 8);
    const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(x));
    for (const auto& tuple : enumerate_pool()) {
        RngStream rng(5, 2, pool_index(tuple));
        const MutationDraw draw = draw_generalized(tuple, ref, 3, rng);
        const Vector<double> v = mutant_from_draw(x, draw, 0.0);
        CHECK(v == x.row(static_cast<Eigen::Index>(draw.left)).transpose());
        if (tuple.left == BaseVectorKind::Current)
            CHECK(draw.left == 3);
        if (tuple.left == BaseVectorKind::Best)
            CHECK(draw.left == ref.best);
    }
}

TEST_CASE("generalized draws keep rand and difference indices pairwise distinct at N = 11")
{
    const RowMatrix<double> x = random_vectors(11, 2, 9);
    const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(x));
    for (const auto& tuple : enumerate_pool()) {
        for (std::uint64_t trial = 0; trial < 20; ++trial) {
            const std::size_t target = trial % 11;
            RngStream rng(77, trial, pool_index(tuple));
            const MutationDraw draw = draw_generalized(tuple, ref, target, rng);
            std::vector<std::size_t> used;
            if (tuple.left == BaseVectorKind::Rand)
                used.push_back(draw.left);
            if (tuple.right == BaseVectorKind::Rand)
                used.push_back(draw.right);
            for (const auto& [a, b] : draw.diffs) {
                used.push_back(a);
                used.push_back(b);
            }
            CHECK(draw.diffs.size() == static_cast<std::size_t>(tuple.diff_count));
            std::set<std::size_t> unique(used.begin(), used.end());
            CHECK(unique.size() == used.size());
            CHECK(unique.count(target) == 0);
        }
    }
}

TEST_CASE("(rand, rand, 1) uses four distinct indices")
{
    const RowMatrix<double> x = random_vectors(12, 2, 1);
    const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(x));
    const StrategyTuple t{BaseVectorKind::Rand, BaseVectorKind::Rand, 1, CrossoverKind::Binomial};
    for (std::uint64_t k = 0; k < 100; ++k) {
        RngStream rng(4, 4, k);
        const MutationDraw d = draw_generalized(t, ref, 0, rng);
        const std::set<std::size_t> s{d.left, d.right, d.diffs[0].first, d.diffs[0].second};
        CHECK(s.size() == 4);
        const double f = 0.7;
        const Vector<double> expected = x.row(d.left).transpose() + f * (x.row(d.right) - x.row(d.left)).transpose()
            + f * (x.row(d.diffs[0].first) - x.row(d.diffs[0].second)).transpose();
        CHECK((mutant_from_draw(x, d, f) - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("(current, pbest, 1) matches current-to-pbest/1")
{
    const RowMatrix<double> x = random_vectors(40, 6, 12);
    const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(x));
    const StrategyTuple t{BaseVectorKind::Current, BaseVectorKind::Pbest, 1, CrossoverKind::Binomial};
    for (std::uint64_t k = 0; k < 200; ++k) {
        const std::size_t target = k % 40;
        const double f = 0.05 + 0.9 * static_cast<double>(k) / 200.0;
        // Same stream: both draw pbest, r1, r2 in the same order.
        RngStream rg(6, 1, k);
        RngStream rn(6, 1, k);
        const StrategyConfig<double> s(t, f, 0.5);
        const Vector<double> generalized = mutate_generalized(x, ref, target, s, rg);
        const Vector<double> named = mutate_named(NamedStrategy::CurrentToPbest1, x, ref, target, f, rn);
        CHECK(generalized == named);
    }
}

TEST_CASE("named mutations")
{
    SUBCASE("rand/1 with F = 0 is x_r1")
    {
        const RowMatrix<double> x = random_vectors(10, 3, 2);
        const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(x));
        RngStream rng(1, 2, 3);
        RngStream replay(1, 2, 3);
        const NamedDraw d = draw_named(NamedStrategy::Rand1, ref, 0, replay);
        CHECK(mutate_named(NamedStrategy::Rand1, x, ref, 0, 0.0, rng) == x.row(d.r[0]).transpose());
        const std::set<std::size_t> s{0, d.r[0], d.r[1], d.r[2]};
        CHECK(s.size() == 4);
    }
    SUBCASE("best/1 is x_best when the drawn difference vanishes")
    {
        RowMatrix<double> x(6, 2);
        x << 0, 0, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5;
        const ReferenceSet ref = ReferenceSet::from_fitness(fitness_of(x));
        REQUIRE(ref.best == 0);
        int vanishing = 0;
        for (std::uint64_t k = 0; k < 50; ++k) {
            RngStream rng(3, 3, k);
            const NamedDraw d = draw_named(NamedStrategy::Best1, ref, 2, rng);
            const Vector<double> v = named_mutant(NamedStrategy::Best1, x, 2, d, 0.8);
            if (d.r[0] != 0 && d.r[1] != 0) {
                CHECK(v == x.row(0).transpose());
                ++vanishing;
            }
            else {
                CHECK(v.cwiseAbs() == Vector<double>::Constant(2, 4.0));
            }
        }
        CHECK(vanishing > 0);
    }
    SUBCASE("current-to-rand/1 on a hand-built 1-D population")
    {
        RowMatrix<double> x(5, 1);
        x << 0, 1, 2, 3, 4;
        // x_i + F (x_r1 - x_i) + F (x_r2 - x_r3)
        NamedDraw d;
        d.r = {4, 0, 1};
        CHECK(named_mutant(NamedStrategy::CurrentToRand1, x, 2, d, 1.0)[0] == doctest::Approx(3.0));
        CHECK(named_mutant(NamedStrategy::CurrentToRand1, x, 2, d, 0.5)[0] == doctest::Approx(2.5));
        RowMatrix<double> y(5, 1);
        y << 0, 1, 2, 3, 3;
        d.r = {1, 3, 4};
        CHECK(named_mutant(NamedStrategy::CurrentToRand1, y, 0, d, 1.0)[0] == doctest::Approx(1.0));
    }
    SUBCASE("current/1 and forced-draw equivalence with the generalized form")
    {
        const RowMatrix<double> x = random_vectors(20, 3, 21);
        NamedDraw nd;
        nd.r = {4, 9, 0};
        MutationDraw md;
        md.left = 7;
        md.right = 7;
        md.diffs = {{4, 9}};
        CHECK((named_mutant(NamedStrategy::Current1, x, 7, nd, 0.6) - mutant_from_draw(x, md, 0.6)).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("binomial crossover")
{
    const Vector<double> x = Vector<double>::Zero(10);
    const Vector<double> v = Vector<double>::Ones(10);

    SUBCASE("cr = 0 crosses only j_rand")
    {
        for (std::uint64_t k = 0; k < 200; ++k) {
            RngStream rng(1, 0, k);
            const auto t = crossover_bin(x, v, 0.0, rng);
            REQUIRE(t.j_rand);
            CHECK(t.coords.sum() == 1.0);
            CHECK(t.coords[*t.j_rand] == 1.0);
        }
    }
    SUBCASE("cr = 1 copies v")
    {
        RngStream rng(1, 0, 0);
        CHECK(crossover_bin(x, v, 1.0, rng).coords == v);
    }
    SUBCASE("mean inherited count at cr = 0.5, D = 10 is 5.5")
    {
        RngStream rng(99, 0, 0);
        double total = 0.0;
        constexpr int trials = 100000;
        for (int k = 0; k < trials; ++k)
            total += crossover_bin(x, v, 0.5, rng).coords.sum();
        CHECK(std::abs(total / trials - 5.5) < 0.05);
    }
    SUBCASE("at least one coordinate always comes from v")
    {
        for (std::uint64_t k = 0; k < 500; ++k) {
            RngStream rng(2, 0, k);
            const double cr = rng.uniform() * 0.3;
            CHECK(crossover_bin(x, v, cr, rng).coords.sum() >= 1.0);
        }
    }
    SUBCASE("length mismatch")
    {
        RngStream rng(1, 0, 0);
        CHECK_THROWS_AS(crossover_bin(x, Vector<double>(Vector<double>::Ones(3)), 0.5, rng), Error);
    }
}

TEST_CASE("exponential crossover")
{
    SUBCASE("cr = 0 copies one position, cr = 1 copies all")
    {
        const Vector<double> x = Vector<double>::Zero(7);
        const Vector<double> v = Vector<double>::Ones(7);
        for (std::uint64_t k = 0; k < 100; ++k) {
            RngStream rng(3, 0, k);
            CHECK(crossover_exp(x, v, 0.0, rng).coords.sum() == 1.0);
            CHECK(crossover_exp(x, v, 1.0, rng).coords == v);
        }
    }
    SUBCASE("copied positions form one circular block")
    {
        const Eigen::Index d = 8;
        const Vector<double> x = Vector<double>::Zero(d);
        const Vector<double> v = Vector<double>::Ones(d);
        for (std::uint64_t k = 0; k < 500; ++k) {
            RngStream rng(4, 0, k);
            const auto t = crossover_exp(x, v, 0.7, rng);
            const auto length = static_cast<Eigen::Index>(t.coords.sum());
            for (Eigen::Index m = 0; m < length; ++m)
                CHECK(t.coords[(*t.j_rand + m) % d] == 1.0);
            // Count 0 -> 1 transitions around the circle: a single block has exactly one (or none when full).
            int rises = 0;
            for (Eigen::Index j = 0; j < d; ++j)
                rises += (t.coords[j] == 1.0 && t.coords[(j + d - 1) % d] == 0.0) ? 1 : 0;
            CHECK(rises == (length == d ? 0 : 1));
        }
    }
    SUBCASE("block length follows the truncated geometric pmf at D = 5, cr = 0.5")
    {
        // P(L = k) = 0.5^(k-1) * 0.5 for k < 5 and 0.5^4 for k = 5.
        const std::array<double, 5> pmf{0.5, 0.25, 0.125, 0.0625, 0.0625};
        std::array<double, 5> counts{};
        const Vector<double> x = Vector<double>::Zero(5);
        const Vector<double> v = Vector<double>::Ones(5);
        RngStream rng(5, 5, 5);
        constexpr int draws = 100000;
        for (int k = 0; k < draws; ++k)
            counts[static_cast<std::size_t>(crossover_exp(x, v, 0.5, rng).coords.sum()) - 1] += 1;
        double chi2 = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
            const double expected = pmf[k] * draws;
            chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
        }
        CHECK(chi2 < kChi2Crit4);
    }
}

TEST_CASE("arithmetic crossover")
{
    const Vector<double> x = vec({0, 0});
    const Vector<double> v = vec({2, 4});
    CHECK(crossover_arith_at(x, v, 0.0).coords == x);
    CHECK(crossover_arith_at(x, v, 1.0).coords == v);
    const auto quarter = crossover_arith_at(x, v, 0.25).coords;
    CHECK(quarter[0] == doctest::Approx(0.5));
    CHECK(quarter[1] == doctest::Approx(1.0));
    CHECK_FALSE(crossover_arith_at(x, v, 0.25).j_rand);

    RngStream rng(8, 8, 8);
    for (int k = 0; k < 100; ++k) {
        const auto u = crossover_arith(x, v, rng).coords;
        // one alpha for all coordinates: u lies on the segment, u1 = 2 u0
        CHECK(u[1] == doctest::Approx(2.0 * u[0]));
        CHECK(u[0] >= 0.0);
        CHECK(u[0] <= 2.0);
    }
}

TEST_CASE("repair_bounds clamps componentwise")
{
    const Vector<double> lb = Vector<double>::Constant(3, -100.0);
    const Vector<double> ub = Vector<double>::Constant(3, 100.0);
    CHECK(repair_bounds(vec({-200, 0, 200}), lb, ub) == vec({-100, 0, 100}));
    CHECK(repair_bounds(vec({1, -2, 3}), lb, ub) == vec({1, -2, 3}));
    CHECK(repair_bounds(vec({101, 0, 0}), lb, ub)[0] == 100.0);
}

TEST_CASE("select_greedy")
{
    const Vector<double> x = vec({1, 1});
    const Vector<double> u = vec({2, 2});
    auto tie = select_greedy(x, 3.0, u, 3.0);
    CHECK(tie.replaced);
    CHECK(tie.vector == u);
    auto worse = select_greedy(x, 3.0, u, 4.0);
    CHECK_FALSE(worse.replaced);
    CHECK(worse.value == 3.0);
    auto failed = select_greedy(x, 3.0, u, std::numeric_limits<double>::infinity());
    CHECK_FALSE(failed.replaced);
    // applying the same pair again gives the same outcome
    auto again = select_greedy(tie.vector, tie.value, u, 3.0);
    CHECK(again.vector == tie.vector);
    CHECK(again.value == tie.value);
}
