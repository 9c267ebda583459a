#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <istratde/core.hpp>

namespace istratde {

/// Fraction of the population eligible as a pbest reference.
inline constexpr double kPbestFraction = 0.05;

/// ceil(0.05 N), at least 1.
inline std::size_t pbest_count(std::size_t n)
{
    const auto k = static_cast<std::size_t>(std::ceil(kPbestFraction * static_cast<double>(n) - 1e-12));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

/// Best and top-p indices of one generation's fitness snapshot. Ties are
/// broken by the lower index.
struct ReferenceSet {
    std::size_t population_size = 0;
    std::size_t best = 0;
    std::vector<std::size_t> pbest; // ascending fitness

    template <typename Derived>
    static ReferenceSet from_fitness(const Eigen::MatrixBase<Derived>& fitness)
    {
        ReferenceSet ref;
        const auto n = static_cast<std::size_t>(fitness.size());
        ref.population_size = n;
        if (n == 0)
            return ref;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t k = pbest_count(n);
        auto less = [&](std::size_t a, std::size_t b) {
            const auto fa = fitness(static_cast<Eigen::Index>(a));
            const auto fb = fitness(static_cast<Eigen::Index>(b));
            return fa < fb || (fa == fb && a < b);
        };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), less);
        ref.pbest.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        ref.best = ref.pbest.front();
        return ref;
    }
};

/// Uniform index in [0, n) that is neither `target` nor in `excluded`.
inline std::size_t draw_distinct(std::size_t n, std::size_t target, std::span<const std::size_t> excluded, RngStream& rng)
{
    std::size_t blocked = target < n ? 1 : 0;
    for (std::size_t k = 0; k < excluded.size(); ++k) {
        const std::size_t e = excluded[k];
        const auto earlier = excluded.first(k);
        if (e != target && e < n && std::find(earlier.begin(), earlier.end(), e) == earlier.end())
            ++blocked;
    }
    if (blocked >= n)
        throw Error(ErrorCode::InsufficientPopulation,
            "no index left in a population of " + std::to_string(n) + " after excluding " + std::to_string(blocked));
    for (;;) {
        const auto r = static_cast<std::size_t>(rng.index(n));
        if (r != target && std::find(excluded.begin(), excluded.end(), r) == excluded.end())
            return r;
    }
}

/// Index of the base vector of the given kind. Rand draws from indices not in
/// `excluded` and not the target; Best and Pbest read the snapshot reference set;
/// Current is the target itself.
inline std::size_t select_base(
    BaseVectorKind kind, const ReferenceSet& ref, std::size_t target, std::span<const std::size_t> excluded, RngStream& rng)
{
    switch (kind) {
    case BaseVectorKind::Rand: return draw_distinct(ref.population_size, target, excluded, rng);
    case BaseVectorKind::Best: return ref.best;
    case BaseVectorKind::Pbest: return ref.pbest[rng.index(ref.pbest.size())];
    case BaseVectorKind::Current: return target;
    }
    return target;
}

/// Every index a generalized mutation uses.
struct MutationDraw {
    std::size_t left = 0;
    std::size_t right = 0;
    std::vector<std::pair<std::size_t, std::size_t>> diffs;
};

/// Draws left base, right base, then diff_count pairs. Rand bases and every
/// difference index join the exclusion set as they are drawn, so all of them are
/// pairwise distinct and distinct from the target. Best/Pbest/Current do not.
inline MutationDraw draw_generalized(const StrategyTuple& tuple, const ReferenceSet& ref, std::size_t target, RngStream& rng)
{
    std::array<std::size_t, 10> taken{};
    std::size_t used = 0;
    auto taken_span = [&] { return std::span<const std::size_t>(taken.data(), used); };

    MutationDraw draw;
    draw.left = select_base(tuple.left, ref, target, taken_span(), rng);
    if (tuple.left == BaseVectorKind::Rand)
        taken[used++] = draw.left;
    draw.right = select_base(tuple.right, ref, target, taken_span(), rng);
    if (tuple.right == BaseVectorKind::Rand)
        taken[used++] = draw.right;
    draw.diffs.reserve(static_cast<std::size_t>(tuple.diff_count));
    for (int k = 0; k < tuple.diff_count; ++k) {
        const std::size_t a = draw_distinct(ref.population_size, target, taken_span(), rng);
        taken[used++] = a;
        const std::size_t b = draw_distinct(ref.population_size, target, taken_span(), rng);
        taken[used++] = b;
        draw.diffs.emplace_back(a, b);
    }
    return draw;
}

/// v = x_left + F (x_right - x_left) + F * sum_k (x_a_k - x_b_k).
template <typename Scalar>
Vector<Scalar> mutant_from_draw(const RowMatrix<Scalar>& vectors, const MutationDraw& draw, Scalar f)
{
    const auto row = [&](std::size_t k) { return vectors.row(static_cast<Eigen::Index>(k)).transpose(); };
    Vector<Scalar> diff_sum = Vector<Scalar>::Zero(vectors.cols());
    if (!draw.diffs.empty())
        diff_sum = row(draw.diffs.front().first) - row(draw.diffs.front().second);
    for (std::size_t k = 1; k < draw.diffs.size(); ++k)
        diff_sum += row(draw.diffs[k].first) - row(draw.diffs[k].second);
    Vector<Scalar> v = row(draw.left) + f * (row(draw.right) - row(draw.left)) + f * diff_sum;
    return v;
}

template <typename Scalar>
Vector<Scalar> mutate_generalized(const RowMatrix<Scalar>& vectors, const ReferenceSet& ref, std::size_t target,
    const StrategyConfig<Scalar>& strategy, RngStream& rng)
{
    const MutationDraw draw = draw_generalized(strategy.tuple(), ref, target, rng);
    return mutant_from_draw(vectors, draw, strategy.f());
}

/// The five classical single-strategy mutations.
enum class NamedStrategy { Rand1, Best1, Current1, CurrentToPbest1, CurrentToRand1 };

inline constexpr const char* to_string(NamedStrategy s)
{
    switch (s) {
    case NamedStrategy::Rand1: return "rand/1";
    case NamedStrategy::Best1: return "best/1";
    case NamedStrategy::Current1: return "current/1";
    case NamedStrategy::CurrentToPbest1: return "current-to-pbest/1";
    case NamedStrategy::CurrentToRand1: return "current-to-rand/1";
    }
    return "?";
}

/// Indices for a named mutation. `guide` is x_best or x_pbest where the formula
/// has one; r holds the mutually distinct random indices r1, r2, r3 (unused
/// trailing entries are ignored).
struct NamedDraw {
    std::size_t guide = 0;
    std::array<std::size_t, 3> r{};
};

inline constexpr int random_index_count(NamedStrategy s)
{
    return (s == NamedStrategy::Rand1 || s == NamedStrategy::CurrentToRand1) ? 3 : 2;
}

inline NamedDraw draw_named(NamedStrategy strategy, const ReferenceSet& ref, std::size_t target, RngStream& rng)
{
    NamedDraw draw;
    if (strategy == NamedStrategy::Best1)
        draw.guide = ref.best;
    else if (strategy == NamedStrategy::CurrentToPbest1)
        draw.guide = ref.pbest[rng.index(ref.pbest.size())];
    const int count = random_index_count(strategy);
    for (int k = 0; k < count; ++k)
        draw.r[static_cast<std::size_t>(k)] =
            draw_distinct(ref.population_size, target, std::span<const std::size_t>(draw.r.data(), static_cast<std::size_t>(k)), rng);
    return draw;
}

template <typename Scalar>
Vector<Scalar> named_mutant(NamedStrategy strategy, const RowMatrix<Scalar>& vectors, std::size_t target, const NamedDraw& draw, Scalar f)
{
    const auto row = [&](std::size_t k) { return vectors.row(static_cast<Eigen::Index>(k)).transpose(); };
    const auto [r1, r2, r3] = draw.r;
    switch (strategy) {
    case NamedStrategy::Rand1:
        return row(r1) + f * (row(r2) - row(r3));
    case NamedStrategy::Best1:
        return row(draw.guide) + f * (row(r1) - row(r2));
    case NamedStrategy::Current1:
        return row(target) + f * (row(r1) - row(r2));
    case NamedStrategy::CurrentToPbest1: {
        const Vector<Scalar> diff = row(r1) - row(r2);
        return row(target) + f * (row(draw.guide) - row(target)) + f * diff;
    }
    case NamedStrategy::CurrentToRand1: {
        const Vector<Scalar> diff = row(r2) - row(r3);
        return row(target) + f * (row(r1) - row(target)) + f * diff;
    }
    }
    return row(target);
}

template <typename Scalar>
Vector<Scalar> mutate_named(
    NamedStrategy strategy, const RowMatrix<Scalar>& vectors, const ReferenceSet& ref, std::size_t target, Scalar f, RngStream& rng)
{
    return named_mutant(strategy, vectors, target, draw_named(strategy, ref, target, rng), f);
}

template <typename Scalar>
struct TrialVector {
    Vector<Scalar> coords;
    std::optional<Eigen::Index> j_rand; // binomial and exponential only
};

namespace detail {
    template <typename Scalar>
    void check_same_length(const Vector<Scalar>& x, const Vector<Scalar>& v)
    {
        if (x.size() != v.size() || x.size() < 1)
            throw Error(ErrorCode::DimensionMismatch,
                "parent has " + std::to_string(x.size()) + " coordinates, mutant has " + std::to_string(v.size()));
    }
} // namespace detail

/// u_j = v_j if rand <= cr or j == j_rand, else x_j. One uniform is consumed
/// per coordinate regardless of cr.
template <typename Scalar>
TrialVector<Scalar> crossover_bin(const Vector<Scalar>& x, const Vector<Scalar>& v, Scalar cr, RngStream& rng)
{
    detail::check_same_length(x, v);
    const Eigen::Index d = x.size();
    const auto j_rand = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(d)));
    TrialVector<Scalar> trial{x, j_rand};
    for (Eigen::Index j = 0; j < d; ++j)
        if (static_cast<Scalar>(rng.uniform()) <= cr || j == j_rand)
            trial.coords[j] = v[j];
    return trial;
}

/// Length of the exponential-crossover block: starts at 1, extends while
/// rand <= cr, capped at D.
inline Eigen::Index exp_block_length(Eigen::Index d, double cr, RngStream& rng)
{
    Eigen::Index length = 1;
    while (length < d && rng.uniform() <= cr)
        ++length;
    return length;
}

/// Copies a circular block of v starting at j_rand into x.
template <typename Scalar>
TrialVector<Scalar> crossover_exp(const Vector<Scalar>& x, const Vector<Scalar>& v, Scalar cr, RngStream& rng)
{
    detail::check_same_length(x, v);
    const Eigen::Index d = x.size();
    const auto j_rand = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(d)));
    const Eigen::Index length = exp_block_length(d, static_cast<double>(cr), rng);
    TrialVector<Scalar> trial{x, j_rand};
    for (Eigen::Index k = 0; k < length; ++k) {
        const Eigen::Index j = (j_rand + k) % d;
        trial.coords[j] = v[j];
    }
    return trial;
}

/// u = alpha v + (1 - alpha) x for a given alpha.
template <typename Scalar>
TrialVector<Scalar> crossover_arith_at(const Vector<Scalar>& x, const Vector<Scalar>& v, Scalar alpha)
{
    detail::check_same_length(x, v);
    return TrialVector<Scalar>{alpha * v + (Scalar(1) - alpha) * x, std::nullopt};
}

/// Arithmetic crossover with one fresh alpha ~ U(0,1) per call.
template <typename Scalar>
TrialVector<Scalar> crossover_arith(const Vector<Scalar>& x, const Vector<Scalar>& v, RngStream& rng)
{
    detail::check_same_length(x, v);
    return crossover_arith_at(x, v, static_cast<Scalar>(rng.uniform()));
}

template <typename Scalar>
TrialVector<Scalar> crossover(CrossoverKind kind, const Vector<Scalar>& x, const Vector<Scalar>& v, Scalar cr, RngStream& rng)
{
    switch (kind) {
    case CrossoverKind::Binomial: return crossover_bin(x, v, cr, rng);
    case CrossoverKind::Exponential: return crossover_exp(x, v, cr, rng);
    case CrossoverKind::Arithmetic: return crossover_arith(x, v, rng);
    }
    return crossover_bin(x, v, cr, rng);
}

/// Componentwise clamp into [lb, ub].
template <typename Scalar>
Vector<Scalar> repair_bounds(const Vector<Scalar>& u, const Vector<Scalar>& lb, const Vector<Scalar>& ub)
{
    if (u.size() != lb.size() || u.size() != ub.size())
        throw Error(ErrorCode::DimensionMismatch, "point and bounds differ in length");
    return u.cwiseMax(lb).cwiseMin(ub);
}

template <typename Scalar>
struct Selection {
    Vector<Scalar> vector;
    Scalar value;
    bool replaced;
};

/// Trial wins ties. A NaN trial value never wins.
template <typename Scalar>
Selection<Scalar> select_greedy(const Vector<Scalar>& x, Scalar fx, const Vector<Scalar>& u, Scalar fu)
{
    if (fu <= fx)
        return {u, fu, true};
    return {x, fx, false};
}

} // namespace istratde
