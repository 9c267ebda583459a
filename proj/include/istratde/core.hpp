#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <istratde/benchmarks.hpp>
#include <istratde/engine.hpp>
#include <istratde/error.hpp>
#include <istratde/rng.hpp>

namespace istratde {

enum class BaseVectorKind : std::uint8_t { Rand, Best, Pbest, Current };
enum class CrossoverKind : std::uint8_t { Binomial, Exponential, Arithmetic };

inline constexpr std::array<BaseVectorKind, 4> kBaseVectorKinds{
    BaseVectorKind::Rand, BaseVectorKind::Best, BaseVectorKind::Pbest, BaseVectorKind::Current};
inline constexpr std::array<CrossoverKind, 3> kCrossoverKinds{
    CrossoverKind::Binomial, CrossoverKind::Exponential, CrossoverKind::Arithmetic};
inline constexpr std::array<int, 4> kDiffCounts{1, 2, 3, 4};

inline constexpr std::size_t kPoolSize = kBaseVectorKinds.size() * kBaseVectorKinds.size() * kDiffCounts.size() * kCrossoverKinds.size();
static_assert(kPoolSize == 192);

/// Smallest population for which every pool member can draw its distinct indices:
/// two rand bases plus four difference pairs, all distinct from the target.
inline constexpr std::size_t kMinPoolPopulation = 11;

inline constexpr const char* to_string(BaseVectorKind kind)
{
    switch (kind) {
    case BaseVectorKind::Rand: return "rand";
    case BaseVectorKind::Best: return "best";
    case BaseVectorKind::Pbest: return "pbest";
    case BaseVectorKind::Current: return "current";
    }
    return "?";
}

inline constexpr const char* to_string(CrossoverKind kind)
{
    switch (kind) {
    case CrossoverKind::Binomial: return "bin";
    case CrossoverKind::Exponential: return "exp";
    case CrossoverKind::Arithmetic: return "arith";
    }
    return "?";
}

/// The discrete half of a strategy, DE/left-to-right/diff_count/crossover.
struct StrategyTuple {
    BaseVectorKind left = BaseVectorKind::Rand;
    BaseVectorKind right = BaseVectorKind::Rand;
    int diff_count = 1;
    CrossoverKind crossover = CrossoverKind::Binomial;

    auto operator<=>(const StrategyTuple&) const = default;
};

inline std::string to_string(const StrategyTuple& t)
{
    return std::string("DE/") + to_string(t.left) + "-to-" + to_string(t.right) + "/" + std::to_string(t.diff_count) + "/"
        + to_string(t.crossover);
}

/// Pool index of a tuple in enumeration order (left-major, then right, diff_count, crossover).
inline constexpr std::size_t pool_index(const StrategyTuple& t)
{
    const auto l = static_cast<std::size_t>(t.left);
    const auto r = static_cast<std::size_t>(t.right);
    const auto d = static_cast<std::size_t>(t.diff_count - 1);
    const auto c = static_cast<std::size_t>(t.crossover);
    return ((l * 4 + r) * 4 + d) * 3 + c;
}

/// All 192 strategy tuples, left-major, then right, then diff_count, then crossover.
inline const std::array<StrategyTuple, kPoolSize>& enumerate_pool()
{
    static const std::array<StrategyTuple, kPoolSize> pool = [] {
        std::array<StrategyTuple, kPoolSize> out{};
        std::size_t k = 0;
        for (BaseVectorKind left : kBaseVectorKinds)
            for (BaseVectorKind right : kBaseVectorKinds)
                for (int dn : kDiffCounts)
                    for (CrossoverKind cs : kCrossoverKinds)
                        out[k++] = StrategyTuple{left, right, dn, cs};
        return out;
    }();
    return pool;
}

/// One individual's fixed recipe: the discrete tuple plus its own F and CR.
template <typename Scalar = double>
class StrategyConfig {
public:
    StrategyConfig(StrategyTuple tuple, Scalar f, Scalar cr) : _tuple(tuple), _f(f), _cr(cr)
    {
        if (tuple.diff_count < 1 || tuple.diff_count > 4)
            throw Error(ErrorCode::InvalidArgument, "diff_count must be in 1..4");
        if (!(f >= Scalar(0) && f <= Scalar(1)) || !(cr >= Scalar(0) && cr <= Scalar(1)))
            throw Error(ErrorCode::InvalidArgument, "f and cr must lie in [0, 1]");
    }

    const StrategyTuple& tuple() const noexcept { return _tuple; }
    BaseVectorKind left() const noexcept { return _tuple.left; }
    BaseVectorKind right() const noexcept { return _tuple.right; }
    int diff_count() const noexcept { return _tuple.diff_count; }
    CrossoverKind crossover() const noexcept { return _tuple.crossover; }
    Scalar f() const noexcept { return _f; }
    Scalar cr() const noexcept { return _cr; }

    bool operator==(const StrategyConfig&) const = default;

private:
    StrategyTuple _tuple;
    Scalar _f;
    Scalar _cr;
};

/// Optional subset of pool indices to draw from; nullopt means the full pool.
using PoolRestriction = std::optional<std::vector<std::size_t>>;

inline void validate_restriction(const PoolRestriction& restriction)
{
    if (!restriction)
        return;
    if (restriction->empty())
        throw Error(ErrorCode::EmptyPoolRestriction, "pool restriction must name at least one strategy");
    for (std::size_t k : *restriction)
        if (k >= kPoolSize)
            throw Error(ErrorCode::InvalidArgument, "pool index " + std::to_string(k) + " is outside 0..191");
}

/// Uniform draw of the discrete tuple from the (restricted) pool, then F and CR
/// each from U(0,1). Consumes exactly three values from `rng`.
template <typename Scalar = double>
StrategyConfig<Scalar> sample_strategy(RngStream& rng, const PoolRestriction& restriction = std::nullopt)
{
    validate_restriction(restriction);
    const auto& pool = enumerate_pool();
    const std::size_t k = restriction ? (*restriction)[rng.index(restriction->size())] : rng.index(kPoolSize);
    const auto f = static_cast<Scalar>(rng.uniform());
    const auto cr = static_cast<Scalar>(rng.uniform());
    return StrategyConfig<Scalar>(pool[k], f, cr);
}

template <typename Scalar = double>
struct Population {
    RowMatrix<Scalar> vectors; // N x D
    Vector<Scalar> fitness;    // N
    std::vector<StrategyConfig<Scalar>> strategies; // N, or empty for single-strategy baselines
    std::size_t generation = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
    Eigen::Index dim() const noexcept { return vectors.cols(); }
};

/// FNV-1a over the canonical bytes of every strategy (tuple fields, then the
/// bit patterns of f and cr), in individual order.
template <typename Scalar>
std::uint64_t strategy_hash(std::span<const StrategyConfig<Scalar>> strategies)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t k = 0; k < n; ++k) {
            h ^= bytes[k];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& s : strategies) {
        const unsigned char tuple[4] = {static_cast<unsigned char>(s.left()), static_cast<unsigned char>(s.right()),
            static_cast<unsigned char>(s.diff_count()), static_cast<unsigned char>(s.crossover())};
        feed(tuple, sizeof tuple);
        const Scalar f = s.f();
        const Scalar cr = s.cr();
        feed(&f, sizeof f);
        feed(&cr, sizeof cr);
    }
    return h;
}

template <typename Scalar>
void validate_bounds(const BenchmarkProblem<Scalar>& problem)
{
    if (problem.lb.size() != problem.dim() || problem.ub.size() != problem.dim())
        throw Error(ErrorCode::DimensionMismatch, "bounds do not match problem dimension");
    for (Eigen::Index j = 0; j < problem.dim(); ++j) {
        using std::isfinite;
        if (!isfinite(problem.lb[j]) || !isfinite(problem.ub[j]) || !(problem.lb[j] < problem.ub[j]))
            throw Error(ErrorCode::InvalidBounds, "bounds must be finite with lb < ub in coordinate " + std::to_string(j));
    }
}

/// Uniform coordinates in [lb, ub] for every individual, drawn from stream
/// (seed, 0, i) so initialization is independent of evaluation parallelism.
/// Fitness is evaluated, strategies are left empty.
template <typename Scalar>
Population<Scalar> init_vectors(const BenchmarkProblem<Scalar>& problem, std::size_t n, std::uint64_t seed, std::size_t workers = 1)
{
    validate_bounds(problem);
    Population<Scalar> pop;
    pop.vectors.resize(static_cast<Eigen::Index>(n), problem.dim());
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = derive_stream(seed, 0, i);
        for (Eigen::Index j = 0; j < problem.dim(); ++j) {
            const Scalar u = static_cast<Scalar>(rng.uniform());
            pop.vectors(static_cast<Eigen::Index>(i), j) = problem.lb[j] + u * (problem.ub[j] - problem.lb[j]);
        }
    }
    if (n > 0)
        pop.fitness = evaluate_population(problem, pop.vectors, workers);
    pop.generation = 0;
    return pop;
}

/// Population of n >= 11 individuals, each holding one strategy from
/// `sampler(RngStream&)` for the whole run. Individual i draws its coordinates
/// and then its strategy from stream (seed, 0, i).
template <typename Scalar, typename Sampler>
Population<Scalar> init_population_with(
    const BenchmarkProblem<Scalar>& problem, std::size_t n, std::uint64_t seed, Sampler&& sampler, std::size_t workers = 1)
{
    if (n < kMinPoolPopulation)
        throw Error(ErrorCode::PopulationTooSmall,
            "population of " + std::to_string(n) + " is below the minimum of " + std::to_string(kMinPoolPopulation));
    Population<Scalar> pop = init_vectors(problem, n, seed, workers);
    pop.strategies.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = derive_stream(seed, 0, i);
        for (Eigen::Index j = 0; j < problem.dim(); ++j)
            rng(); // skip the coordinate draws
        pop.strategies.push_back(sampler(rng));
    }
    return pop;
}

template <typename Scalar>
Population<Scalar> init_population(const BenchmarkProblem<Scalar>& problem, std::size_t n, std::uint64_t seed,
    const PoolRestriction& restriction = std::nullopt, std::size_t workers = 1)
{
    validate_restriction(restriction);
    return init_population_with(
        problem, n, seed, [&](RngStream& rng) { return sample_strategy<Scalar>(rng, restriction); }, workers);
}

} // namespace istratde
