#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <istratde/core.hpp>
#include <istratde/diagnostics.hpp>
#include <istratde/engine.hpp>
#include <istratde/operators.hpp>

namespace istratde {

struct Budget {
    enum class Kind { MaxEvaluations, MaxGenerations };

    Kind kind = Kind::MaxEvaluations;
    std::uint64_t limit = 0;

    static Budget evaluations(std::uint64_t limit) { return {Kind::MaxEvaluations, limit}; }
    static Budget generations(std::uint64_t limit) { return {Kind::MaxGenerations, limit}; }

    bool operator==(const Budget&) const = default;
};

struct RunOptions {
    std::size_t workers = 1;
    std::size_t trace_stride = 1;
    std::size_t tracked_individuals = 0; // rank snapshots follow indices 0..k-1
    double elitism_epsilon = 1e-8;
};

template <typename Scalar = double>
struct RunResult {
    Vector<Scalar> best_vector;
    Scalar best_value{};
    RunTrace trace;
    std::uint64_t evaluations_used = 0;
    std::uint64_t generations_used = 0;
    Population<Scalar> final_population;
};

/// Categorical weights for each discrete strategy component. Left and right base
/// vectors share `base_vector` but are drawn independently; `diff_count[k]`
/// weights k + 1 difference pairs.
struct StrategyDistribution {
    std::array<double, 4> base_vector{0.25, 0.25, 0.25, 0.25};
    std::array<double, 4> diff_count{0.25, 0.25, 0.25, 0.25};
    std::array<double, 3> crossover{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    static StrategyDistribution uniform() { return {}; }

    /// Component frequencies observed among elite individuals.
    static StrategyDistribution elite_profile()
    {
        StrategyDistribution d;
        d.base_vector = {0.26, 0.32, 0.32, 0.10};
        d.diff_count = {0.40, 0.30, 0.20, 0.10};
        d.crossover = {0.60, 0.25, 0.15};
        return d;
    }

    void validate() const
    {
        auto check = [](std::span<const double> w, const char* name) {
            double sum = 0.0;
            for (double x : w) {
                if (!(x >= 0.0) || !std::isfinite(x))
                    throw Error(ErrorCode::InvalidDistribution, std::string(name) + " has a negative or non-finite weight");
                sum += x;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw Error(ErrorCode::InvalidDistribution, std::string(name) + " weights sum to " + std::to_string(sum));
        };
        check(base_vector, "base_vector");
        check(diff_count, "diff_count");
        check(crossover, "crossover");
    }
};

namespace detail {
    inline std::size_t categorical(std::span<const double> weights, RngStream& rng)
    {
        const double u = rng.uniform();
        double cumulative = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            cumulative += weights[k];
            if (u <= cumulative && weights[k] > 0.0)
                return k;
        }
        // Rounding left u above the final cumulative sum: last positive weight.
        for (std::size_t k = weights.size(); k-- > 0;)
            if (weights[k] > 0.0)
                return k;
        return weights.size() - 1;
    }
} // namespace detail

/// Draws (left, right, diff_count, crossover) from independent categoricals,
/// then F and CR from U(0,1).
template <typename Scalar = double>
StrategyConfig<Scalar> sample_from_distribution(RngStream& rng, const StrategyDistribution& dist)
{
    StrategyTuple t;
    t.left = kBaseVectorKinds[detail::categorical(dist.base_vector, rng)];
    t.right = kBaseVectorKinds[detail::categorical(dist.base_vector, rng)];
    t.diff_count = kDiffCounts[detail::categorical(dist.diff_count, rng)];
    t.crossover = kCrossoverKinds[detail::categorical(dist.crossover, rng)];
    const auto f = static_cast<Scalar>(rng.uniform());
    const auto cr = static_cast<Scalar>(rng.uniform());
    return StrategyConfig<Scalar>(t, f, cr);
}

namespace detail {
    template <typename Scalar>
    void record(RunTrace& trace, const Population<Scalar>& pop, Scalar best_value, std::uint64_t evaluations,
        const BenchmarkProblem<Scalar>& problem, const RunOptions& options)
    {
        trace.generation.push_back(pop.generation);
        trace.evaluations.push_back(evaluations);
        trace.best_so_far.push_back(static_cast<double>(best_value));
        trace.elitism_proportion.push_back(
            elitism_proportion(pop.fitness, static_cast<double>(problem.optimum_value), options.elitism_epsilon));
        if (options.tracked_individuals > 0) {
            std::vector<std::size_t> tracked(std::min(options.tracked_individuals, pop.size()));
            std::iota(tracked.begin(), tracked.end(), std::size_t{0});
            trace.rank_snapshots.push_back({pop.generation, normalized_ranks(pop.fitness, tracked)});
        }
    }

    inline void check_budget(const Budget& budget, std::size_t n)
    {
        if (budget.kind == Budget::Kind::MaxEvaluations && budget.limit < n)
            throw Error(ErrorCode::BudgetExhaustedBeforeInit,
                "evaluation budget " + std::to_string(budget.limit) + " cannot cover the initial population of " + std::to_string(n));
    }

    template <typename Scalar>
    Eigen::Index argmin_lowest(const Vector<Scalar>& fitness)
    {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < fitness.size(); ++i)
            if (fitness[i] < fitness[best])
                best = i;
        return best;
    }
} // namespace detail

/// Synchronous generation loop shared by every driver.
///
/// Each generation g >= 1 reads only the generation g - 1 snapshot. Individual
/// i reproduces with stream (seed, g, i) via `reproduce(snapshot, ref, i, rng)`,
/// the trial is clamped and evaluated into slot i, and replacement happens for
/// all individuals after the barrier. The run is therefore identical for any
/// worker count. A generation starts only if the remaining evaluation budget
/// covers all N trials, so evaluations_used never exceeds a MaxEvaluations limit.
template <typename Scalar, typename Reproduce>
RunResult<Scalar> evolve(const BenchmarkProblem<Scalar>& problem, Population<Scalar> pop, const Budget& budget,
    std::uint64_t seed, const RunOptions& options, Reproduce&& reproduce)
{
    const std::size_t n = pop.size();
    const std::size_t stride = std::max<std::size_t>(1, options.trace_stride);

    RunResult<Scalar> result;
    std::uint64_t evaluations = n;
    Eigen::Index best_index = detail::argmin_lowest(pop.fitness);
    result.best_vector = pop.vectors.row(best_index).transpose();
    result.best_value = pop.fitness[best_index];
    detail::record(result.trace, pop, result.best_value, evaluations, problem, options);

    auto may_continue = [&](std::uint64_t generations_done) {
        if (budget.kind == Budget::Kind::MaxGenerations)
            return generations_done < budget.limit;
        return evaluations + n <= budget.limit;
    };

    RowMatrix<Scalar> trials(pop.vectors.rows(), pop.vectors.cols());
    Vector<Scalar> trial_fitness(pop.fitness.size());
    std::uint64_t generation = 0;
    while (may_continue(generation)) {
        ++generation;
        const ReferenceSet ref = ReferenceSet::from_fitness(pop.fitness);
        const Population<Scalar>& snapshot = pop;
        parallel_for(n, options.workers, [&](std::size_t i) {
            RngStream rng = derive_stream(seed, generation, i);
            const Vector<Scalar> trial = repair_bounds(reproduce(snapshot, ref, i, rng), problem.lb, problem.ub);
            const auto row = static_cast<Eigen::Index>(i);
            trials.row(row) = trial.transpose();
            trial_fitness[row] = evaluate(problem, trial);
        });

        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
            if (trial_fitness[i] <= pop.fitness[i]) {
                pop.vectors.row(i) = trials.row(i);
                pop.fitness[i] = trial_fitness[i];
            }
        }
        evaluations += n;
        pop.generation = generation;

        best_index = detail::argmin_lowest(pop.fitness);
        if (pop.fitness[best_index] < result.best_value) {
            result.best_value = pop.fitness[best_index];
            result.best_vector = pop.vectors.row(best_index).transpose();
        }
        if (generation % stride == 0)
            detail::record(result.trace, pop, result.best_value, evaluations, problem, options);
    }
    if (result.trace.generation.back() != pop.generation)
        detail::record(result.trace, pop, result.best_value, evaluations, problem, options);

    result.evaluations_used = evaluations;
    result.generations_used = generation;
    result.final_population = std::move(pop);
    return result;
}

/// DE/rand/1/bin with one global F and CR. The population carries no strategies.
template <typename Scalar>
RunResult<Scalar> run_canonical_de(const BenchmarkProblem<Scalar>& problem, std::size_t n, Scalar f, Scalar cr,
    const Budget& budget, std::uint64_t seed, const RunOptions& options = {})
{
    if (n < 4)
        throw Error(ErrorCode::PopulationTooSmall, "DE/rand/1 needs at least 4 individuals");
    if (!(f >= Scalar(0) && f <= Scalar(2)))
        throw Error(ErrorCode::InvalidArgument, "F must lie in [0, 2]");
    if (!(cr >= Scalar(0) && cr <= Scalar(1)))
        throw Error(ErrorCode::InvalidArgument, "CR must lie in [0, 1]");
    detail::check_budget(budget, n);

    Population<Scalar> pop = init_vectors(problem, n, seed, options.workers);
    return evolve(problem, std::move(pop), budget, seed, options,
        [f, cr](const Population<Scalar>& snapshot, const ReferenceSet& ref, std::size_t i, RngStream& rng) {
            const Vector<Scalar> mutant = mutate_named(NamedStrategy::Rand1, snapshot.vectors, ref, i, f, rng);
            const Vector<Scalar> parent = snapshot.vectors.row(static_cast<Eigen::Index>(i)).transpose();
            return crossover_bin(parent, mutant, cr, rng).coords;
        });
}

namespace detail {
    template <typename Scalar>
    Vector<Scalar> reproduce_with_own_strategy(const Population<Scalar>& snapshot, const ReferenceSet& ref, std::size_t i, RngStream& rng)
    {
        const StrategyConfig<Scalar>& strategy = snapshot.strategies[i];
        const Vector<Scalar> mutant = mutate_generalized(snapshot.vectors, ref, i, strategy, rng);
        const Vector<Scalar> parent = snapshot.vectors.row(static_cast<Eigen::Index>(i)).transpose();
        return crossover(strategy.crossover(), parent, mutant, strategy.cr(), rng).coords;
    }
} // namespace detail

/// Every individual keeps the strategy and (F, CR) it drew at initialization
/// for the whole run. `restriction` limits the draw to a subset of pool indices.
template <typename Scalar>
RunResult<Scalar> run_istratde(const BenchmarkProblem<Scalar>& problem, std::size_t n, const Budget& budget,
    std::uint64_t seed, const PoolRestriction& restriction = std::nullopt, const RunOptions& options = {})
{
    if (n < kMinPoolPopulation)
        throw Error(ErrorCode::PopulationTooSmall,
            "population of " + std::to_string(n) + " is below the minimum of " + std::to_string(kMinPoolPopulation));
    validate_restriction(restriction);
    detail::check_budget(budget, n);
    Population<Scalar> pop = init_population(problem, n, seed, restriction, options.workers);
    return evolve(problem, std::move(pop), budget, seed, options, detail::reproduce_with_own_strategy<Scalar>);
}

/// As run_istratde, but strategy components come from fixed categorical weights.
template <typename Scalar>
RunResult<Scalar> run_fixed_distribution(const BenchmarkProblem<Scalar>& problem, std::size_t n, const Budget& budget,
    std::uint64_t seed, const StrategyDistribution& dist, const RunOptions& options = {})
{
    dist.validate();
    if (n < kMinPoolPopulation)
        throw Error(ErrorCode::PopulationTooSmall,
            "population of " + std::to_string(n) + " is below the minimum of " + std::to_string(kMinPoolPopulation));
    detail::check_budget(budget, n);
    Population<Scalar> pop = init_population_with(
        problem, n, seed, [&](RngStream& rng) { return sample_from_distribution<Scalar>(rng, dist); }, options.workers);
    return evolve(problem, std::move(pop), budget, seed, options, detail::reproduce_with_own_strategy<Scalar>);
}

} // namespace istratde
