#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <istratde/algorithms.hpp>
#include <istratde/benchmarks.hpp>
#include <istratde/diagnostics.hpp>

namespace istratde::harness {

using Json = nlohmann::ordered_json;

enum class Algorithm { IStratDE, CanonicalDE, FixedDistribution, RestrictedPool };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Header of every trace CSV, in column order.
inline constexpr std::string_view kTraceHeader = "generation,evaluations,best_error,elitism_proportion";

struct ExperimentSpec {
    Algorithm algorithm = Algorithm::IStratDE;
    ProblemSpec problem{FunctionId::Rastrigin, 10, 1, false};
    std::size_t population = 100;
    Budget budget = Budget::evaluations(200000);
    std::size_t runs = 31;
    std::uint64_t master_seed = 1; // repetition r runs with seed master_seed + r
    std::filesystem::path output_dir; // empty: nothing is written
    std::size_t trace_stride = 1;
    std::size_t tracked_individuals = 20;

    // Algorithm-specific parameters.
    double f = 0.5;  // canonical_de
    double cr = 0.9; // canonical_de
    std::vector<std::size_t> pool_indices; // restricted_pool
    StrategyDistribution distribution = StrategyDistribution::elite_profile(); // fixed_distribution

    std::size_t workers = 1; // execution only, never affects results

    /// Throws Error for any configuration problem that can be detected before running.
    void validate() const;
};

struct ExperimentSummary {
    ExperimentSpec spec;
    std::vector<double> final_errors; // after round_reported
    std::vector<std::uint64_t> evaluations_used;
    std::vector<std::uint64_t> generations_used;
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    double wall_clock_seconds = 0.0; // informational only

    Json to_json() const;
    static ExperimentSummary from_json(const Json& json);
};

/// One repetition of `spec` with seed master_seed + repetition.
RunResult<double> run_repetition(const ExperimentSpec& spec, std::size_t repetition, std::size_t workers = 1);

/// Runs all repetitions. When spec.output_dir is set, writes trace_NNN.csv
/// (and ranks_NNN.csv when individuals are tracked) per run plus summary.json.
/// `traces`, when given, receives each run's trace in repetition order.
ExperimentSummary run_experiment(const ExperimentSpec& spec, std::vector<RunTrace>* traces = nullptr);

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace, double optimum_value);
void write_ranks_csv(const std::filesystem::path& path, const RunTrace& trace);
RunTrace read_trace_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& json);
Json read_json(const std::filesystem::path& path);

struct Comparison {
    std::string algorithm_a;
    std::string algorithm_b;
    ProblemSpec problem;
    Budget budget;
    SampleSummary summary_a;
    SampleSummary summary_b;
    RankSumReport report;

    Json to_json() const;
};

/// Rank-sum comparison of final errors, verdict from a's point of view.
/// Throws MismatchedProtocol unless problems and budgets agree.
Comparison compare_experiments(const ExperimentSummary& a, const ExperimentSummary& b, double alpha = 0.05);

struct SweepResult {
    std::vector<std::size_t> sizes;
    std::vector<ExperimentSummary> summaries;
    std::vector<double> normalized_mean_error; // mean error / largest mean error across sizes

    Json to_json() const;
};

/// Full protocol at each population size under the base budget. Results go to
/// output_dir/pop_<size>/ and output_dir/sweep.json when an output dir is set.
SweepResult population_scaling_sweep(const ExperimentSpec& base, const std::vector<std::size_t>& sizes);

struct PoolCensus {
    std::size_t assignments = 0;
    std::array<std::size_t, kPoolSize> counts{};
    double count_sd = 0.0;   // population standard deviation of the 192 counts
    double chi_square = 0.0; // against the uniform expectation

    Json to_json() const;
};

/// Tally of `assignments` unrestricted strategy draws, assignment i using stream (seed, 0, i).
PoolCensus pool_census(std::size_t assignments, std::uint64_t seed);

std::vector<std::size_t> parse_index_list(std::string_view text);

} // namespace istratde::harness
