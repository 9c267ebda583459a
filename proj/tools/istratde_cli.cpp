// Command-line experiment runner.
//
//   istratde run         --algo istratde --function rastrigin --dim 10 --pop 2000 --budget-fes 200000 --runs 31 --out results/ist
//   istratde compare     results/ist/summary.json results/de/summary.json --alpha 0.05
//   istratde sweep       --function rastrigin --dim 10 --sizes 128,512,2048 --budget-fes 200000 --runs 12 --out results/sweep
//   istratde pool-census --pop 100000 --seed 1
//
// Exit codes: 0 success, 2 configuration error, 1 runtime error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <istratde/harness.hpp>

namespace {

using namespace istratde;
using namespace istratde::harness;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunFlags {
    std::string algo = "istratde";
    std::string function = "rastrigin";
    std::size_t dim = 10;
    std::size_t pop = 100;
    std::optional<std::uint64_t> budget_fes;
    std::optional<std::uint64_t> budget_gens;
    std::size_t runs = 31;
    std::uint64_t seed = 1;
    std::uint64_t problem_seed = 1;
    bool rotate = false;
    std::string pool_indices;
    std::size_t workers = default_worker_count();
    std::string out;
    std::size_t trace_stride = 1;
    std::size_t track = 20;
    double f = 0.5;
    double cr = 0.9;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags)
{
    cmd->add_option("--algo", flags.algo, "istratde | canonical_de | fixed_distribution | restricted_pool")->capture_default_str();
    cmd->add_option("--function", flags.function, "sphere rastrigin ackley schwefel rosenbrock griewank levy zakharov")->capture_default_str();
    cmd->add_option("--dim", flags.dim, "problem dimension")->capture_default_str();
    cmd->add_option("--pop", flags.pop, "population size")->capture_default_str();
    auto* fes = cmd->add_option("--budget-fes", flags.budget_fes, "evaluation budget (default 200000)");
    cmd->add_option("--budget-gens", flags.budget_gens, "generation budget")->excludes(fes);
    cmd->add_option("--runs", flags.runs, "independent repetitions")->capture_default_str();
    cmd->add_option("--seed", flags.seed, "master seed; repetition r uses seed + r")->capture_default_str();
    cmd->add_option("--problem-seed", flags.problem_seed, "seed of the shift vector and rotation")->capture_default_str();
    cmd->add_flag("--rotate", flags.rotate, "apply a random rotation");
    cmd->add_option("--pool-indices", flags.pool_indices, "comma list of pool indices (restricted_pool)");
    cmd->add_option("--workers", flags.workers, std::string("worker threads (default from ") + kWorkersEnv + ")")->capture_default_str();
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--trace-stride", flags.trace_stride, "record every k-th generation")->capture_default_str();
    cmd->add_option("--track", flags.track, "individuals followed by rank snapshots")->capture_default_str();
    cmd->add_option("--f", flags.f, "canonical_de scale factor")->capture_default_str();
    cmd->add_option("--cr", flags.cr, "canonical_de crossover rate")->capture_default_str();
}

ExperimentSpec to_spec(const RunFlags& flags)
{
    ExperimentSpec spec;
    const auto algo = parse_algorithm(flags.algo);
    if (!algo)
        throw ConfigError("unknown algorithm '" + flags.algo + "'");
    spec.algorithm = *algo;
    const auto function = parse_function(flags.function);
    if (!function)
        throw ConfigError("unknown function '" + flags.function + "'");
    spec.problem = ProblemSpec{*function, flags.dim, flags.problem_seed, flags.rotate};
    spec.population = flags.pop;
    if (flags.budget_gens)
        spec.budget = Budget::generations(*flags.budget_gens);
    else
        spec.budget = Budget::evaluations(flags.budget_fes.value_or(200000));
    spec.runs = flags.runs;
    spec.master_seed = flags.seed;
    spec.output_dir = flags.out;
    spec.trace_stride = flags.trace_stride;
    spec.tracked_individuals = flags.track;
    spec.f = flags.f;
    spec.cr = flags.cr;
    spec.workers = std::max<std::size_t>(1, flags.workers);
    if (!flags.pool_indices.empty())
        spec.pool_indices = parse_index_list(flags.pool_indices);
    if (spec.algorithm == Algorithm::RestrictedPool && flags.pool_indices.empty())
        throw ConfigError("restricted_pool needs --pool-indices");
    spec.validate();
    return spec;
}

void print_summary(const ExperimentSummary& s)
{
    std::cout << to_string(s.spec.algorithm) << " on " << to_record(s.spec.problem) << " pop=" << s.spec.population
              << " runs=" << s.spec.runs << ": mean=" << s.mean << " sd=" << s.sd << " median=" << s.median << '\n';
}

bool is_config_error(ErrorCode code)
{
    switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InsufficientPopulation:
        return false;
    default:
        return true;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Differential evolution with fixed per-individual strategies"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "run repeated independent experiments");
    add_run_flags(run, run_flags);

    std::string summary_a;
    std::string summary_b;
    double alpha = 0.05;
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "rank-sum comparison of two summary files");
    compare->add_option("summary_a", summary_a, "first summary.json")->required();
    compare->add_option("summary_b", summary_b, "second summary.json")->required();
    compare->add_option("--alpha", alpha, "significance level")->capture_default_str();
    compare->add_option("--out", compare_out, "write the comparison record to this file");

    RunFlags sweep_flags;
    std::string sizes_text = "128,512,2048";
    auto* sweep = app.add_subcommand("sweep", "population-size sweep at a fixed evaluation budget");
    add_run_flags(sweep, sweep_flags);
    sweep->add_option("--sizes", sizes_text, "comma list of population sizes")->capture_default_str();

    std::size_t census_n = 100000;
    std::uint64_t census_seed = 1;
    std::string census_out;
    auto* census = app.add_subcommand("pool-census", "count strategy assignments over the 192-entry pool");
    census->add_option("--pop", census_n, "number of assignments")->capture_default_str();
    census->add_option("--seed", census_seed, "seed")->capture_default_str();
    census->add_option("--out", census_out, "write counts to this JSON file");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    // Configuration stage: anything thrown here maps to exit code 2.
    ExperimentSpec spec;
    std::vector<std::size_t> sizes;
    ExperimentSummary loaded_a;
    ExperimentSummary loaded_b;
    try {
        if (*run)
            spec = to_spec(run_flags);
        else if (*sweep) {
            sizes = parse_index_list(sizes_text);
            RunFlags flags = sweep_flags;
            flags.pop = sizes.empty() ? flags.pop : sizes.front();
            spec = to_spec(flags);
        }
        else if (*compare) {
            loaded_a = ExperimentSummary::from_json(read_json(summary_a));
            loaded_b = ExperimentSummary::from_json(read_json(summary_b));
        }
    }
    catch (const Error& e) {
        const bool config = is_config_error(e.code());
        std::cerr << (config ? "configuration error: " : "error: ") << e.what() << '\n';
        return config ? kExitConfig : kExitRuntime;
    }
    catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*run) {
            print_summary(run_experiment(spec));
        }
        else if (*sweep) {
            const SweepResult result = population_scaling_sweep(spec, sizes);
            for (std::size_t k = 0; k < result.sizes.size(); ++k) {
                std::cout << "pop=" << result.sizes[k] << " normalized_mean_error=" << result.normalized_mean_error[k] << "  ";
                print_summary(result.summaries[k]);
            }
        }
        else if (*compare) {
            const Comparison c = compare_experiments(loaded_a, loaded_b, alpha);
            const Json j = c.to_json();
            std::cout << j.dump(2) << '\n';
            if (!compare_out.empty())
                write_json(compare_out, j);
        }
        else if (*census) {
            const PoolCensus result = pool_census(census_n, census_seed);
            std::cout << "assignments=" << result.assignments << " count_sd=" << result.count_sd
                      << " chi_square=" << result.chi_square << '\n';
            if (!census_out.empty())
                write_json(census_out, result.to_json());
        }
    }
    catch (const Error& e) {
        const bool config = is_config_error(e.code());
        std::cerr << (config ? "configuration error: " : "error: ") << e.what() << '\n';
        return config ? kExitConfig : kExitRuntime;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
