#include <istratde/harness.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <istratde/core.hpp>

namespace istratde::harness {

namespace {
    constexpr std::array<std::pair<Algorithm, std::string_view>, 4> kAlgorithmNames{{
        {Algorithm::IStratDE, "istratde"},
        {Algorithm::CanonicalDE, "canonical_de"},
        {Algorithm::FixedDistribution, "fixed_distribution"},
        {Algorithm::RestrictedPool, "restricted_pool"},
    }};

    std::string numbered(std::string_view stem, std::size_t k)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "_%03zu.csv", k);
        return std::string(stem) + buf;
    }

    std::string format_double(double value)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        return buf;
    }

    Json budget_json(const Budget& budget)
    {
        Json j;
        j["kind"] = budget.kind == Budget::Kind::MaxEvaluations ? "evaluations" : "generations";
        j["limit"] = budget.limit;
        return j;
    }

    Budget budget_from_json(const Json& j)
    {
        const auto kind = j.at("kind").get<std::string>();
        const auto limit = j.at("limit").get<std::uint64_t>();
        if (kind == "evaluations")
            return Budget::evaluations(limit);
        if (kind == "generations")
            return Budget::generations(limit);
        throw Error(ErrorCode::InvalidArgument, "unknown budget kind '" + kind + "'");
    }

    Json problem_json(const ProblemSpec& p)
    {
        Json j;
        j["function"] = std::string(to_string(p.function));
        j["dim"] = p.dim;
        j["seed"] = p.seed;
        j["rotate"] = p.rotate;
        return j;
    }

    ProblemSpec problem_from_json(const Json& j)
    {
        ProblemSpec p;
        const auto name = j.at("function").get<std::string>();
        const auto id = parse_function(name);
        if (!id)
            throw Error(ErrorCode::InvalidArgument, "unknown function '" + name + "'");
        p.function = *id;
        p.dim = j.at("dim").get<std::size_t>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.rotate = j.at("rotate").get<bool>();
        return p;
    }

    void ensure_directory(const std::filesystem::path& dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw Error(ErrorCode::IoError, "cannot create directory " + dir.string() + ": " + ec.message());
    }
} // namespace

std::string_view to_string(Algorithm algorithm)
{
    for (const auto& [a, name] : kAlgorithmNames)
        if (a == algorithm)
            return name;
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name)
{
    for (const auto& [a, n] : kAlgorithmNames)
        if (n == name)
            return a;
    return std::nullopt;
}

void ExperimentSpec::validate() const
{
    if (runs < 1)
        throw Error(ErrorCode::InvalidArgument, "run count must be at least 1");
    if (trace_stride < 1)
        throw Error(ErrorCode::InvalidArgument, "trace stride must be at least 1");
    if (problem.dim < 1)
        throw Error(ErrorCode::UnsupportedDimension, "dimension must be at least 1");
    if (budget.kind == Budget::Kind::MaxEvaluations && budget.limit < population)
        throw Error(ErrorCode::BudgetExhaustedBeforeInit,
            "evaluation budget " + std::to_string(budget.limit) + " cannot cover the initial population of " + std::to_string(population));

    switch (algorithm) {
    case Algorithm::CanonicalDE:
        if (population < 4)
            throw Error(ErrorCode::PopulationTooSmall, "DE/rand/1 needs at least 4 individuals");
        if (!(f >= 0.0 && f <= 2.0) || !(cr >= 0.0 && cr <= 1.0))
            throw Error(ErrorCode::InvalidArgument, "canonical DE needs F in [0, 2] and CR in [0, 1]");
        break;
    case Algorithm::RestrictedPool:
        validate_restriction(pool_indices);
        [[fallthrough]];
    case Algorithm::IStratDE:
        if (population < kMinPoolPopulation)
            throw Error(ErrorCode::PopulationTooSmall,
                "population of " + std::to_string(population) + " is below the minimum of " + std::to_string(kMinPoolPopulation));
        break;
    case Algorithm::FixedDistribution:
        distribution.validate();
        if (population < kMinPoolPopulation)
            throw Error(ErrorCode::PopulationTooSmall,
                "population of " + std::to_string(population) + " is below the minimum of " + std::to_string(kMinPoolPopulation));
        break;
    }
}

RunResult<double> run_repetition(const ExperimentSpec& spec, std::size_t repetition, std::size_t workers)
{
    const auto problem = make_problem<double>(spec.problem);
    const std::uint64_t seed = spec.master_seed + repetition;
    RunOptions options;
    options.workers = workers;
    options.trace_stride = spec.trace_stride;
    options.tracked_individuals = spec.tracked_individuals;

    switch (spec.algorithm) {
    case Algorithm::IStratDE:
        return run_istratde(problem, spec.population, spec.budget, seed, std::nullopt, options);
    case Algorithm::RestrictedPool:
        return run_istratde(problem, spec.population, spec.budget, seed, PoolRestriction(spec.pool_indices), options);
    case Algorithm::FixedDistribution:
        return run_fixed_distribution(problem, spec.population, spec.budget, seed, spec.distribution, options);
    case Algorithm::CanonicalDE:
        return run_canonical_de(problem, spec.population, spec.f, spec.cr, spec.budget, seed, options);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

ExperimentSummary run_experiment(const ExperimentSpec& spec, std::vector<RunTrace>* traces)
{
    spec.validate();
    const auto started = std::chrono::steady_clock::now();
    if (!spec.output_dir.empty())
        ensure_directory(spec.output_dir);

    // Parallelize across repetitions when there are enough of them, otherwise
    // inside each run. Either way the numbers are identical.
    const std::size_t workers = std::max<std::size_t>(1, spec.workers);
    const bool across_runs = spec.runs >= workers;
    std::vector<RunResult<double>> results(spec.runs);
    parallel_for(spec.runs, across_runs ? workers : 1,
        [&](std::size_t r) { results[r] = run_repetition(spec, r, across_runs ? 1 : workers); });

    ExperimentSummary summary;
    summary.spec = spec;
    const double optimum = 0.0;
    for (std::size_t r = 0; r < spec.runs; ++r) {
        const auto& res = results[r];
        summary.final_errors.push_back(round_reported(res.best_value, optimum));
        summary.evaluations_used.push_back(res.evaluations_used);
        summary.generations_used.push_back(res.generations_used);
        if (!spec.output_dir.empty()) {
            write_trace_csv(spec.output_dir / numbered("trace", r), res.trace, optimum);
            if (!res.trace.rank_snapshots.empty())
                write_ranks_csv(spec.output_dir / numbered("ranks", r), res.trace);
        }
        if (traces)
            traces->push_back(res.trace);
    }
    const SampleSummary s = summarize(summary.final_errors);
    summary.mean = s.mean;
    summary.sd = s.sd;
    summary.median = median(summary.final_errors);
    summary.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (!spec.output_dir.empty())
        write_json(spec.output_dir / "summary.json", summary.to_json());
    return summary;
}

Json ExperimentSummary::to_json() const
{
    Json j;
    j["algorithm"] = std::string(to_string(spec.algorithm));
    j["problem"] = problem_json(spec.problem);
    j["problem_record"] = to_record(spec.problem);
    j["population"] = spec.population;
    j["budget"] = budget_json(spec.budget);
    j["runs"] = spec.runs;
    j["master_seed"] = spec.master_seed;
    j["trace_stride"] = spec.trace_stride;
    j["tracked_individuals"] = spec.tracked_individuals;

    Json params = Json::object();
    switch (spec.algorithm) {
    case Algorithm::CanonicalDE:
        params["f"] = spec.f;
        params["cr"] = spec.cr;
        break;
    case Algorithm::RestrictedPool:
        params["pool_indices"] = spec.pool_indices;
        break;
    case Algorithm::FixedDistribution:
        params["base_vector"] = spec.distribution.base_vector;
        params["diff_count"] = spec.distribution.diff_count;
        params["crossover"] = spec.distribution.crossover;
        break;
    case Algorithm::IStratDE:
        break;
    }
    j["parameters"] = params;

    j["final_errors"] = final_errors;
    j["evaluations_used"] = evaluations_used;
    j["generations_used"] = generations_used;
    j["mean"] = mean;
    j["sd"] = sd;
    j["median"] = median;
    j["wall_clock_seconds"] = wall_clock_seconds;
    return j;
}

ExperimentSummary ExperimentSummary::from_json(const Json& j)
{
    try {
        ExperimentSummary s;
        const auto name = j.at("algorithm").get<std::string>();
        const auto algorithm = parse_algorithm(name);
        if (!algorithm)
            throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + name + "'");
        s.spec.algorithm = *algorithm;
        s.spec.problem = problem_from_json(j.at("problem"));
        s.spec.population = j.at("population").get<std::size_t>();
        s.spec.budget = budget_from_json(j.at("budget"));
        s.spec.runs = j.at("runs").get<std::size_t>();
        s.spec.master_seed = j.at("master_seed").get<std::uint64_t>();
        s.spec.trace_stride = j.at("trace_stride").get<std::size_t>();
        s.spec.tracked_individuals = j.at("tracked_individuals").get<std::size_t>();

        const Json& params = j.at("parameters");
        if (s.spec.algorithm == Algorithm::CanonicalDE) {
            s.spec.f = params.at("f").get<double>();
            s.spec.cr = params.at("cr").get<double>();
        }
        else if (s.spec.algorithm == Algorithm::RestrictedPool)
            s.spec.pool_indices = params.at("pool_indices").get<std::vector<std::size_t>>();
        else if (s.spec.algorithm == Algorithm::FixedDistribution) {
            s.spec.distribution.base_vector = params.at("base_vector").get<std::array<double, 4>>();
            s.spec.distribution.diff_count = params.at("diff_count").get<std::array<double, 4>>();
            s.spec.distribution.crossover = params.at("crossover").get<std::array<double, 3>>();
        }

        s.final_errors = j.at("final_errors").get<std::vector<double>>();
        s.evaluations_used = j.at("evaluations_used").get<std::vector<std::uint64_t>>();
        s.generations_used = j.at("generations_used").get<std::vector<std::uint64_t>>();
        s.mean = j.at("mean").get<double>();
        s.sd = j.at("sd").get<double>();
        s.median = j.at("median").get<double>();
        s.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
        return s;
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed summary: ") + e.what());
    }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace, double optimum_value)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << kTraceHeader << '\n';
    for (std::size_t k = 0; k < trace.size(); ++k)
        out << trace.generation[k] << ',' << trace.evaluations[k] << ',' << format_double(trace.best_so_far[k] - optimum_value)
            << ',' << format_double(trace.elitism_proportion[k]) << '\n';
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_ranks_csv(const std::filesystem::path& path, const RunTrace& trace)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    const std::size_t tracked = trace.rank_snapshots.empty() ? 0 : trace.rank_snapshots.front().ranks.size();
    out << "generation";
    for (std::size_t i = 0; i < tracked; ++i)
        out << ",individual_" << i;
    out << '\n';
    for (const auto& snap : trace.rank_snapshots) {
        out << snap.generation;
        for (double r : snap.ranks)
            out << ',' << format_double(r);
        out << '\n';
    }
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

RunTrace read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kTraceHeader)
        throw Error(ErrorCode::InvalidArgument, "unexpected trace header in " + path.string());
    RunTrace trace;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string cell[4];
        for (auto& c : cell)
            if (!std::getline(row, c, ','))
                throw Error(ErrorCode::InvalidArgument, "short trace row in " + path.string());
        trace.generation.push_back(std::stoull(cell[0]));
        trace.evaluations.push_back(std::stoull(cell[1]));
        trace.best_so_far.push_back(std::stod(cell[2]));
        trace.elitism_proportion.push_back(std::stod(cell[3]));
    }
    return trace;
}

void write_json(const std::filesystem::path& path, const Json& json)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << json.dump(2) << '\n';
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    try {
        return Json::parse(in);
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "malformed JSON in " + path.string() + ": " + e.what());
    }
}

Json Comparison::to_json() const
{
    Json j;
    j["algorithm_a"] = algorithm_a;
    j["algorithm_b"] = algorithm_b;
    j["problem"] = problem_json(problem);
    j["budget"] = budget_json(budget);
    j["mean_a"] = summary_a.mean;
    j["sd_a"] = summary_a.sd;
    j["mean_b"] = summary_b.mean;
    j["sd_b"] = summary_b.sd;
    j["u_statistic"] = report.u_statistic;
    j["p_value"] = report.p_value;
    j["alpha"] = report.alpha;
    j["verdict"] = to_string(report.verdict);
    j["symbol"] = verdict_symbol(report.verdict);
    return j;
}

Comparison compare_experiments(const ExperimentSummary& a, const ExperimentSummary& b, double alpha)
{
    if (!(a.spec.problem == b.spec.problem))
        throw Error(ErrorCode::MismatchedProtocol, "summaries were run on different problems");
    if (!(a.spec.budget == b.spec.budget))
        throw Error(ErrorCode::MismatchedProtocol, "summaries were run under different budgets");

    Comparison c;
    c.algorithm_a = std::string(to_string(a.spec.algorithm));
    c.algorithm_b = std::string(to_string(b.spec.algorithm));
    c.problem = a.spec.problem;
    c.budget = a.spec.budget;
    c.summary_a = summarize(a.final_errors);
    c.summary_b = summarize(b.final_errors);
    c.report = wilcoxon_rank_sum(a.final_errors, b.final_errors, alpha);
    return c;
}

Json SweepResult::to_json() const
{
    Json j;
    Json rows = Json::array();
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        Json row;
        row["population"] = sizes[k];
        row["mean"] = summaries[k].mean;
        row["sd"] = summaries[k].sd;
        row["median"] = summaries[k].median;
        row["normalized_mean_error"] = normalized_mean_error[k];
        rows.push_back(row);
    }
    j["sizes"] = rows;
    return j;
}

SweepResult population_scaling_sweep(const ExperimentSpec& base, const std::vector<std::size_t>& sizes)
{
    if (sizes.empty())
        throw Error(ErrorCode::InvalidArgument, "sweep needs at least one population size");
    // Validate every size before spending any evaluations.
    for (std::size_t n : sizes) {
        ExperimentSpec spec = base;
        spec.population = n;
        spec.validate();
    }

    SweepResult sweep;
    for (std::size_t n : sizes) {
        ExperimentSpec spec = base;
        spec.population = n;
        if (!base.output_dir.empty())
            spec.output_dir = base.output_dir / ("pop_" + std::to_string(n));
        sweep.sizes.push_back(n);
        sweep.summaries.push_back(run_experiment(spec));
    }
    double largest = 0.0;
    for (const auto& s : sweep.summaries)
        largest = std::max(largest, s.mean);
    for (const auto& s : sweep.summaries)
        sweep.normalized_mean_error.push_back(largest > 0.0 ? s.mean / largest : 0.0);

    if (!base.output_dir.empty())
        write_json(base.output_dir / "sweep.json", sweep.to_json());
    return sweep;
}

Json PoolCensus::to_json() const
{
    Json j;
    j["assignments"] = assignments;
    j["count_sd"] = count_sd;
    j["chi_square"] = chi_square;
    Json rows = Json::array();
    const auto& pool = enumerate_pool();
    for (std::size_t k = 0; k < kPoolSize; ++k) {
        Json row;
        row["index"] = k;
        row["strategy"] = istratde::to_string(pool[k]);
        row["count"] = counts[k];
        rows.push_back(row);
    }
    j["counts"] = rows;
    return j;
}

PoolCensus pool_census(std::size_t assignments, std::uint64_t seed)
{
    if (assignments < 1)
        throw Error(ErrorCode::InvalidArgument, "census needs at least one assignment");
    PoolCensus census;
    census.assignments = assignments;
    for (std::size_t i = 0; i < assignments; ++i) {
        RngStream rng = derive_stream(seed, 0, i);
        census.counts[pool_index(sample_strategy<double>(rng).tuple())] += 1;
    }
    const double expected = static_cast<double>(assignments) / static_cast<double>(kPoolSize);
    double ss = 0.0;
    for (std::size_t c : census.counts) {
        const double diff = static_cast<double>(c) - expected;
        ss += diff * diff;
    }
    census.count_sd = std::sqrt(ss / static_cast<double>(kPoolSize));
    census.chi_square = ss / expected;
    return census;
}

std::vector<std::size_t> parse_index_list(std::string_view text)
{
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty())
            continue;
        try {
            std::size_t used = 0;
            const unsigned long long value = std::stoull(item, &used);
            if (used != item.size())
                throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(value));
        }
        catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidArgument, "'" + item + "' is not a non-negative integer");
        }
    }
    return out;
}

} // namespace istratde::harness
