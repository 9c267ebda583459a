#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <istratde/error.hpp>

namespace istratde {

struct RankSnapshot {
    std::size_t generation = 0;
    std::vector<double> ranks; // one per tracked individual, in [0, 1]
};

/// Per-recorded-generation history of a run. All four columns have equal length.
struct RunTrace {
    std::vector<std::size_t> generation;
    std::vector<std::uint64_t> evaluations;
    std::vector<double> best_so_far;
    std::vector<double> elitism_proportion;
    std::vector<RankSnapshot> rank_snapshots;

    std::size_t size() const noexcept { return generation.size(); }
};

/// Fraction of `fitness` values within `epsilon` above the optimum.
template <typename Range>
double elitism_proportion(const Range& fitness, double optimum_value, double epsilon = 1e-8)
{
    if (!(epsilon > 0.0))
        throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    std::size_t n = 0;
    std::size_t hits = 0;
    for (const auto value : fitness) {
        ++n;
        if (static_cast<double>(value) - optimum_value < epsilon)
            ++hits;
    }
    return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

/// Midrank of each tracked index, scaled by N - 1 so the unique best is 0 and
/// the unique worst is 1.
template <typename Range>
std::vector<double> normalized_ranks(const Range& fitness, std::span<const std::size_t> tracked)
{
    std::vector<double> values;
    for (const auto value : fitness)
        values.push_back(static_cast<double>(value));
    const std::size_t n = values.size();
    if (n < 2)
        throw Error(ErrorCode::TooFewIndividuals, "rank normalization needs at least two individuals");

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(tracked.size());
    for (std::size_t i : tracked) {
        if (i >= n)
            throw Error(ErrorCode::InvalidArgument, "tracked index out of range");
        const double v = values[i];
        const auto lower = std::lower_bound(sorted.begin(), sorted.end(), v);
        const auto upper = std::upper_bound(sorted.begin(), sorted.end(), v);
        const auto smaller = static_cast<double>(lower - sorted.begin());
        const auto ties = static_cast<double>(upper - lower) - 1.0;
        out.push_back((smaller + 0.5 * ties) / static_cast<double>(n - 1));
    }
    return out;
}

inline double mean(std::span<const double> samples)
{
    if (samples.empty())
        throw Error(ErrorCode::EmptySample, "mean of an empty sample");
    return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

inline double median(std::span<const double> samples)
{
    if (samples.empty())
        throw Error(ErrorCode::EmptySample, "median of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

struct SampleSummary {
    double mean = 0.0;
    double sd = 0.0;
};

/// Mean and sample standard deviation (N - 1 denominator; 0 for one sample).
inline SampleSummary summarize(std::span<const double> samples)
{
    SampleSummary s;
    s.mean = mean(samples);
    if (samples.size() >= 2) {
        double ss = 0.0;
        for (double x : samples)
            ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    }
    return s;
}

enum class Verdict { Better, Similar, Worse };

inline constexpr const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Better: return "better";
    case Verdict::Similar: return "similar";
    case Verdict::Worse: return "worse";
    }
    return "?";
}

/// Table symbol: + better, ≈ similar, - worse.
inline constexpr const char* verdict_symbol(Verdict v)
{
    switch (v) {
    case Verdict::Better: return "+";
    case Verdict::Similar: return "≈";
    case Verdict::Worse: return "-";
    }
    return "?";
}

struct RankSumReport {
    double u_statistic = 0.0; // U of the first sample
    double p_value = 1.0;
    Verdict verdict = Verdict::Similar; // first sample relative to the second (lower is better)
    double alpha = 0.05;
};

/// Midranks (1-based) of the pooled sample a ++ b, plus the tie term sum(t^3 - t).
inline std::vector<double> pooled_midranks(std::span<const double> a, std::span<const double> b, double* tie_term = nullptr)
{
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, std::size_t>> pooled;
    pooled.reserve(n);
    for (std::size_t k = 0; k < a.size(); ++k)
        pooled.emplace_back(a[k], k);
    for (std::size_t k = 0; k < b.size(); ++k)
        pooled.emplace_back(b[k], a.size() + k);
    std::sort(pooled.begin(), pooled.end());

    std::vector<double> ranks(n);
    double ties = 0.0;
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start;
        while (end < n && pooled[end].first == pooled[start].first)
            ++end;
        const double midrank = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t k = start; k < end; ++k)
            ranks[pooled[k].second] = midrank;
        const auto t = static_cast<double>(end - start);
        ties += t * t * t - t;
        start = end;
    }
    if (tie_term)
        *tie_term = ties;
    return ranks;
}

/// Two-sided Mann-Whitney U test: midranks for ties, normal approximation with
/// tie-corrected variance and a 0.5 continuity correction. The verdict is
/// Better/Worse only when p < alpha and the medians differ.
inline RankSumReport wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b, double alpha = 0.05)
{
    if (a.size() < 3 || b.size() < 3)
        throw Error(ErrorCode::SampleTooSmall, "rank-sum test needs at least 3 observations per sample");

    double tie_term = 0.0;
    const std::vector<double> ranks = pooled_midranks(a, b, &tie_term);
    const auto n1 = static_cast<double>(a.size());
    const auto n2 = static_cast<double>(b.size());
    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);

    RankSumReport report;
    report.alpha = alpha;
    report.u_statistic = rank_sum_a - n1 * (n1 + 1.0) / 2.0;

    const double n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (variance <= 0.0)
        report.p_value = 1.0;
    else {
        const double z = std::max(0.0, std::abs(report.u_statistic - mu) - 0.5) / std::sqrt(variance);
        report.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }

    if (report.p_value < alpha) {
        const double ma = median(a);
        const double mb = median(b);
        if (ma < mb)
            report.verdict = Verdict::Better;
        else if (ma > mb)
            report.verdict = Verdict::Worse;
    }
    return report;
}

} // namespace istratde
