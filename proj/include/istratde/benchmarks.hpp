#pragma once

#include <Eigen/Core>
#include <Eigen/QR>

#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <istratde/error.hpp>
#include <istratde/rng.hpp>

namespace istratde {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Row-major so each individual (row) is contiguous.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class FunctionId : std::uint8_t { Sphere, Rastrigin, Ackley, Schwefel, Rosenbrock, Griewank, Levy, Zakharov };

inline constexpr std::array<FunctionId, 8> kAllFunctions{FunctionId::Sphere, FunctionId::Rastrigin, FunctionId::Ackley,
    FunctionId::Schwefel, FunctionId::Rosenbrock, FunctionId::Griewank, FunctionId::Levy, FunctionId::Zakharov};

inline constexpr std::string_view to_string(FunctionId id)
{
    switch (id) {
    case FunctionId::Sphere: return "sphere";
    case FunctionId::Rastrigin: return "rastrigin";
    case FunctionId::Ackley: return "ackley";
    case FunctionId::Schwefel: return "schwefel";
    case FunctionId::Rosenbrock: return "rosenbrock";
    case FunctionId::Griewank: return "griewank";
    case FunctionId::Levy: return "levy";
    case FunctionId::Zakharov: return "zakharov";
    }
    return "unknown";
}

inline std::optional<FunctionId> parse_function(std::string_view name)
{
    for (FunctionId id : kAllFunctions)
        if (to_string(id) == name)
            return id;
    return std::nullopt;
}

/// Canonical search box [lo, hi] per coordinate.
inline constexpr std::pair<double, double> standard_bounds(FunctionId id)
{
    switch (id) {
    case FunctionId::Sphere: return {-100.0, 100.0};
    case FunctionId::Rastrigin: return {-5.12, 5.12};
    case FunctionId::Ackley: return {-32.768, 32.768};
    case FunctionId::Schwefel: return {-500.0, 500.0};
    case FunctionId::Rosenbrock: return {-30.0, 30.0};
    case FunctionId::Griewank: return {-600.0, 600.0};
    case FunctionId::Levy: return {-10.0, 10.0};
    case FunctionId::Zakharov: return {-10.0, 10.0};
    }
    return {-100.0, 100.0};
}

/// The reproducible description of a problem: everything else is derived from it.
struct ProblemSpec {
    FunctionId function = FunctionId::Sphere;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    bool rotate = false;

    bool operator==(const ProblemSpec&) const = default;
};

/// One-line `key=value` record, e.g. `function=rastrigin dim=10 seed=3 rotate=0`.
inline std::string to_record(const ProblemSpec& spec)
{
    std::ostringstream out;
    out << "function=" << to_string(spec.function) << " dim=" << spec.dim << " seed=" << spec.seed
        << " rotate=" << (spec.rotate ? 1 : 0);
    return out.str();
}

inline ProblemSpec parse_record(std::string_view record)
{
    ProblemSpec spec;
    bool seen[4] = {false, false, false, false};
    std::istringstream in{std::string(record)};
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::InvalidArgument, "malformed problem record token '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
            if (key == "function") {
                auto id = parse_function(value);
                if (!id)
                    throw Error(ErrorCode::InvalidArgument, "unknown function '" + value + "'");
                spec.function = *id;
                seen[0] = true;
            }
            else if (key == "dim") {
                spec.dim = std::stoull(value);
                seen[1] = true;
            }
            else if (key == "seed") {
                spec.seed = std::stoull(value);
                seen[2] = true;
            }
            else if (key == "rotate") {
                spec.rotate = value == "1" || value == "true";
                seen[3] = true;
            }
            else
                throw Error(ErrorCode::InvalidArgument, "unknown problem record key '" + key + "'");
        }
        catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidArgument, "bad value in problem record token '" + token + "'");
        }
    }
    for (bool s : seen)
        if (!s)
            throw Error(ErrorCode::InvalidArgument, "incomplete problem record '" + std::string(record) + "'");
    return spec;
}

template <typename Scalar = double>
struct BenchmarkProblem {
    ProblemSpec spec;
    Vector<Scalar> lb;
    Vector<Scalar> ub;
    Vector<Scalar> shift;
    Matrix<Scalar> rotation;
    bool rotated = false;
    Scalar optimum_value = Scalar(0);

    FunctionId function() const { return spec.function; }
    Eigen::Index dim() const { return shift.size(); }
};

namespace detail {
    // Location of the one-dimensional Schwefel maximum of z*sin(sqrt|z|).
    inline constexpr double kSchwefelPeak = 420.968746359982025;

    template <typename Scalar>
    Scalar schwefel_term(Scalar z, Scalar dim)
    {
        using std::abs;
        using std::fmod;
        using std::sin;
        using std::sqrt;
        // Out-of-box coordinates fold back inside and pay a quadratic penalty
        // so the term never exceeds its in-box maximum.
        if (z > Scalar(500)) {
            const Scalar folded = Scalar(500) - fmod(z, Scalar(500));
            const Scalar excess = z - Scalar(500);
            return folded * sin(sqrt(abs(folded))) - excess * excess / (Scalar(10000) * dim);
        }
        if (z < Scalar(-500)) {
            const Scalar folded = fmod(abs(z), Scalar(500)) - Scalar(500);
            const Scalar excess = z + Scalar(500);
            return folded * sin(sqrt(abs(folded))) - excess * excess / (Scalar(10000) * dim);
        }
        return z * sin(sqrt(abs(z)));
    }
} // namespace detail

/// Unshifted, unrotated base function evaluated at z. Every function has its
/// global minimum 0 at z = 0 (Rosenbrock and Schwefel are translated so this holds).
template <typename Derived>
typename Derived::Scalar evaluate_base(FunctionId id, const Eigen::MatrixBase<Derived>& z)
{
    using Scalar = typename Derived::Scalar;
    using std::cos;
    using std::exp;
    using std::sin;
    using std::sqrt;
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    const Eigen::Index d = z.size();
    const Scalar dim = static_cast<Scalar>(d);

    switch (id) {
    case FunctionId::Sphere:
        return z.squaredNorm();
    case FunctionId::Rastrigin: {
        Scalar sum(0);
        for (Eigen::Index j = 0; j < d; ++j)
            sum += z[j] * z[j] + Scalar(10) * (Scalar(1) - cos(Scalar(2) * pi * z[j]));
        return sum;
    }
    case FunctionId::Ackley: {
        Scalar cos_sum(0);
        for (Eigen::Index j = 0; j < d; ++j)
            cos_sum += cos(Scalar(2) * pi * z[j]);
        const Scalar e = exp(Scalar(1));
        // Grouped as two non-negative parts so the optimum evaluates to exactly 0.
        return Scalar(20) * (Scalar(1) - exp(Scalar(-0.2) * sqrt(z.squaredNorm() / dim))) + (e - exp(cos_sum / dim));
    }
    case FunctionId::Schwefel: {
        const Scalar peak(detail::kSchwefelPeak);
        const Scalar peak_value = detail::schwefel_term(peak, dim);
        Scalar sum(0);
        for (Eigen::Index j = 0; j < d; ++j)
            sum += peak_value - detail::schwefel_term(z[j] + peak, dim);
        return sum;
    }
    case FunctionId::Rosenbrock: {
        Scalar sum(0);
        for (Eigen::Index j = 0; j + 1 < d; ++j) {
            const Scalar a = z[j] + Scalar(1);
            const Scalar b = z[j + 1] + Scalar(1);
            sum += Scalar(100) * (b - a * a) * (b - a * a) + (a - Scalar(1)) * (a - Scalar(1));
        }
        return sum;
    }
    case FunctionId::Griewank: {
        Scalar prod(1);
        for (Eigen::Index j = 0; j < d; ++j)
            prod *= cos(z[j] / sqrt(static_cast<Scalar>(j + 1)));
        return z.squaredNorm() / Scalar(4000) + (Scalar(1) - prod);
    }
    case FunctionId::Levy: {
        auto w = [&](Eigen::Index j) { return Scalar(1) + z[j] / Scalar(4); };
        const Scalar s0 = sin(pi * w(0));
        Scalar sum = s0 * s0;
        for (Eigen::Index j = 0; j + 1 < d; ++j) {
            const Scalar wj = w(j);
            const Scalar s = sin(pi * wj + Scalar(1));
            sum += (wj - Scalar(1)) * (wj - Scalar(1)) * (Scalar(1) + Scalar(10) * s * s);
        }
        const Scalar wl = w(d - 1);
        const Scalar sl = sin(Scalar(2) * pi * wl);
        sum += (wl - Scalar(1)) * (wl - Scalar(1)) * (Scalar(1) + sl * sl);
        return sum;
    }
    case FunctionId::Zakharov: {
        Scalar weighted(0);
        for (Eigen::Index j = 0; j < d; ++j)
            weighted += Scalar(0.5) * static_cast<Scalar>(j + 1) * z[j];
        const Scalar w2 = weighted * weighted;
        return z.squaredNorm() + w2 + w2 * w2;
    }
    }
    return Scalar(0);
}

/// Haar-distributed orthogonal matrix: QR of a seeded Gaussian matrix with
/// the column signs fixed by diag(R).
template <typename Scalar = double>
Matrix<Scalar> random_rotation(Eigen::Index dim, RngStream& rng)
{
    Matrix<Scalar> gauss(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c)
        for (Eigen::Index r = 0; r < dim; ++r) {
            // Box-Muller on our own uniforms so the result is platform independent.
            const double u1 = rng.uniform();
            const double u2 = rng.uniform();
            gauss(r, c) = static_cast<Scalar>(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
        }
    Eigen::HouseholderQR<Matrix<Scalar>> qr(gauss);
    Matrix<Scalar> q = qr.householderQ();
    const Matrix<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < dim; ++c)
        if (r(c, c) < Scalar(0))
            q.col(c) *= Scalar(-1);
    return q;
}

template <typename Scalar = double>
BenchmarkProblem<Scalar> make_problem(const ProblemSpec& spec)
{
    if (spec.dim == 0)
        throw Error(ErrorCode::UnsupportedDimension, "dimension must be at least 1");
    if (spec.function == FunctionId::Schwefel && spec.rotate) {
        static std::once_flag warned;
        std::call_once(warned, [] {
            std::cerr << "warning: rotated Schwefel moves the optimum region against the box edge; "
                         "rotation is normally disabled for this function\n";
        });
    }

    const auto d = static_cast<Eigen::Index>(spec.dim);
    const auto [lo, hi] = standard_bounds(spec.function);
    BenchmarkProblem<Scalar> problem;
    problem.spec = spec;
    problem.lb = Vector<Scalar>::Constant(d, static_cast<Scalar>(lo));
    problem.ub = Vector<Scalar>::Constant(d, static_cast<Scalar>(hi));

    // Dedicated stream cells outside the run grid: generation = ~0, individual = function id.
    RngStream rng(spec.seed, 0xffffffffULL, static_cast<std::uint64_t>(spec.function));
    const double width = hi - lo;
    problem.shift.resize(d);
    for (Eigen::Index j = 0; j < d; ++j)
        problem.shift[j] = static_cast<Scalar>(lo + 0.1 * width + 0.8 * width * rng.uniform());
    // Keep strictly inside the band even when uniform() returns exactly 1.
    const Scalar band_hi = static_cast<Scalar>(hi - 0.1 * width);
    for (Eigen::Index j = 0; j < d; ++j)
        if (problem.shift[j] >= band_hi)
            problem.shift[j] = std::nextafter(band_hi, static_cast<Scalar>(lo));

    problem.rotated = spec.rotate;
    if (spec.rotate) {
        RngStream rot_rng(spec.seed, 0xfffffffeULL, static_cast<std::uint64_t>(spec.function));
        problem.rotation = random_rotation<Scalar>(d, rot_rng);
    }
    else
        problem.rotation = Matrix<Scalar>::Identity(d, d);
    return problem;
}

template <typename Scalar = double>
BenchmarkProblem<Scalar> make_problem(FunctionId id, std::size_t dim, std::uint64_t seed, bool rotate)
{
    return make_problem<Scalar>(ProblemSpec{id, dim, seed, rotate});
}

/// f(x) = f_base(R (x - shift)).
template <typename Scalar, typename Derived>
Scalar evaluate(const BenchmarkProblem<Scalar>& problem, const Eigen::MatrixBase<Derived>& x)
{
    if (x.size() != problem.dim())
        throw Error(ErrorCode::DimensionMismatch,
            "point has " + std::to_string(x.size()) + " coordinates, problem has " + std::to_string(problem.dim()));
    Vector<Scalar> offset(problem.dim());
    for (Eigen::Index j = 0; j < problem.dim(); ++j)
        offset[j] = static_cast<Scalar>(x.derived()(j)) - problem.shift[j];
    if (problem.rotated) {
        const Vector<Scalar> z = problem.rotation * offset;
        return evaluate_base(problem.function(), z);
    }
    return evaluate_base(problem.function(), offset);
}

/// Error relative to the optimum, with anything closer than `threshold`
/// reported as exactly zero. Reporting only; never used inside a run.
template <typename Scalar>
Scalar round_reported(Scalar value, Scalar optimum_value = Scalar(0), Scalar threshold = Scalar(1e-8))
{
    using std::abs;
    const Scalar error = value - optimum_value;
    return abs(error) < threshold ? Scalar(0) : error;
}

} // namespace istratde
