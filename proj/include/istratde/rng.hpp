#pragma once

#include <cstdint>
#include <limits>

namespace istratde {

namespace detail {
    // splitmix64 finalizer; a bijection on 64-bit words.
    constexpr std::uint64_t mix64(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
} // namespace detail

/// Counter-derived random stream.
///
/// The starting state is a bijective hash of (generation, individual) under a
/// key derived from the master seed, so every cell of the 2^32 x 2^32 grid gets
/// its own state and a stream never depends on which thread consumes it. The
/// sequence itself is splitmix64. Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t generation, std::uint64_t individual) noexcept
        : _master_seed(master_seed), _generation(generation), _individual(individual)
    {
        const std::uint64_t key = detail::mix64(master_seed + 0x9e3779b97f4a7c15ULL);
        const std::uint64_t cell = (generation << 32) ^ (individual & 0xffffffffULL);
        _state = detail::mix64(key ^ detail::mix64(cell));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        _state += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(_state);
    }

    /// Uniform on (0, 1]. Never returns 0, so `uniform() <= 0` is always false
    /// and `uniform() <= 1` always true.
    double uniform() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n) noexcept
    {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    std::uint64_t master_seed() const noexcept { return _master_seed; }
    std::uint64_t generation() const noexcept { return _generation; }
    std::uint64_t individual() const noexcept { return _individual; }

private:
    std::uint64_t _master_seed;
    std::uint64_t _generation;
    std::uint64_t _individual;
    std::uint64_t _state;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t generation, std::uint64_t individual) noexcept
{
    return RngStream(master_seed, generation, individual);
}

} // namespace istratde
