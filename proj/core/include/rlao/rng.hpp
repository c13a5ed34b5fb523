#pragma once

#include <cstdint>
#include <initializer_list>

namespace rlao {

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: output i of a stream is a pure function of
/// (key, i), so streams can be split into independent children and a
/// stream's position is just an integer.
class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr CounterRng() noexcept = default;
    constexpr explicit CounterRng(std::uint64_t seed) noexcept
        : key_(detail::mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    /// Child stream identified by `ids`; independent of the parent's position.
    [[nodiscard]] constexpr CounterRng split(std::initializer_list<std::uint64_t> ids) const noexcept {
        CounterRng child;
        std::uint64_t k = key_;
        for (std::uint64_t id : ids) {
            k = detail::mix64(k ^ detail::mix64(id + 0x9e3779b97f4a7c15ULL));
        }
        child.key_ = k;
        return child;
    }

    constexpr std::uint64_t operator()() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        const auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    [[nodiscard]] constexpr std::uint64_t draws() const noexcept { return counter_; }

    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace rlao
