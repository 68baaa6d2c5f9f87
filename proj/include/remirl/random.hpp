#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace remirl {

/// Counter-based SplitMix64 stream. Output depends only on (seed, stream,
/// draw count), so results are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL))) {}

    std::uint64_t next() noexcept { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    /// Independent child stream; does not advance this generator.
    Rng split(std::uint64_t stream) const noexcept { return Rng(key_, stream + 1); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

    /// Index drawn with probability proportional to non-negative `weights`.
    template <class Derived>
    Eigen::Index categorical(const Eigen::DenseBase<Derived>& weights) noexcept {
        const double total = weights.sum();
        const double target = uniform() * total;
        double cumulative = 0.0;
        Eigen::Index last_positive = 0;
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            if (weights(i) <= 0.0) continue;
            cumulative += weights(i);
            last_positive = i;
            if (target < cumulative) return i;
        }
        return last_positive;
    }

    std::uint64_t draws() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace remirl
