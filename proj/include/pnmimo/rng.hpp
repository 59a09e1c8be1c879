#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "types.hpp"

namespace pnmimo {

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator (SplitMix64): the i-th output is mix64(key + i * golden).
/// Any (key, position) pair can be reached without generating its
/// predecessors, so streams for different trials are independent of the
/// order in which trials run.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix64(key_ + counter_);
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream purposes. Each random quantity of a trial comes from its own
/// stream so enabling a detector or bound never shifts another draw.
enum class Purpose : std::uint64_t {
    channel = 1,
    symbols = 2,
    phase = 3,
    noise = 4,
    bound = 5,
    detector = 6,
    aux = 7,
};

/// Derive a stream key from a master seed and a tuple of indices.
inline std::uint64_t derive_key(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t v : path) h = mix64(h ^ mix64(v + 0x3c6ef372fe94f82bULL));
    return h;
}

inline CounterRng trial_stream(std::uint64_t master, std::uint64_t snr_index, std::uint64_t trial_index,
                               Purpose purpose) noexcept {
    return CounterRng(derive_key(master, {snr_index, trial_index, static_cast<std::uint64_t>(purpose)}));
}

template <class Rng>
double standard_normal(Rng& rng) {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

template <class Rng>
double uniform_real(Rng& rng, double lo, double hi) {
    boost::random::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

template <class Rng>
int uniform_index(Rng& rng, int n) {
    boost::random::uniform_int_distribution<int> dist(0, n - 1);
    return dist(rng);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
template <class Rng>
cplx complex_normal(Rng& rng, double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = standard_normal(rng);
    const double im = standard_normal(rng);
    return {s * re, s * im};
}

} // namespace pnmimo
