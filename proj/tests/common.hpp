#pragma once

#include <vector>

#include "pnmimo/pnmimo.hpp"

namespace testing_util {

using namespace pnmimo;

template <class Rng>
CVec random_symbols(const Constellation& k, int n, Rng& rng) {
    CVec x(n);
    for (int i = 0; i < n; ++i) x[i] = k.point(uniform_index(rng, k.order()));
    return x;
}

template <class Rng>
CMat random_channel(int n_r, int n_t, Rng& rng) {
    return sample_rayleigh(n_t, n_r, rng).h;
}

inline double sq_dist(const CVec& y, const CMat& h, const CVec& x) { return (y - h * x).squaredNorm(); }

// Plain enumeration of X^n, written without the library's iterator.
inline std::vector<CVec> all_vectors(const Constellation& k, int n) {
    std::vector<CVec> out;
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(k.order());
    for (std::size_t code = 0; code < total; ++code) {
        CVec x(n);
        std::size_t c = code;
        for (int i = n - 1; i >= 0; --i) {
            x[i] = k.point(static_cast<int>(c % k.order()));
            c /= k.order();
        }
        out.push_back(x);
    }
    return out;
}

} // namespace testing_util
