#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace pnmimo {

/// Square QAM alphabet with unit average energy.
///
/// Points are ordered row-major over (real level, imaginary level), both
/// ascending: point(i, j) = level[i] + j*level[j] sits at index i*side + j.
/// That ordering is the tie-break order used by every quantizer here.
class Constellation {
public:
    static constexpr int kSupportedOrders[] = {4, 16, 64, 256, 1024};

    explicit Constellation(int order) : order_(order) {
        if (std::find(std::begin(kSupportedOrders), std::end(kSupportedOrders), order) ==
            std::end(kSupportedOrders)) {
            throw InvalidOrder("unsupported QAM order " + std::to_string(order) +
                               " (expected 4, 16, 64, 256 or 1024)");
        }
        side_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
        // Levels +-1, +-3, ... have average QAM energy 2(M-1)/3.
        step_ = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
        levels_.resize(side_);
        for (int i = 0; i < side_; ++i) levels_[i] = step_ * (2 * i - (side_ - 1));
        points_.reserve(order);
        for (int i = 0; i < side_; ++i)
            for (int j = 0; j < side_; ++j) points_.emplace_back(levels_[i], levels_[j]);
    }

    int order() const noexcept { return order_; }
    int side() const noexcept { return side_; }
    std::string name() const { return "qam" + std::to_string(order_); }

    std::span<const cplx> points() const noexcept { return points_; }
    std::span<const double> levels() const noexcept { return levels_; }
    const cplx& point(int index) const { return points_[index]; }

    /// Half the spacing between adjacent PAM levels.
    double level_step() const noexcept { return step_; }
    double min_distance() const noexcept { return 2.0 * step_; }

    double avg_energy() const {
        double e = 0.0;
        for (const auto& p : points_) e += std::norm(p);
        return e / order_;
    }

    /// E|x|^4 under uniformly distributed symbols.
    double fourth_moment() const {
        double e = 0.0;
        for (const auto& p : points_) e += std::norm(p) * std::norm(p);
        return e / order_;
    }

    /// Index of the PAM level nearest to v; exact ties go to the lower index.
    int nearest_level_index(double v) const noexcept {
        const double t = (v / step_ + (side_ - 1)) / 2.0;
        const double idx = std::ceil(t - 0.5);
        if (!(idx > 0.0)) return 0;
        if (idx >= side_ - 1) return side_ - 1;
        return static_cast<int>(idx);
    }

    /// Index of the PAM level equal to v, or -1.
    int level_index(double v) const noexcept {
        const int i = nearest_level_index(v);
        return levels_[i] == v ? i : -1;
    }

    int nearest_index(cplx c) const noexcept {
        return nearest_level_index(c.real()) * side_ + nearest_level_index(c.imag());
    }

    /// Index of an exact constellation point, or -1.
    int index_of(cplx c) const noexcept {
        const int i = level_index(c.real());
        const int j = level_index(c.imag());
        return (i < 0 || j < 0) ? -1 : i * side_ + j;
    }

    bool contains(cplx c) const noexcept { return index_of(c) >= 0; }

private:
    int order_;
    int side_ = 0;
    double step_ = 0.0;
    std::vector<double> levels_;
    std::vector<cplx> points_;
};

inline Constellation make_qam(int order) { return Constellation(order); }

/// Closest constellation point; ties resolve to the earliest point in the
/// constellation's ordering. Distance is separable, so per-axis
/// quantization with lower-index ties gives the same answer as a full scan.
inline cplx nearest_symbol(cplx c, const Constellation& k) { return k.point(k.nearest_index(c)); }

inline std::vector<double> real_alphabet(const Constellation& k) {
    return {k.levels().begin(), k.levels().end()};
}

/// Component-wise quantization of a complex vector.
inline CVec quantize(const CVec& v, const Constellation& k) {
    CVec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = nearest_symbol(v[i], k);
    return out;
}

inline bool in_alphabet(const CVec& x, const Constellation& k) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!k.contains(x[i])) return false;
    return true;
}

} // namespace pnmimo
