#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/QR>

#include "errors.hpp"
#include "types.hpp"

namespace pnmimo {

struct RealNndResult {
    RVec x;
    std::vector<int> index;   // level index per coordinate
    double distance = 0.0;    // ||y - H x||^2
    std::int64_t nodes = 0;   // enumeration nodes visited
};

namespace detail {

// true when a is lexicographically smaller than b, coordinate 0 most significant
inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

} // namespace detail

/// Exact minimizer of ||y - H x||^2 over x in levels^n (real alphabet).
///
/// Depth-first Schnorr-Euchner enumeration on the QR factor of H. Candidates
/// at each layer are visited in order of distance from the layer's center, so
/// the first leaf reached is the successive-quantization (Babai) point and
/// its distance becomes the initial radius. The radius shrinks at every
/// better leaf. Exact distance ties resolve to the lexicographically smallest
/// level-index vector. `levels` must be sorted ascending.
inline RealNndResult real_nnd(const RVec& y, const RMat& h, std::span<const double> levels) {
    const Eigen::Index m = h.rows();
    const Eigen::Index n = h.cols();
    if (y.size() != m) throw DimensionMismatch("real_nnd: y and H disagree");
    if (n == 0 || levels.empty()) throw DimensionMismatch("real_nnd: empty problem");
    if (m < n) throw RankDeficient("real_nnd: more unknowns than observations");

    Eigen::HouseholderQR<RMat> qr(h);
    const RMat r = qr.matrixQR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
    const RVec qty = qr.householderQ().transpose() * y;
    const RVec z = qty.head(n);
    const double offset = m > n ? qty.tail(m - n).squaredNorm() : 0.0;

    double max_diag = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) max_diag = std::max(max_diag, std::abs(r(k, k)));
    for (Eigen::Index k = 0; k < n; ++k)
        if (!(std::abs(r(k, k)) > 1e-10 * max_diag)) throw RankDeficient("real_nnd: channel is rank deficient");

    const int q = static_cast<int>(levels.size());
    const auto nk = static_cast<std::size_t>(n);

    std::vector<int> cur(nk, 0);
    std::vector<int> best(nk, 0);
    std::vector<double> center(nk, 0.0);
    std::vector<double> partial(nk + 1, 0.0);  // partial[k]: distance of layers >= k
    std::vector<int> lo(nk), hi(nk);
    std::vector<char> started(nk, 0);
    double best_dist = std::numeric_limits<double>::infinity();
    bool have_best = false;
    std::int64_t nodes = 0;

    auto nearest = [&](double c) {
        // Levels are equally spaced; ties go to the lower index.
        const double spacing = q > 1 ? levels[1] - levels[0] : 1.0;
        const double t = q > 1 ? (c - levels[0]) / spacing : 0.0;
        double idx = std::ceil(t - 0.5);
        if (!(idx > 0.0)) idx = 0.0;
        if (idx > q - 1) idx = q - 1;
        return static_cast<int>(idx);
    };

    auto open_layer = [&](Eigen::Index k) {
        double s = z[k];
        for (Eigen::Index j = k + 1; j < n; ++j) s -= r(k, j) * levels[cur[j]];
        center[k] = s / r(k, k);
        started[k] = 0;
    };

    // Next candidate index at layer k in order of distance to the center, -1 when exhausted.
    auto next_candidate = [&](Eigen::Index k) -> int {
        const double c = center[k];
        if (!started[k]) {
            started[k] = 1;
            const int i0 = nearest(c);
            lo[k] = i0 - 1;
            hi[k] = i0 + 1;
            return i0;
        }
        const bool has_lo = lo[k] >= 0;
        const bool has_hi = hi[k] < q;
        if (!has_lo && !has_hi) return -1;
        if (has_lo && (!has_hi || c - levels[lo[k]] <= levels[hi[k]] - c)) return lo[k]--;
        return hi[k]++;
    };

    Eigen::Index k = n - 1;
    open_layer(k);
    while (true) {
        const int cand = next_candidate(k);
        if (cand < 0) {
            if (++k == n) break;
            continue;
        }
        ++nodes;
        const double e = r(k, k) * (center[k] - levels[cand]);
        const double d = partial[k + 1] + e * e;
        if (d > best_dist) {
            // Remaining candidates at this layer are no closer.
            if (++k == n) break;
            continue;
        }
        cur[k] = cand;
        if (k == 0) {
            if (!have_best || d < best_dist || (d == best_dist && detail::lex_less(cur, best))) {
                best = cur;
                best_dist = d;
                have_best = true;
            }
            continue;
        }
        partial[k] = d;
        --k;
        open_layer(k);
    }

    RealNndResult out;
    out.index = best;
    out.x.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.x[i] = levels[best[i]];
    out.distance = best_dist + offset;
    out.nodes = nodes;
    return out;
}

} // namespace pnmimo
