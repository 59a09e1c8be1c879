#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "errors.hpp"

namespace pnmimo {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(std::int64_t k, std::int64_t n, double z = kZ95) {
    if (n <= 0) return {0.0, 1.0};
    if (k < 0 || k > n) throw DimensionMismatch("wilson_interval: need 0 <= k <= n");
    const double nd = static_cast<double>(n);
    const double p = static_cast<double>(k) / nd;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nd;
    const double centre = (p + z2 / (2.0 * nd)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
    return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

/// Trial and vector-error totals of one (detector, snr) cell.
struct ErrorCell {
    std::int64_t trials = 0;
    std::int64_t errors = 0;
    std::int64_t nnd_nodes = 0;

    double rate() const { return trials > 0 ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0; }
    Interval ci95() const { return wilson_interval(errors, trials); }
    double avg_nnd_nodes() const {
        return trials > 0 ? static_cast<double>(nnd_nodes) / static_cast<double>(trials) : 0.0;
    }

    ErrorCell& operator+=(const ErrorCell& o) {
        trials += o.trials;
        errors += o.errors;
        nnd_nodes += o.nnd_nodes;
        return *this;
    }
};

/// Cells keyed by (snr index, detector name). Integer sums, so merging is
/// associative and commutative.
class ErrorCounter {
public:
    using Key = std::pair<std::size_t, std::string>;

    void record(std::size_t snr_idx, const std::string& detector, bool error, std::int64_t nodes = 0) {
        ErrorCell& c = cells_[{snr_idx, detector}];
        ++c.trials;
        c.errors += error ? 1 : 0;
        c.nnd_nodes += nodes;
    }

    void merge(const ErrorCounter& o) {
        for (const auto& [k, v] : o.cells_) cells_[k] += v;
    }

    const ErrorCell& cell(std::size_t snr_idx, const std::string& detector) const {
        static const ErrorCell empty;
        auto it = cells_.find({snr_idx, detector});
        return it == cells_.end() ? empty : it->second;
    }

    const std::map<Key, ErrorCell>& cells() const { return cells_; }

    bool operator==(const ErrorCounter& o) const {
        if (cells_.size() != o.cells_.size()) return false;
        for (const auto& [k, v] : cells_) {
            auto it = o.cells_.find(k);
            if (it == o.cells_.end() || it->second.trials != v.trials || it->second.errors != v.errors ||
                it->second.nnd_nodes != v.nnd_nodes)
                return false;
        }
        return true;
    }

private:
    std::map<Key, ErrorCell> cells_;
};

enum class BoundKind { ml_lb, aml_lb };

inline std::string to_string(BoundKind k) { return k == BoundKind::ml_lb ? "ml_lb" : "aml_lb"; }

/// Error-rate lower bound. Undecided trials count as non-errors.
struct BoundRecord {
    BoundKind kind = BoundKind::ml_lb;
    std::int64_t trials = 0;
    std::int64_t errors_counted = 0;
    std::int64_t undecided = 0;

    double rate() const {
        return trials > 0 ? static_cast<double>(errors_counted) / static_cast<double>(trials) : 0.0;
    }
    Interval ci95() const { return wilson_interval(errors_counted, trials); }

    BoundRecord& operator+=(const BoundRecord& o) {
        trials += o.trials;
        errors_counted += o.errors_counted;
        undecided += o.undecided;
        return *this;
    }
};

} // namespace pnmimo
