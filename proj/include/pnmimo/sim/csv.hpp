#pragma once

#include <cinttypes>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "experiment.hpp"

namespace pnmimo::sim {

namespace detail {

inline std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

} // namespace detail

/// Result table. Reals use 17 significant digits so the file is bit-stable;
/// rows are sorted by (snr, detector name).
inline void write_csv(std::ostream& os, const ExperimentResult& r) {
    const ExperimentConfig& c = r.config;
    os << "# config_hash=" << detail::hex64(config_hash(c)) << "\n";
    os << "# master_seed=" << c.master_seed << "\n";
    os << "scenario,detector,snr_db,trials,errors,rate,ci_lo,ci_hi,avg_nnd_nodes\n";
    for (const auto& [key, cell] : r.counter.cells()) {
        const Interval ci = cell.ci95();
        os << c.name() << ',' << key.second << ',' << detail::fmt_real(c.snr_db_list[key.first]) << ','
           << cell.trials << ',' << cell.errors << ',' << detail::fmt_real(cell.rate()) << ','
           << detail::fmt_real(ci.lo) << ',' << detail::fmt_real(ci.hi) << ','
           << detail::fmt_real(cell.avg_nnd_nodes()) << "\n";
    }
    if (r.ml_bounds.empty() && r.aml_bounds.empty()) return;
    os << "# bounds\n";
    os << "kind,snr_db,trials,errors,undecided,rate,ci_lo,ci_hi\n";
    auto row = [&](std::size_t s, const BoundRecord& b) {
        const Interval ci = b.ci95();
        os << to_string(b.kind) << ',' << detail::fmt_real(c.snr_db_list[s]) << ',' << b.trials << ','
           << b.errors_counted << ',' << b.undecided << ',' << detail::fmt_real(b.rate()) << ','
           << detail::fmt_real(ci.lo) << ',' << detail::fmt_real(ci.hi) << "\n";
    };
    for (std::size_t s = 0; s < c.snr_db_list.size(); ++s) {
        if (auto it = r.ml_bounds.find(s); it != r.ml_bounds.end()) row(s, it->second);
        if (auto it = r.aml_bounds.find(s); it != r.aml_bounds.end()) row(s, it->second);
    }
}

inline std::string to_csv(const ExperimentResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

} // namespace pnmimo::sim
