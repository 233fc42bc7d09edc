#pragma once

#include <chrono>
#include <cstdint>
#include <ostream>
#include <vector>

#include "eaciar/admission.hpp"
#include "eaciar/types.hpp"

namespace eaciar {

struct BenchConfig {
    Slot bi_slots = kDefaultBiSlots;
    std::uint32_t d_max = 8;    // horizon pinned by a resident ASYNC
    std::uint32_t reps = 30;
    std::uint32_t warmup = 2;
};

struct BenchRow {
    std::uint32_t n_iso = 0;
    double mean_admit_ns = 0.0;
};

/// A state with n ISO_M requests at ~half utilization plus one resident
/// ASYNC that pins the LongSchedule horizon to d_max BIs. c_max leaves a
/// surplus so an admit call walks every pass of the builder.
inline SystemState make_bench_state(std::uint32_t n_iso, const BenchConfig& cfg) {
    SystemState st;
    st.bi_slots = cfg.bi_slots;
    for (std::uint32_t i = 1; i <= n_iso; ++i) {
        TrafficSpec s;
        s.id = i;
        s.type = RequestType::Iso;
        s.period_num = 1;
        s.period_den = 1;
        s.c_min = std::max<SlotCount>(1, static_cast<SlotCount>(cfg.bi_slots) / (2 * std::max(n_iso, 1u)));
        s.c_max = std::min<SlotCount>(cfg.bi_slots, 2 * s.c_min);
        s.lifetime = 4 * cfg.d_max;
        st.insert(make_record(s));
    }
    TrafficSpec resident;
    resident.id = n_iso + 1;
    resident.type = RequestType::Async;
    resident.period_num = cfg.d_max;
    resident.period_den = 1;
    resident.c_min = resident.c_max = 1;
    resident.lifetime = cfg.d_max;
    st.insert(make_record(resident));
    return st;
}

/// Mean wall time of one admit call (a fresh ASYNC probe) against a state
/// with n ISO requests, for each n. Each repetition admits into a copy so
/// every call sees the identical state.
inline std::vector<BenchRow> scaling_benchmark(const std::vector<std::uint32_t>& ns,
                                               const BenchConfig& cfg = {}) {
    std::vector<BenchRow> rows;
    for (const std::uint32_t n : ns) {
        const SystemState base = make_bench_state(n, cfg);
        TrafficSpec probe;
        probe.id = n + 2;
        probe.type = RequestType::Async;
        probe.period_num = cfg.d_max;
        probe.period_den = 1;
        probe.c_min = probe.c_max = 1;
        probe.lifetime = cfg.d_max;

        std::uint64_t total_ns = 0;
        for (std::uint32_t rep = 0; rep < cfg.warmup + cfg.reps; ++rep) {
            SystemState st = base;
            const auto t0 = std::chrono::steady_clock::now();
            const AdmissionOutcome oc = admit(st, probe);
            const auto t1 = std::chrono::steady_clock::now();
            detail::require(oc.accepted(), "benchmark probe unexpectedly rejected");
            if (rep >= cfg.warmup)
                total_ns += static_cast<std::uint64_t>(
                    std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
        }
        rows.push_back({n, static_cast<double>(total_ns) / cfg.reps});
    }
    return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "n_iso,mean_admit_ns\n";
    for (const BenchRow& r : rows)
        out << r.n_iso << ',' << static_cast<std::uint64_t>(r.mean_admit_ns) << '\n';
}

/// Coefficient of determination of the least-squares line through
/// (n, mean_admit_ns); the linearity acceptance check.
inline double linear_fit_r2(const std::vector<BenchRow>& rows) {
    const double n = static_cast<double>(rows.size());
    if (rows.size() < 2) return 1.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const BenchRow& r : rows) {
        sx += r.n_iso;
        sy += r.mean_admit_ns;
        sxx += static_cast<double>(r.n_iso) * r.n_iso;
        sxy += r.n_iso * r.mean_admit_ns;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0) return 0.0;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (const BenchRow& r : rows) {
        const double pred = intercept + slope * r.n_iso;
        ss_res += (r.mean_admit_ns - pred) * (r.mean_admit_ns - pred);
        ss_tot += (r.mean_admit_ns - mean_y) * (r.mean_admit_ns - mean_y);
    }
    if (ss_tot == 0) return ss_res == 0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

}  // namespace eaciar
