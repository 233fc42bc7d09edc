#pragma once

#include <stdexcept>
#include <vector>

#include "eaciar/types.hpp"

namespace eaciar {

/// Jobs of an ISO_F request within one BI: one per sub-period, ordered by
/// release. Slot indexing is 0-based; job k owns the window
/// [k*period_slots, (k+1)*period_slots).
inline std::vector<Job> expand_iso_f_jobs(const RequestRecord& rec, Slot bi_slots) {
    if (rec.kind() != RequestKind::IsoFraction)
        throw std::invalid_argument("expand_iso_f_jobs: request is not ISO_F");
    const Slot period = static_cast<Slot>(rec.spec.period_slots(bi_slots));
    std::vector<Job> jobs;
    jobs.reserve(rec.spec.period_den);
    for (std::uint32_t k = 0; k < rec.spec.period_den; ++k) {
        Job j;
        j.owner = rec.id();
        j.release = k * period;
        j.deadline = (k + 1) * period;
        j.demand = rec.spec.c_min;
        jobs.push_back(j);
    }
    return jobs;
}

}  // namespace eaciar
