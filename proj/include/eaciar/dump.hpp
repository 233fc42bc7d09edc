#pragma once

// Run-length-encoded schedule dumps. One block per BI:
//
//   schedule-dump bi_slots=<int> bis=<count>
//   bi <index> mode=<PLAYBACK|PURE_EDF> [d_max=<bis>]
//   run <start> <length> <owner id | EMPTY>
//   ...
//
// Runs are maximal, contiguous, non-overlapping, and cover [0, bi_slots);
// parsing reconstructs the exact slot arrays.

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eaciar/replay.hpp"
#include "eaciar/scenario.hpp"
#include "eaciar/types.hpp"

namespace eaciar {

inline void write_schedule_dump(std::ostream& out, const std::vector<BiTrace>& trace,
                                Slot bi_slots) {
    out << "schedule-dump bi_slots=" << bi_slots << " bis=" << trace.size() << '\n';
    for (const BiTrace& t : trace) {
        out << "bi " << t.bi << " mode=" << (t.playback ? "PLAYBACK" : "PURE_EDF");
        if (t.d_max) out << " d_max=" << *t.d_max;
        out << '\n';
        const auto& slots = t.executed.slots;
        for (Slot i = 0; i < slots.size();) {
            Slot j = i;
            while (j < slots.size() && slots[j] == slots[i]) ++j;
            out << "run " << i << ' ' << (j - i) << ' ';
            if (slots[i] == kNoOwner) out << "EMPTY";
            else out << slots[i];
            out << '\n';
            i = j;
        }
    }
}

inline std::string schedule_dump_to_text(const std::vector<BiTrace>& trace, Slot bi_slots) {
    std::ostringstream out;
    write_schedule_dump(out, trace, bi_slots);
    return out.str();
}

/// Inverse of write_schedule_dump; rejects non-maximal, overlapping, or
/// gapped runs. Errors cite the line.
inline std::vector<BiTrace> parse_schedule_dump(std::istream& in) {
    std::vector<BiTrace> trace;
    std::optional<Slot> bi_slots;
    std::size_t declared_bis = 0;
    Slot fill = 0;          // next slot to cover in the open BI
    RequestId prev_owner = 0;
    bool have_prev = false;
    std::string raw;
    std::size_t line = 0;

    auto close_bi = [&] {
        if (trace.empty()) return;
        if (fill != *bi_slots)
            throw ScenarioParseError(line, "bi " + std::to_string(trace.back().bi) +
                                               ": runs cover only " + std::to_string(fill) + " of " +
                                               std::to_string(*bi_slots) + " slots");
    };

    while (std::getline(in, raw)) {
        ++line;
        std::istringstream iss(raw);
        std::string keyword;
        if (!(iss >> keyword)) continue;

        if (keyword == "schedule-dump") {
            if (bi_slots) throw ScenarioParseError(line, "duplicate schedule-dump header");
            std::string rest;
            std::getline(iss, rest);
            const auto fields = detail::parse_fields(rest, line);
            const auto bi = detail::parse_int_field(fields, "bi_slots", line);
            if (bi < 1) throw ScenarioParseError(line, "field 'bi_slots': must be >= 1");
            bi_slots = static_cast<Slot>(bi);
            declared_bis = static_cast<std::size_t>(detail::parse_int_field(fields, "bis", line));
            continue;
        }
        if (keyword == "bi") {
            if (!bi_slots) throw ScenarioParseError(line, "bi before the schedule-dump header");
            close_bi();
            BiTrace t;
            if (!(iss >> t.bi)) throw ScenarioParseError(line, "bi: missing index");
            std::string rest;
            std::getline(iss, rest);
            const auto fields = detail::parse_fields(rest, line);
            const auto mode_it = fields.find("mode");
            if (mode_it == fields.end()) throw ScenarioParseError(line, "missing field 'mode'");
            if (mode_it->second == "PLAYBACK") t.playback = true;
            else if (mode_it->second == "PURE_EDF") t.playback = false;
            else throw ScenarioParseError(line, "field 'mode': expected PLAYBACK or PURE_EDF");
            if (fields.count("d_max"))
                t.d_max = static_cast<std::uint32_t>(detail::parse_int_field(fields, "d_max", line));
            t.executed = BiSchedule(*bi_slots);
            trace.push_back(std::move(t));
            fill = 0;
            have_prev = false;
            continue;
        }
        if (keyword == "run") {
            if (trace.empty()) throw ScenarioParseError(line, "run before any bi");
            Slot start = 0, len = 0;
            std::string owner_tok;
            if (!(iss >> start >> len >> owner_tok))
                throw ScenarioParseError(line, "run: expected <start> <length> <owner>");
            if (start != fill)
                throw ScenarioParseError(line, "run: starts at " + std::to_string(start) +
                                                   ", expected " + std::to_string(fill));
            if (len < 1 || start + len > *bi_slots)
                throw ScenarioParseError(line, "run: length out of range");
            RequestId owner = kNoOwner;
            if (owner_tok != "EMPTY") {
                try {
                    std::size_t pos = 0;
                    const unsigned long v = std::stoul(owner_tok, &pos);
                    if (pos != owner_tok.size() || v == kNoOwner) throw std::invalid_argument("");
                    owner = static_cast<RequestId>(v);
                } catch (const std::exception&) {
                    throw ScenarioParseError(line, "run: bad owner '" + owner_tok + "'");
                }
            }
            if (have_prev && owner == prev_owner)
                throw ScenarioParseError(line, "run: not maximal (same owner as previous run)");
            for (Slot i = start; i < start + len; ++i) trace.back().executed.slots[i] = owner;
            fill = start + len;
            prev_owner = owner;
            have_prev = true;
            continue;
        }
        throw ScenarioParseError(line, "unknown record '" + keyword + "'");
    }
    if (!bi_slots) throw ScenarioParseError(0, "missing schedule-dump header");
    close_bi();
    if (trace.size() != declared_bis)
        throw ScenarioParseError(0, "header declares " + std::to_string(declared_bis) +
                                        " bis, file holds " + std::to_string(trace.size()));
    return trace;
}

inline std::vector<BiTrace> parse_schedule_dump_text(const std::string& text) {
    std::istringstream in(text);
    return parse_schedule_dump(in);
}

}  // namespace eaciar
