#pragma once

// SystemState serialization, for the what-if admission command. Text format:
//
//   state bi_slots=<int> current_bi=<int>
//   record id=<int> type=<ISO|ASYNC> period=<num>/<den> c_min=<slots> c_max=<slots>
//          lifetime=<bis> c_op=<slots> c_budget=<slots> c_remain=<slots> d_curr=<bis>
//          t_remain_life=<bis>
//
// The active LongSchedule is not stored; it is rebuilt from the records on
// load (admission decisions depend only on the table, so the round trip
// preserves every decision).

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "eaciar/admission.hpp"
#include "eaciar/scenario.hpp"
#include "eaciar/types.hpp"

namespace eaciar {

inline void save_state(std::ostream& out, const SystemState& st) {
    out << "state bi_slots=" << st.bi_slots << " current_bi=" << st.current_bi << '\n';
    auto dump = [&](const RequestRecord& r) {
        const TrafficSpec& s = r.spec;
        out << "record id=" << s.id << " type=" << to_string(s.type) << " period=" << s.period_num
            << '/' << s.period_den << " c_min=" << s.c_min << " c_max=" << s.c_max
            << " lifetime=" << s.lifetime << " c_op=" << r.c_op << " c_budget=" << r.c_budget
            << " c_remain=" << r.c_remain << " d_curr=" << r.d_curr
            << " t_remain_life=" << r.t_remain_life << '\n';
    };
    for (const RequestRecord& r : st.iso) dump(r);
    for (const RequestRecord& r : st.async_reqs) dump(r);
}

inline std::string state_to_text(const SystemState& st) {
    std::ostringstream out;
    save_state(out, st);
    return out.str();
}

inline SystemState load_state(std::istream& in) {
    SystemState st;
    bool saw_header = false;
    std::string raw;
    std::size_t line = 0;

    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream iss(raw);
        std::string keyword;
        if (!(iss >> keyword)) continue;
        std::string rest;
        std::getline(iss, rest);

        if (keyword == "state") {
            if (saw_header) throw ScenarioParseError(line, "duplicate state header");
            saw_header = true;
            const auto fields = detail::parse_fields(rest, line);
            const auto bi = detail::parse_int_field(fields, "bi_slots", line);
            if (bi < 1) throw ScenarioParseError(line, "field 'bi_slots': must be >= 1");
            st.bi_slots = static_cast<Slot>(bi);
            st.current_bi = static_cast<BiIndex>(detail::parse_int_field(fields, "current_bi", line));
            continue;
        }
        if (keyword == "record") {
            if (!saw_header) throw ScenarioParseError(line, "record before the state header");
            const auto fields = detail::parse_fields(rest, line);

            RequestRecord r;
            TrafficSpec& s = r.spec;
            s.id = static_cast<RequestId>(detail::parse_int_field(fields, "id", line));
            const auto type_it = fields.find("type");
            if (type_it == fields.end()) throw ScenarioParseError(line, "missing field 'type'");
            if (type_it->second == "ISO") s.type = RequestType::Iso;
            else if (type_it->second == "ASYNC") s.type = RequestType::Async;
            else throw ScenarioParseError(line, "field 'type': expected ISO or ASYNC, got '" +
                                                    type_it->second + "'");
            std::tie(s.period_num, s.period_den) = detail::parse_period_field(fields, line);
            s.c_min = detail::parse_int_field(fields, "c_min", line);
            s.c_max = detail::parse_int_field(fields, "c_max", line);
            s.lifetime = static_cast<std::uint32_t>(detail::parse_int_field(fields, "lifetime", line));
            r.c_op = detail::parse_int_field(fields, "c_op", line);
            r.c_budget = detail::parse_int_field(fields, "c_budget", line);
            r.c_remain = detail::parse_int_field(fields, "c_remain", line);
            r.d_curr = static_cast<std::uint32_t>(detail::parse_int_field(fields, "d_curr", line));
            r.t_remain_life =
                static_cast<std::uint32_t>(detail::parse_int_field(fields, "t_remain_life", line));

            for (const std::string& p : validate(s, st.bi_slots))
                throw ScenarioParseError(line, "record id " + std::to_string(s.id) + ": " + p);
            if (st.find(s.id) != nullptr)
                throw ScenarioParseError(line, "duplicate record id " + std::to_string(s.id));
            st.insert(r);
            continue;
        }
        throw ScenarioParseError(line, "unknown record '" + keyword + "'");
    }
    if (!saw_header) throw ScenarioParseError(0, "missing state header");

    if (!st.async_reqs.empty()) {
        BuildResult res = build_long_schedule(st.iso, st.async_reqs, st.bi_slots, {});
        if (!std::holds_alternative<LongSchedule>(res))
            throw ScenarioParseError(0, "state admits no feasible schedule for its ASYNC records");
        st.long_schedule = ActiveLongSchedule{std::move(std::get<LongSchedule>(res)), st.current_bi};
    }
    return st;
}

inline SystemState load_state_text(const std::string& text) {
    std::istringstream in(text);
    return load_state(in);
}

}  // namespace eaciar
