#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "eaciar/admission.hpp"
#include "eaciar/runtime.hpp"
#include "eaciar/types.hpp"
#include "test_util.hpp"

using namespace eaciar;
using test::async_spec;
using test::iso_f;
using test::iso_m;

TEST_CASE("pure EDF serves ISO_F at c_op inside each window")
{
    SystemState st;
    st.bi_slots = 10;
    RequestRecord r = make_record(iso_f(1, 2, 2, 3, 8));
    r.c_op = 3;
    st.insert(r);

    RuntimeMode mode = mode_for(st);
    REQUIRE(mode.kind == RuntimeMode::Kind::PureEdf);
    const BiSchedule bi = next_bi_schedule(st, mode);
    const std::vector<RequestId> expect = {1, 1, 1, 0, 0, 1, 1, 1, 0, 0};
    CHECK(bi.slots == expect);
}

TEST_CASE("pure EDF gives an ISO_M exactly c_op per period")
{
    SystemState st;
    st.bi_slots = 10;
    REQUIRE(admit(st, iso_m(1, 2, 6, 8, 10)).accepted());
    CHECK(st.find(1)->c_op == 8);   // plenty of surplus: c_op = c_max

    RuntimeMode mode = mode_for(st);
    // First BI of the period carries the whole demand (EDF front-loads).
    BiResult r0 = run_bi(st, mode);
    CHECK(r0.executed.owned_by(1) == 8);
    CHECK(st.find(1)->c_remain == -2);   // 8 granted against c_min 6

    // Second BI: demand already covered.
    BiResult r1 = run_bi(st, mode);
    CHECK(r1.executed.owned_by(1) == 0);
    CHECK(st.find(1)->c_remain == 6);    // period reset
    CHECK(st.find(1)->d_curr == 2);

    // Next period repeats the pattern.
    BiResult r2 = run_bi(st, mode);
    CHECK(r2.executed.owned_by(1) == 8);
}

TEST_CASE("playback replays the stored schedule BI by BI")
{
    SystemState st;
    st.bi_slots = 10;
    REQUIRE(admit(st, iso_f(1, 2, 2, 2, 8)).accepted());
    REQUIRE(admit(st, async_spec(2, 2, 4)).accepted());
    const LongSchedule stored = st.long_schedule->sched;
    REQUIRE(stored.d_max() == 2);

    RuntimeMode mode = mode_for(st);
    REQUIRE(mode.kind == RuntimeMode::Kind::Playback);
    CHECK(mode.cursor == 0);

    const BiResult r0 = run_bi(st, mode);
    CHECK(r0.executed == stored.bis[0]);
    CHECK(r0.departed.empty());
    CHECK(mode.cursor == 1);

    const BiResult r1 = run_bi(st, mode);
    CHECK(r1.executed == stored.bis[1]);
    CHECK(r1.departed == std::vector<RequestId>{2});   // deadline == lifetime
    // The ASYNC set emptied: back to per-BI EDF.
    CHECK(mode.kind == RuntimeMode::Kind::PureEdf);
    CHECK_FALSE(st.long_schedule.has_value());
}

TEST_CASE("playback integrity checks are internal errors")
{
    SystemState st;
    st.bi_slots = 10;
    REQUIRE(admit(st, async_spec(1, 3, 5)).accepted());
    RuntimeMode mode = mode_for(st);

    SECTION("cursor drift")
    {
        st.current_bi = 7;   // BI counter moved without the cursor
        CHECK_THROWS_AS(next_bi_schedule(st, mode), std::logic_error);
    }
    SECTION("cursor past the horizon")
    {
        mode.cursor = st.long_schedule->sched.d_max();
        st.current_bi = st.long_schedule->start_bi + mode.cursor;
        CHECK_THROWS_AS(next_bi_schedule(st, mode), std::logic_error);
    }
    SECTION("playback with no stored schedule")
    {
        st.long_schedule.reset();
        CHECK_THROWS_AS(next_bi_schedule(st, mode), std::logic_error);
    }
}

TEST_CASE("leaving playback mid-period settles ISO_M requests")
{
    SystemState st;
    st.bi_slots = 10;
    REQUIRE(admit(st, iso_m(1, 3, 9, 9, 9)).accepted());
    REQUIRE(admit(st, async_spec(2, 2, 3)).accepted());
    RuntimeMode mode = mode_for(st);

    // BI 0: the plan front-loads the whole ISO_M period demand.
    const BiResult r0 = run_bi(st, mode);
    CHECK(r0.executed.owned_by(1) == 9);
    CHECK(r0.executed.owned_by(2) == 1);   // only one slot left in BI 0

    // BI 1: ASYNC finishes and departs; we leave playback mid-period.
    const BiResult r1 = run_bi(st, mode);
    CHECK(r1.executed.owned_by(2) == 2);
    CHECK(r1.departed == std::vector<RequestId>{2});
    CHECK(mode.kind == RuntimeMode::Kind::PureEdf);
    REQUIRE(mode.settling == std::vector<RequestId>{1});
    CHECK(st.find(1)->d_curr == 1);
    CHECK(st.find(1)->c_remain == 0);

    // BI 2: the settling request already received its period demand.
    const BiResult r2 = run_bi(st, mode);
    CHECK(r2.executed.owned_by(1) == 0);
    CHECK(mode.settling.empty());          // period reset ends the settling
    CHECK(st.find(1)->c_remain == 9);

    // BI 3: normal EDF at c_op resumes.
    const BiResult r3 = run_bi(st, mode);
    CHECK(r3.executed.owned_by(1) == 9);
}

TEST_CASE("a settling ISO_M with a positive carry drains it before the reset")
{
    SystemState st;
    st.bi_slots = 10;
    RequestRecord r = make_record(iso_m(1, 3, 5, 5, 9));
    r.c_remain = 4;    // mid-period, 4 slots still owed
    r.d_curr = 2;
    st.insert(r);
    RuntimeMode mode;  // PureEdf
    mode.settling = {1};

    const BiResult r0 = run_bi(st, mode);
    CHECK(r0.executed.owned_by(1) == 4);
    CHECK(mode.settling == std::vector<RequestId>{1});   // period not over yet
    const BiResult r1 = run_bi(st, mode);
    CHECK(r1.executed.owned_by(1) == 0);
    CHECK(mode.settling.empty());
    CHECK(st.find(1)->c_remain == 5);
}

TEST_CASE("a settling ISO_M with a negative carry stays idle until its reset")
{
    SystemState st;
    st.bi_slots = 10;
    RequestRecord r = make_record(iso_m(1, 2, 5, 5, 9));
    r.c_remain = -3;   // playback over-served the current period
    r.d_curr = 1;
    st.insert(r);
    RuntimeMode mode;
    mode.settling = {1};

    const BiResult r0 = run_bi(st, mode);
    CHECK(r0.executed.owned_by(1) == 0);
    CHECK(mode.settling.empty());
    const BiResult r1 = run_bi(st, mode);
    CHECK(r1.executed.owned_by(1) == 5);
}

TEST_CASE("runtime mode always mirrors the ASYNC population", "[property]")
{
    std::mt19937_64 rng(909090);
    for (int trial = 0; trial < 40; ++trial) {
        SystemState st;
        st.bi_slots = 32;
        RuntimeMode mode = mode_for(st);
        RequestId next = 1;

        for (int bi = 0; bi < 30; ++bi) {
            if (test::draw(rng, 0, 2) == 0) {
                TrafficSpec s;
                const auto pick = test::draw(rng, 0, 2);
                if (pick == 0)
                    s = iso_m(next, static_cast<std::uint32_t>(test::draw(rng, 1, 4)),
                              static_cast<SlotCount>(test::draw(rng, 1, 16)),
                              static_cast<SlotCount>(test::draw(rng, 16, 32)),
                              static_cast<std::uint32_t>(test::draw(rng, 1, 10)));
                else if (pick == 1)
                    s = iso_f(next, 2, static_cast<SlotCount>(test::draw(rng, 1, 8)),
                              static_cast<SlotCount>(test::draw(rng, 8, 16)),
                              static_cast<std::uint32_t>(test::draw(rng, 1, 10)));
                else
                    s = async_spec(next, static_cast<std::uint32_t>(test::draw(rng, 1, 4)),
                                   static_cast<SlotCount>(test::draw(rng, 1, 32)));
                const AdmissionOutcome oc = admit(st, s);
                if (oc.accepted()) {
                    ++next;
                    install_outcome(st, mode, oc);
                }
            }
            REQUIRE((mode.kind == RuntimeMode::Kind::Playback) ==
                    st.long_schedule.has_value());
            REQUIRE((mode.kind == RuntimeMode::Kind::Playback) == !st.async_reqs.empty());

            const BiResult res = run_bi(st, mode);
            REQUIRE(res.executed.size() == st.bi_slots);
            REQUIRE((mode.kind == RuntimeMode::Kind::Playback) ==
                    st.long_schedule.has_value());
            if (st.long_schedule)
                REQUIRE(st.long_schedule->start_bi + mode.cursor == st.current_bi);
        }
    }
}

TEST_CASE("ISO-only execution grants exactly c_op per complete period", "[property]")
{
    std::mt19937_64 rng(909091);
    for (int trial = 0; trial < 60; ++trial) {
        SystemState st;
        st.bi_slots = 48;
        const auto n = test::draw(rng, 1, 4);
        RequestId next = 1;
        for (std::uint64_t i = 0; i < n; ++i) {
            TrafficSpec s;
            if (test::draw(rng, 0, 1) == 0) {
                const auto p = static_cast<std::uint32_t>(test::draw(rng, 1, 4));
                const auto c_min = static_cast<SlotCount>(test::draw(rng, 1, 24));
                s = iso_m(next, p, c_min,
                          std::min<SlotCount>(c_min + static_cast<SlotCount>(test::draw(rng, 0, 24)),
                                              static_cast<SlotCount>(p) * 48),
                          40);
            } else {
                const auto den = static_cast<std::uint32_t>(test::draw(rng, 0, 1) ? 2 : 4);
                const SlotCount ps = 48 / den;
                const auto c_min = static_cast<SlotCount>(test::draw(rng, 1, ps / 2));
                s = iso_f(next, den, c_min,
                          std::min<SlotCount>(c_min + static_cast<SlotCount>(test::draw(rng, 0, ps / 2)), ps),
                          40);
            }
            if (admit(st, s).accepted()) ++next;
        }
        if (st.empty()) continue;

        const auto iso = st.iso;   // records with final c_op
        RuntimeMode mode = mode_for(st);
        std::map<RequestId, SlotCount> window_got;
        for (int bi = 0; bi < 12; ++bi) {
            const std::map<RequestId, std::uint32_t> d_before = [&] {
                std::map<RequestId, std::uint32_t> m;
                for (const auto& r : st.iso) m[r.id()] = r.d_curr;
                return m;
            }();
            const BiResult res = run_bi(st, mode);
            for (const auto& r : iso) {
                const SlotCount got = res.executed.owned_by(r.id());
                if (r.kind() == RequestKind::IsoFraction) {
                    // Every window of every BI carries exactly c_op.
                    const Slot ps = static_cast<Slot>(r.spec.period_slots(48));
                    for (Slot w = 0; w < 48; w += ps) {
                        SlotCount in_window = 0;
                        for (Slot s2 = w; s2 < w + ps; ++s2)
                            if (res.executed.slots[s2] == r.id()) ++in_window;
                        REQUIRE(in_window == r.c_op);
                    }
                } else {
                    window_got[r.id()] += got;
                    if (d_before.at(r.id()) == 1) {   // period closed this BI
                        REQUIRE(window_got[r.id()] == r.c_op);
                        window_got[r.id()] = 0;
                    }
                }
            }
        }
    }
}

TEST_CASE("no slots are granted past a departure")
{
    SystemState st;
    st.bi_slots = 10;
    REQUIRE(admit(st, iso_m(1, 1, 4, 4, 2)).accepted());
    REQUIRE(admit(st, iso_m(2, 1, 3, 3, 5)).accepted());
    RuntimeMode mode = mode_for(st);

    CHECK(run_bi(st, mode).executed.owned_by(1) == 4);
    const BiResult last = run_bi(st, mode);
    CHECK(last.executed.owned_by(1) == 4);
    CHECK(last.departed == std::vector<RequestId>{1});
    const BiResult after = run_bi(st, mode);
    CHECK(after.executed.owned_by(1) == 0);
    CHECK(after.executed.owned_by(2) == 3);
    CHECK(st.find(1) == nullptr);
}

TEST_CASE("a c_op raise mid-period cannot displace another request's c_min")
{
    SystemState st;
    st.bi_slots = 10;
    RuntimeMode mode = mode_for(st);

    // Two requests at utilization 8/10; the surplus factor 2/9 puts id=1 at
    // c_op = 2 + floor(18 * 2/9) = 6.
    const AdmissionOutcome a1 = admit(st, iso_m(1, 2, 2, 20, 8));
    REQUIRE(a1.accepted());
    install_outcome(st, mode, a1);
    const AdmissionOutcome a2 = admit(st, iso_m(2, 1, 7, 7, 1));
    REQUIRE(a2.accepted());
    install_outcome(st, mode, a2);
    REQUIRE(a2.c_op_map.at(1) == 6);

    const BiResult b0 = run_bi(st, mode);
    CHECK(b0.executed.owned_by(2) == 7);   // earlier deadline
    CHECK(b0.executed.owned_by(1) == 3);
    REQUIRE(b0.departed == std::vector<RequestId>{2});

    // The departure frees capacity and raises id=1's target, but the period
    // already in progress keeps its budget: catching up to the new target
    // right before the deadline would squeeze whoever shares it.
    CHECK(st.find(1)->c_op == 20);
    CHECK(st.find(1)->c_budget == 6);

    const AdmissionOutcome a3 = admit(st, iso_m(3, 1, 7, 7, 4));
    REQUIRE(a3.accepted());
    install_outcome(st, mode, a3);

    // id=1 and id=3 now share the BI-1 deadline; the id tie-break serves
    // id=1 first, so an unbudgeted catch-up would hand it the whole BI.
    const BiResult b1 = run_bi(st, mode);
    CHECK(b1.executed.owned_by(1) == 3);   // completes its budget of 6
    CHECK(b1.executed.owned_by(3) == 7);   // keeps its full c_min
}

TEST_CASE("a period the lifetime cannot complete yields to ones it can")
{
    SystemState st;
    st.bi_slots = 20;
    RuntimeMode mode = mode_for(st);
    // id=1 departs after one BI of its 2-BI period: that period is never
    // held to its c_min, so its demand must rank as top-up service.
    const AdmissionOutcome a1 = admit(st, iso_m(1, 2, 18, 18, 1));
    REQUIRE(a1.accepted());
    install_outcome(st, mode, a1);
    const AdmissionOutcome a2 = admit(st, iso_m(2, 2, 20, 20, 8));
    REQUIRE(a2.accepted());
    install_outcome(st, mode, a2);

    // BI 0: id=2's full 20 lands ahead of id=1 despite the id tie-break.
    const BiResult b0 = run_bi(st, mode);
    CHECK(b0.executed.owned_by(1) == 0);
    CHECK(b0.executed.owned_by(2) == 20);
    REQUIRE(b0.departed == std::vector<RequestId>{1});
    CHECK(st.find(2)->c_remain == 0);

    // An ISO_F arrival raises utilization to exactly 1, and its two window
    // deadlines precede id=2's. Had id=1's cut-short period kept 18 slots of
    // BI 0, id=2 would now need them back and 10 of them would be gone.
    const AdmissionOutcome a3 = admit(st, iso_f(3, 2, 5, 10, 8));
    REQUIRE(a3.accepted());
    REQUIRE(a3.c_op_map.at(3) == 5);
    install_outcome(st, mode, a3);
    const BiResult b1 = run_bi(st, mode);
    CHECK(b1.executed.owned_by(3) == 10);
    CHECK(b1.executed.owned_by(2) == 0);
    CHECK(st.find(2)->c_remain == 20);   // clean period reset, no shortfall
}
