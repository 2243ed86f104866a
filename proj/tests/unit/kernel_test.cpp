#include <set>
#include <tuple>

#include "a653/kernel.hpp"
#include "world.hpp"

using namespace a653;
using namespace a653::kernel;
using PS = ProcessState;
using PM = PartitionMode;
using TMV = TransitionModelVariant;
using testkit::World;

TEST_SUITE("kernel") {
    TEST_CASE("the figured relation lacks exactly three transitions") {
        std::set<std::tuple<ModeClass, PS, PS>> missing;
        for (const auto& r : transition_rules()) {
            if (r.augmented_only) missing.insert({r.mode, r.from, r.to});
        }
        CHECK_FALSE(transition_allowed(TMV::AsFigured, PM::ColdStart, PS::WaitandSuspend, PS::Waiting));
        CHECK(transition_allowed(TMV::Augmented, PM::ColdStart, PS::WaitandSuspend, PS::Waiting));
        CHECK_FALSE(transition_allowed(TMV::AsFigured, PM::Normal, PS::Dormant, PS::Ready,
                                       Trigger::DelayedStartAperiodic));
        CHECK(transition_allowed(TMV::Augmented, PM::Normal, PS::Dormant, PS::Ready, Trigger::DelayedStartAperiodic));
        CHECK_FALSE(transition_allowed(TMV::AsFigured, PM::Normal, PS::Dormant, PS::Waiting,
                                       Trigger::DelayedStartAperiodic));
        CHECK(missing.size() == 3);
    }

    TEST_CASE("no transition is allowed in IDLE") {
        for (auto v : {TMV::AsFigured, TMV::Augmented}) {
            for (const auto& r : transition_rules()) CHECK_FALSE(transition_allowed(v, PM::Idle, r.from, r.to));
        }
    }

    TEST_CASE("running only happens in NORMAL") {
        for (auto m : {PM::ColdStart, PM::WarmStart}) {
            for (auto from : {PS::Dormant, PS::Ready, PS::Waiting, PS::Suspend, PS::WaitandSuspend}) {
                CHECK_FALSE(transition_allowed(TMV::Augmented, m, from, PS::Running));
            }
        }
        CHECK(transition_allowed(TMV::Augmented, PM::Normal, PS::Ready, PS::Running, Trigger::Schedule));
        CHECK_FALSE(transition_allowed(TMV::Augmented, PM::Normal, PS::Ready, PS::Running, Trigger::Resume));
    }

    TEST_CASE("partition mode graph") {
        CHECK(mode_transition_allowed(PM::ColdStart, PM::Normal));
        CHECK(mode_transition_allowed(PM::ColdStart, PM::ColdStart));
        CHECK(mode_transition_allowed(PM::Normal, PM::WarmStart));
        CHECK(mode_transition_allowed(PM::Normal, PM::Idle));
        CHECK_FALSE(mode_transition_allowed(PM::Normal, PM::Normal));
        CHECK_FALSE(mode_transition_allowed(PM::WarmStart, PM::ColdStart));
        for (auto m : {PM::Idle, PM::ColdStart, PM::WarmStart, PM::Normal}) CHECK_FALSE(mode_transition_allowed(PM::Idle, m));
    }

    TEST_CASE("to NORMAL drops the lock and readies started aperiodics") {
        World w;
        const auto p1 = w.part("P1");
        auto s = create_process(w.s, p1, w.pid("hi"));
        CHECK(s.proc(w.pid("hi")).state == PS::Dormant);
        s = partition_mode_transition(s, p1, PM::Normal);
        CHECK(s.part(p1).mode == PM::Normal);
        CHECK(s.part(p1).lock_level == 0);
        CHECK(s.proc(w.pid("hi")).state == PS::Dormant);
    }

    TEST_CASE("illegal mode transitions throw and leave the state alone") {
        World w;
        const auto p1 = w.part("P1");
        auto s = create_process(w.s, p1, w.pid("hi"));
        s = partition_mode_transition(s, p1, PM::Normal);
        const auto before = s;
        CHECK_THROWS_AS((void)partition_mode_transition(s, p1, PM::Normal), IllegalModeTransition);
        CHECK(s == before);
        s = partition_mode_transition(s, p1, PM::WarmStart);
        CHECK(s.part(p1).lock_level == 1);
        CHECK_FALSE(s.has_process(w.pid("hi")));
        CHECK_THROWS_AS((void)partition_mode_transition(s, p1, PM::ColdStart), IllegalModeTransition);
    }

    TEST_CASE("process state transitions follow the relation") {
        World w;
        const auto p1 = w.part("P1");
        const auto hi = w.pid("hi");
        auto s = create_process(w.s, p1, hi);
        s = process_state_transition(s, p1, hi, PS::Waiting, TMV::Augmented);
        CHECK(s.proc(hi).state == PS::Waiting);
        CHECK_THROWS_AS((void)process_state_transition(s, p1, hi, PS::Running, TMV::Augmented), IllegalStateTransition);
        s = process_state_transition(s, p1, hi, PS::WaitandSuspend, TMV::Augmented);
        CHECK_THROWS_AS((void)process_state_transition(s, p1, hi, PS::Waiting, TMV::AsFigured), IllegalStateTransition);
        s = process_state_transition(s, p1, hi, PS::Waiting, TMV::Augmented);
        CHECK(s.proc(hi).state == PS::Waiting);
    }

    TEST_CASE("abstract process transitions only touch the process state") {
        World w;
        const auto p1 = w.part("P1");
        const auto hi = w.pid("hi");
        const auto s0 = create_process(w.s, p1, hi);
        auto s1 = process_state_transition(s0, p1, hi, PS::Waiting, TMV::Augmented);
        s1.proc(hi).state = PS::Dormant;
        CHECK(s1 == s0);
    }

    TEST_CASE("process from another partition or an idle partition throws") {
        World w;
        const auto p1 = w.part("P1");
        const auto hi = w.pid("hi");
        auto s = create_process(w.s, p1, hi);
        CHECK_THROWS_AS((void)process_state_transition(s, w.part("P2"), hi, PS::Waiting, TMV::Augmented),
                        IllegalStateTransition);
        s.part(p1).mode = PM::Idle;
        CHECK_THROWS_AS((void)process_state_transition(s, p1, hi, PS::Waiting, TMV::Augmented), IllegalStateTransition);
    }

    TEST_CASE("create_process guards") {
        World w;
        const auto p1 = w.part("P1");
        auto s = create_process(w.s, p1, w.pid("hi"));
        CHECK_THROWS_AS((void)create_process(s, p1, w.pid("hi")), DuplicateIdError);
        CHECK_THROWS_AS((void)create_process(s, p1, w.pid("rx")), ModelError);
        s = partition_mode_transition(s, p1, PM::Normal);
        CHECK_THROWS_AS((void)create_process(s, p1, w.pid("mid")), InvalidModeError);
    }

    TEST_CASE("enabled abstract events match a direct enumeration") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"mid"});
        w.call("hi", "SUSPEND", {"mid"});
        for (auto v : {TMV::AsFigured, TMV::Augmented}) {
            const auto got = enabled_abstract_events(w.s, v);
            std::size_t expect = 0;
            for (std::size_t i = 0; i < w.s.partitions.size(); ++i) {
                const auto mode = w.s.partitions[i].mode;
                for (auto m : {PM::Idle, PM::ColdStart, PM::WarmStart, PM::Normal}) expect += mode_transition_allowed(mode, m);
                for (ProcessId p : w.s.processes_of(PartitionId{i})) {
                    for (auto to : {PS::Dormant, PS::Ready, PS::Running, PS::Waiting, PS::Suspend, PS::WaitandSuspend}) {
                        expect += transition_allowed(v, mode, w.s.proc(p).state, to);
                    }
                }
                if (is_start_mode(mode)) expect += 1;  // P2 may still create rx
            }
            CHECK(got.size() == expect);
            for (const auto& b : got) {
                if (b.event != "process_state_transition") continue;
                CHECK_NOTHROW((void)process_state_transition(w.s, b.part, *b.proc, *b.newstate, v));
            }
        }
    }
}
