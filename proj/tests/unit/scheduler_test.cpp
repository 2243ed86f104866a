#include "a653/errors.hpp"
#include "world.hpp"

using namespace a653;
using PS = ProcessState;
using RC = ReturnCode;
using testkit::World;

TEST_SUITE("scheduler") {
    TEST_CASE("next MTF boundary is strictly after t") {
        CHECK(sched::next_mtf_boundary(10, 0) == 10);
        CHECK(sched::next_mtf_boundary(10, 3) == 10);
        CHECK(sched::next_mtf_boundary(10, 9) == 10);
        CHECK(sched::next_mtf_boundary(10, 10) == 20);
        CHECK(sched::next_mtf_boundary(10, 12) == 20);
        CHECK(sched::next_mtf_boundary(7, 14) == 21);
    }

    TEST_CASE("periodic start timing lands on the next MTF boundary") {
        World w;
        testkit::boot_p1(w);
        w.until(3);
        const auto per = w.pid("per");
        auto s = sched::start_periodic_timing(w.s, per, 0);
        CHECK(s.proc(per).release_point == Tick{10});
        CHECK(s.proc(per).deadline_time == Tick{14});
        s = sched::start_periodic_timing(w.s, per, 9);
        CHECK(s.proc(per).release_point == Tick{20});
        CHECK(s.proc(per).deadline_time == Tick{24});
    }

    TEST_CASE("a deadline is missed only once the clock is past it") {
        World w;
        testkit::boot_p1(w);
        const auto hi = w.pid("hi");
        auto s = w.s;
        s.proc(hi).deadline_time = 13;
        s.clock_tick = 13;
        CHECK(sched::detect_deadline_miss(s).empty());
        s.clock_tick = 14;
        CHECK(sched::detect_deadline_miss(s) == std::vector<ProcessId>{hi});
    }

    TEST_CASE("replenish sets the deadline from now") {
        World w;
        testkit::boot_p1(w);
        w.until(4);
        const auto s = sched::replenish(w.s, w.pid("hi"), 5);
        CHECK(s.proc(w.pid("hi")).deadline_time == Tick{9});
    }

    TEST_CASE("windows hand the processor over and back") {
        World w;
        testkit::boot_p1(w);
        w.until(5);
        CHECK(w.s.current_partition == w.part("P1"));
        w.tick();
        CHECK(w.s.current_partition == w.part("P2"));
        CHECK_FALSE(w.s.current_process.has_value());
        CHECK(w.state_of("hi") == PS::Ready);
        w.until(10);
        CHECK(w.s.current_partition == w.part("P1"));
        CHECK(w.running() == "hi");
    }

    TEST_CASE("higher priority preempts, lower waits") {
        World w;
        testkit::boot_p1(w);
        CHECK(w.call("hi", "START", {"mid"}).rc == RC::NoError);
        CHECK(w.running() == "hi");
        CHECK(w.state_of("mid") == PS::Ready);
        CHECK(w.call("hi", "SUSPEND_SELF", {"inf"}).blocked);
        CHECK(w.running() == "mid");
        CHECK(w.call("mid", "RESUME", {"hi"}).rc == RC::NoError);
        CHECK(w.running() == "hi");
        CHECK(w.state_of("mid") == PS::Ready);
    }

    TEST_CASE("equal priority goes to the longest ready") {
        World w(R"(
schedule.mtf = 10
schedule.window.1 = A:0:10
process.boss = A:9:aperiodic:-:inf
process.x = A:5:aperiodic:-:inf
process.y = A:5:aperiodic:-:inf
)");
        for (const char* p : {"boss", "x", "y"}) w.call("main", "CREATE_PROCESS", {p});
        w.call("main", "START", {"boss"});
        w.call("main", "SET_PARTITION_MODE", {"NORMAL"});
        w.call("boss", "START", {"y"});
        w.tick();
        w.call("boss", "START", {"x"});
        w.call("boss", "STOP_SELF");
        CHECK(w.running() == "y");
    }

    TEST_CASE("preemption lock keeps the holder running") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"mid"});
        CHECK(w.call("hi", "LOCK_PREEMPTION").get("lock_level") == "1");
        CHECK(w.call("hi", "SET_PRIORITY", {"mid", "30"}).rc == RC::NoError);
        CHECK(w.running() == "hi");
        CHECK(w.call("hi", "UNLOCK_PREEMPTION").get("lock_level") == "0");
        CHECK(w.running() == "mid");
    }

    TEST_CASE("timed wait blocks until the delay passes") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"lo"});
        w.call("hi", "TIMED_WAIT", {"2"});
        CHECK(w.state_of("hi") == PS::Waiting);
        CHECK(w.running() == "lo");
        w.tick();
        CHECK(w.running() == "lo");
        w.tick();
        CHECK(w.running() == "hi");
        CHECK(w.s.timeout_trigger[w.pid("hi").index()] == std::nullopt);
    }

    TEST_CASE("timed wait of zero just yields") {
        World w;
        testkit::boot_p1(w);
        CHECK(w.call("hi", "TIMED_WAIT", {"0"}).rc == RC::NoError);
        CHECK(w.running() == "hi");
    }

    TEST_CASE("periodic process runs from its release point") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"per"});
        const auto& per = w.proc("per");
        CHECK(per.state == PS::Waiting);
        CHECK(per.release_point == Tick{10});
        CHECK(per.deadline_time == Tick{14});
        w.call("hi", "SUSPEND_SELF", {"inf"});
        w.until(10);
        CHECK(w.running() == "per");
        CHECK(w.call("per", "PERIODIC_WAIT").rc == RC::NoError);
        CHECK(w.proc("per").release_point == Tick{20});
        CHECK(w.proc("per").deadline_time == Tick{24});
        CHECK_FALSE(w.s.current_process.has_value());
        CHECK(w.violations().empty());
    }

    TEST_CASE("periodic wait outside NORMAL or by an aperiodic is refused") {
        World w;
        testkit::boot_p1(w);
        CHECK(w.call("hi", "PERIODIC_WAIT").rc == RC::InvalidMode);
        CHECK_THROWS_AS((void)sched::periodic_wait(w.s, w.pid("mid")), InvalidModeError);
    }

    TEST_CASE("an idle partition leaves the window empty") {
        World w;
        testkit::boot_p1(w);
        w.until(6);
        CHECK(w.s.current_partition == w.part("P2"));
        CHECK(w.call("main", "SET_PARTITION_MODE", {"IDLE"}).rc == RC::NoError);
        CHECK_FALSE(w.s.current_partition.has_value());
        w.tick();
        CHECK_FALSE(w.s.current_partition.has_value());
        w.until(10);
        CHECK(w.s.current_partition == w.part("P1"));
    }

    TEST_CASE("ticktock advances the clock and refuses a dead module") {
        World w;
        auto s = sched::ticktock(w.s);
        CHECK(s.clock_tick == 1);
        s.module_shutdown = true;
        CHECK_THROWS_AS((void)sched::ticktock(s), ModuleDownError);
    }

    TEST_CASE("choose_process never picks from a start mode") {
        World w;
        testkit::boot_p1(w);
        w.until(6);
        CHECK_FALSE(sched::choose_process(w.s, w.part("P2")).has_value());
        CHECK(sched::choose_process(w.s, w.part("P1")) == w.pid("hi"));
    }
}
