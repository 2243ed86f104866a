#pragma once

#include <doctest.h>

#include <string>
#include <string_view>
#include <vector>

#include "a653/config.hpp"
#include "a653/errors.hpp"
#include "a653/invariants.hpp"
#include "a653/scheduler.hpp"
#include "a653/services.hpp"
#include "a653/state.hpp"

namespace testkit {

using namespace a653;

// P1 owns 0..6, P2 owns 6..10. Objects for every service group.
inline constexpr std::string_view kTwoParts = R"(
schedule.mtf = 10
schedule.window.1 = P1:0:6
schedule.window.2 = P2:6:10
partition.P1.period = 10
partition.P2.period = 10
process.hi = P1:10:aperiodic:-:inf
process.mid = P1:7:aperiodic:-:inf
process.lo = P1:5:aperiodic:-:inf
process.per = P1:3:periodic:10:4
process.rx = P2:10:aperiodic:-:inf
port.qo = queuing:src:2:fifo
port.qo.partition = P1
port.qi = queuing:dst:1:fifo
port.qi.partition = P2
port.so = sampling:src
port.so.partition = P1
port.si = sampling:dst
port.si.partition = P2
channel.q = qo -> qi
channel.s = so -> si
buffer.buf = P1:2
blackboard.bb = P1
semaphore.sem = P1:0:2
event.ev = P1
hm.module.POWER_FAIL = MODULE:MODULE_SHUTDOWN
hm.partition.P1.DEADLINE_MISSED = PROCESS:PROCESS_ERRORHANDLER
hm.partition.P1.APPLICATION_ERROR = PROCESS:PROCESS_ERRORHANDLER
hm.partition.P2.DEADLINE_MISSED = PARTITION:PARTITION_IDLE
hm.partition.P2.APPLICATION_ERROR = PARTITION:PARTITION_COLD_RESTART
)";

struct Reply {
    ReturnCode rc = ReturnCode::NoError;
    std::vector<std::pair<std::string, std::string>> out;
    bool blocked = false;

    [[nodiscard]] std::string get(std::string_view key) const {
        for (const auto& [k, v] : out) {
            if (k == key) return v;
        }
        return "<missing>";
    }
};

struct World {
    ScenarioConfig cfg;
    SystemState s;
    VariantToggles toggles;

    explicit World(std::string_view text = kTwoParts, VariantToggles t = {})
        : cfg(parse_config(text, "test")), s(sched::settle(new_state(cfg), t).new_state), toggles(t) {}

    [[nodiscard]] ProcessId pid(std::string_view n) const {
        const auto p = cfg.find_process(n);
        REQUIRE_MESSAGE(p.has_value(), "no process " << n);
        return *p;
    }
    [[nodiscard]] PartitionId part(std::string_view n) const { return *cfg.find_partition(n); }
    [[nodiscard]] const ProcessRec& proc(std::string_view n) const { return s.proc(pid(n)); }
    [[nodiscard]] ProcessState state_of(std::string_view n) const { return proc(n).state; }
    [[nodiscard]] std::string running() const {
        return s.current_process ? cfg.name(*s.current_process) : std::string("-");
    }

    /// `caller` is a process name or "main". The state is settled afterwards.
    Reply call(std::string_view caller, std::string service, std::vector<std::string> args = {}) {
        ServiceCall c{std::move(service), std::nullopt, std::move(args)};
        if (caller != "main") c.caller = pid(caller);
        auto r = invoke(s, c, toggles);
        s = sched::settle(r.state, toggles).new_state;
        return Reply{r.return_code, r.out_values, r.blocked.has_value()};
    }

    void tick(int n = 1) {
        for (int i = 0; i < n; ++i) s = sched::run_tick(s, toggles).new_state;
    }
    void until(Tick t) {
        while (s.clock_tick < t) tick();
    }

    [[nodiscard]] std::vector<int> violations() const { return check_invariants(s); }
};

/// P1 initialization: creates everything of P1, a handler if asked, starts
/// `hi` and switches to NORMAL. `hi` runs afterwards.
inline void boot_p1(World& w, bool handler = false) {
    for (const char* p : {"hi", "mid", "lo", "per"}) REQUIRE(w.call("main", "CREATE_PROCESS", {p}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_QUEUING_PORT", {"qo"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_SAMPLING_PORT", {"so"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_BUFFER", {"buf"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_BLACKBOARD", {"bb"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_SEMAPHORE", {"sem"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_EVENT", {"ev"}).rc == ReturnCode::NoError);
    if (handler) REQUIRE(w.call("main", "CREATE_ERROR_HANDLER").rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "START", {"hi"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "SET_PARTITION_MODE", {"NORMAL"}).rc == ReturnCode::NoError);
    REQUIRE(w.running() == "hi");
}

/// P2 initialization at its window: rx started, NORMAL.
inline void boot_p2(World& w) {
    w.until(6);
    REQUIRE(w.call("main", "CREATE_PROCESS", {"rx"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_QUEUING_PORT", {"qi"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "CREATE_SAMPLING_PORT", {"si"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "START", {"rx"}).rc == ReturnCode::NoError);
    REQUIRE(w.call("main", "SET_PARTITION_MODE", {"NORMAL"}).rc == ReturnCode::NoError);
}

}  // namespace testkit
