#include <algorithm>

#include "world.hpp"

using namespace a653;
using PS = ProcessState;
using PM = PartitionMode;
using testkit::World;

namespace {

bool has(const std::vector<int>& v, int n) { return std::find(v.begin(), v.end(), n) != v.end(); }

}  // namespace

TEST_SUITE("invariants") {
    TEST_CASE("every description is present") {
        for (int n = 1; n <= kConservation; ++n) CHECK(invariant_description(n) != "?");
        CHECK(invariant_description(0) == "?");
        CHECK(invariant_description(kConservation + 1) == "?");
    }

    TEST_CASE("a booted system satisfies everything") {
        World w;
        testkit::boot_p1(w, true);
        testkit::boot_p2(w);
        CHECK(w.violations().empty());
        CHECK(validate(w.s));
    }

    TEST_CASE("two running processes") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"mid"});
        auto s = w.s;
        s.proc(w.pid("mid")).state = PS::Running;
        const auto v = check_invariants(s);
        CHECK(has(v, 6));
        CHECK_FALSE(check_invariant(s, 6));
        CHECK(check_invariant(s, 1));
    }

    TEST_CASE("ready process in a cold partition") {
        World w;
        w.call("main", "CREATE_PROCESS", {"hi"});
        auto s = w.s;
        s.proc(w.pid("hi")).state = PS::Ready;
        const auto v = check_invariants(s);
        CHECK(has(v, 2));
        CHECK(has(v, 3));
    }

    TEST_CASE("lock level rules") {
        World w;
        auto s = w.s;
        s.part(w.part("P1")).lock_level = 0;
        CHECK(has(check_invariants(s), 7));
        CHECK(has(check_invariants(s), 10));
        testkit::boot_p1(w);
        s = w.s;
        s.part(w.part("P1")).lock_holder = w.pid("hi");
        CHECK(has(check_invariants(s), 9));
    }

    TEST_CASE("current partition may not be idle") {
        World w;
        auto s = w.s;
        s.part(w.part("P1")).mode = PM::Idle;
        CHECK(has(check_invariants(s), 12));
    }

    TEST_CASE("object bounds") {
        World w;
        testkit::boot_p1(w);
        auto s = w.s;
        auto& q = s.ports[w.cfg.find_port("qo")->index()].queue;
        for (MessageId m = 1; m <= 3; ++m) {
            q.push_back({m, 0});
            s.used_messages.insert(m);
        }
        CHECK(check_invariants(s) == std::vector<int>{18});

        s = w.s;
        s.semaphores[w.cfg.find_semaphore("sem")->index()]->value = 3;
        CHECK(check_invariants(s) == std::vector<int>{22});

        s = w.s;
        s.blackboards[w.cfg.find_blackboard("bb")->index()]->indicator = BlackboardIndicator::Occupied;
        CHECK(has(check_invariants(s), 21));
    }

    TEST_CASE("handler priority") {
        World w;
        testkit::boot_p1(w, true);
        auto s = w.s;
        s.proc(*s.part(w.part("P1")).error_handler).base_priority = 1;
        s.proc(*s.part(w.part("P1")).error_handler).current_priority = 1;
        CHECK(has(check_invariants(s), 25));
    }

    TEST_CASE("a message that vanished breaks conservation") {
        World w;
        testkit::boot_p1(w);
        auto s = w.s;
        s.used_messages.insert(5);
        CHECK(check_invariants(s) == std::vector<int>{kConservation});
        s = w.s;
        w.call("hi", "SEND_BUFFER", {"buf", "0"});
        s = w.s;
        s.delivered_messages.insert(1);
        CHECK(has(check_invariants(s), kConservation));
    }

    TEST_CASE("waiters must be waiting") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"lo"});
        w.call("hi", "WAIT_SEMAPHORE", {"sem", "inf"});
        auto s = w.s;
        s.proc(w.pid("hi")).state = PS::Ready;
        CHECK(has(check_invariants(s), 24));
    }
}
