#include "a653/ipc.hpp"
#include "world.hpp"

using namespace a653;
using PS = ProcessState;
using RC = ReturnCode;
using testkit::World;

namespace {

MessageId msg_of(const testkit::Reply& r) { return static_cast<MessageId>(std::stoul(r.get("message"))); }

// every used message has exactly one exclusive home, or only a shared one
void check_conservation(const SystemState& s) {
    const auto c = ipc::census(s);
    for (MessageId m : s.used_messages.ids()) {
        const int homes = m < c.exclusive.size() ? c.exclusive[m] : 0;
        CHECK_MESSAGE((homes == 1 || (homes == 0 && c.shared.contains(m))), "message " << m << " homes=" << homes);
    }
}

}  // namespace

TEST_SUITE("ipc") {
    TEST_CASE("queuing messages wait in the source until the destination exists") {
        World w;
        testkit::boot_p1(w);
        const auto m1 = msg_of(w.call("hi", "SEND_QUEUING_MESSAGE", {"qo", "0"}));
        const auto m2 = msg_of(w.call("hi", "SEND_QUEUING_MESSAGE", {"qo", "0"}));
        CHECK(m1 == 1);
        CHECK(m2 == 2);
        const auto qo = *w.cfg.find_port("qo");
        const auto qi = *w.cfg.find_port("qi");
        CHECK(w.s.ports[qo.index()].queue.size() == 2);
        CHECK(w.call("hi", "SEND_QUEUING_MESSAGE", {"qo", "0"}).rc == RC::NotAvailable);
        check_conservation(w.s);

        testkit::boot_p2(w);
        // the destination holds one, the other stays at the source
        CHECK(w.s.ports[qi.index()].queue.size() == 1);
        CHECK(w.s.ports[qo.index()].queue.size() == 1);
        check_conservation(w.s);
        const auto r1 = w.call("rx", "RECEIVE_QUEUING_MESSAGE", {"qi", "0"});
        CHECK(r1.rc == RC::NoError);
        CHECK(msg_of(r1) == m1);
        CHECK(w.s.delivered_messages.contains(m1));
        const auto r2 = w.call("rx", "RECEIVE_QUEUING_MESSAGE", {"qi", "0"});
        CHECK(msg_of(r2) == m2);
        CHECK(w.call("rx", "RECEIVE_QUEUING_MESSAGE", {"qi", "0"}).rc == RC::NotAvailable);
        check_conservation(w.s);
        CHECK(w.violations().empty());
    }

    TEST_CASE("a blocked sender carries its message and is freed by the receiver") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"lo"});
        w.call("hi", "SEND_QUEUING_MESSAGE", {"qo", "0"});
        w.call("hi", "SEND_QUEUING_MESSAGE", {"qo", "0"});
        const auto r = w.call("hi", "SEND_QUEUING_MESSAGE", {"qo", "inf"});
        CHECK(r.blocked);
        CHECK(w.state_of("hi") == PS::Waiting);
        CHECK(w.running() == "lo");
        const auto m3 = msg_of(r);
        const auto qo = *w.cfg.find_port("qo");
        REQUIRE(w.s.ports[qo.index()].waiting.size() == 1);
        CHECK(w.s.ports[qo.index()].waiting[0].msg == m3);
        check_conservation(w.s);

        testkit::boot_p2(w);
        w.call("rx", "RECEIVE_QUEUING_MESSAGE", {"qi", "0"});
        // space opened at the source, so the carried message moved in
        CHECK(w.state_of("hi") == PS::Ready);
        CHECK(w.s.ports[qo.index()].waiting.empty());
        check_conservation(w.s);
        CHECK(w.violations().empty());
    }

    TEST_CASE("a blocked receiver is served by the next arrival") {
        World w;
        testkit::boot_p1(w);
        testkit::boot_p2(w);
        CHECK(w.call("rx", "RECEIVE_QUEUING_MESSAGE", {"qi", "inf"}).blocked);
        CHECK(w.state_of("rx") == PS::Waiting);
        w.until(10);
        const auto m = msg_of(w.call("hi", "SEND_QUEUING_MESSAGE", {"qo", "0"}));
        CHECK(w.state_of("rx") == PS::Ready);
        CHECK(w.s.delivered_messages.contains(m));
        check_conservation(w.s);
    }

    TEST_CASE("receive with a timeout times out") {
        World w;
        testkit::boot_p1(w);
        testkit::boot_p2(w);
        CHECK(w.call("rx", "RECEIVE_QUEUING_MESSAGE", {"qi", "2"}).blocked);
        w.tick(2);
        CHECK(w.state_of("rx") == PS::Running);
        const auto qi = *w.cfg.find_port("qi");
        CHECK(w.s.ports[qi.index()].waiting.empty());
    }

    TEST_CASE("direction and creation are checked") {
        World w;
        testkit::boot_p1(w);
        CHECK(w.call("hi", "SEND_QUEUING_MESSAGE", {"qi", "0"}).rc == RC::InvalidParam);
        CHECK(w.call("hi", "RECEIVE_QUEUING_MESSAGE", {"qo", "0"}).rc == RC::InvalidMode);
        CHECK(w.call("hi", "READ_SAMPLING_MESSAGE", {"so"}).rc == RC::InvalidMode);
        CHECK(w.call("hi", "SEND_QUEUING_MESSAGE", {"nosuch", "0"}).rc == RC::InvalidParam);
    }

    TEST_CASE("sampling ports keep the latest message") {
        World w;
        testkit::boot_p1(w);
        const auto m1 = msg_of(w.call("hi", "WRITE_SAMPLING_MESSAGE", {"so"}));
        testkit::boot_p2(w);
        CHECK(w.call("rx", "READ_SAMPLING_MESSAGE", {"si"}).rc == RC::NotAvailable);
        w.until(10);
        const auto m2 = msg_of(w.call("hi", "WRITE_SAMPLING_MESSAGE", {"so"}));
        CHECK(w.s.delivered_messages.contains(m1));
        w.until(16);
        const auto r = w.call("rx", "READ_SAMPLING_MESSAGE", {"si"});
        CHECK(r.rc == RC::NoError);
        CHECK(msg_of(r) == m2);
        CHECK(r.get("written_at") == "10");
        CHECK(msg_of(w.call("rx", "READ_SAMPLING_MESSAGE", {"si"})) == m2);
        check_conservation(w.s);
    }

    TEST_CASE("buffers are FIFO and bounded") {
        World w;
        testkit::boot_p1(w);
        const auto m1 = msg_of(w.call("hi", "SEND_BUFFER", {"buf", "0"}));
        const auto m2 = msg_of(w.call("hi", "SEND_BUFFER", {"buf", "0"}));
        CHECK(w.call("hi", "SEND_BUFFER", {"buf", "0"}).rc == RC::NotAvailable);
        CHECK(w.call("hi", "GET_BUFFER_STATUS", {"buf"}).get("nb_message") == "2");
        CHECK(msg_of(w.call("hi", "RECEIVE_BUFFER", {"buf", "0"})) == m1);
        CHECK(msg_of(w.call("hi", "RECEIVE_BUFFER", {"buf", "0"})) == m2);
        CHECK(w.call("hi", "RECEIVE_BUFFER", {"buf", "0"}).rc == RC::NotAvailable);
        check_conservation(w.s);
    }

    TEST_CASE("buffer receive removes what it returns") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "SEND_BUFFER", {"buf", "0"});
        const auto b = *w.cfg.find_buffer("buf");
        const auto r = ipc::buffer_receive(w.s, b);
        REQUIRE(r.has_value());
        CHECK(r->first.buffers[b.index()]->queue.empty());
        CHECK(r->first.delivered_messages.contains(r->second));
        VariantToggles bad;
        bad.receive_buffer = Variant::AsWritten;
        const auto r2 = ipc::buffer_receive(w.s, b, bad);
        REQUIRE(r2.has_value());
        CHECK(r2->first.buffers[b.index()]->queue.size() == 1);
    }

    TEST_CASE("blackboards: display, read, clear") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"lo"});
        CHECK(w.call("hi", "READ_BLACKBOARD", {"bb", "0"}).rc == RC::NotAvailable);
        CHECK(w.call("hi", "READ_BLACKBOARD", {"bb", "inf"}).blocked);
        CHECK(w.running() == "lo");
        const auto m = msg_of(w.call("lo", "DISPLAY_BLACKBOARD", {"bb"}));
        CHECK(w.running() == "hi");
        CHECK(msg_of(w.call("hi", "READ_BLACKBOARD", {"bb", "0"})) == m);
        CHECK(w.call("hi", "GET_BLACKBOARD_STATUS", {"bb"}).get("empty_indicator") == "OCCUPIED");
        w.call("hi", "CLEAR_BLACKBOARD", {"bb"});
        CHECK(w.call("hi", "GET_BLACKBOARD_STATUS", {"bb"}).get("empty_indicator") == "EMPTY");
        CHECK(w.s.delivered_messages.contains(m));
        check_conservation(w.s);
    }

    TEST_CASE("semaphores count up to their maximum") {
        World w;
        testkit::boot_p1(w);
        const auto sem = *w.cfg.find_semaphore("sem");
        CHECK_FALSE(ipc::semaphore_wait(w.s, sem).has_value());
        CHECK(w.call("hi", "WAIT_SEMAPHORE", {"sem", "0"}).rc == RC::NotAvailable);
        CHECK(w.call("hi", "SIGNAL_SEMAPHORE", {"sem"}).rc == RC::NoError);
        CHECK(w.call("hi", "SIGNAL_SEMAPHORE", {"sem"}).rc == RC::NoError);
        CHECK(w.call("hi", "SIGNAL_SEMAPHORE", {"sem"}).rc == RC::NoAction);
        CHECK_FALSE(ipc::semaphore_signal(w.s, sem).has_value());
        CHECK(w.call("hi", "GET_SEMAPHORE_STATUS", {"sem"}).get("current_value") == "2");
        CHECK(w.call("hi", "WAIT_SEMAPHORE", {"sem", "0"}).rc == RC::NoError);
        CHECK(w.s.semaphores[sem.index()]->value == 1);
    }

    TEST_CASE("semaphore signal wakes the waiter instead of counting") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"lo"});
        CHECK(w.call("hi", "WAIT_SEMAPHORE", {"sem", "inf"}).blocked);
        CHECK(w.running() == "lo");
        w.call("lo", "SIGNAL_SEMAPHORE", {"sem"});
        CHECK(w.running() == "hi");
        CHECK(w.s.semaphores[w.cfg.find_semaphore("sem")->index()]->value == 0);
    }

    TEST_CASE("events release every waiter") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "START", {"mid"});
        w.call("hi", "START", {"lo"});
        CHECK(w.call("hi", "WAIT_EVENT", {"ev", "inf"}).blocked);
        CHECK(w.call("mid", "WAIT_EVENT", {"ev", "inf"}).blocked);
        CHECK(w.running() == "lo");
        w.call("lo", "SET_EVENT", {"ev"});
        CHECK(w.state_of("mid") == PS::Ready);
        CHECK(w.running() == "hi");
        CHECK(w.call("hi", "WAIT_EVENT", {"ev", "0"}).rc == RC::NoError);
        w.call("hi", "RESET_EVENT", {"ev"});
        CHECK(w.call("hi", "WAIT_EVENT", {"ev", "0"}).rc == RC::NotAvailable);
    }

    TEST_CASE("blocking is refused while holding the preemption lock") {
        World w;
        testkit::boot_p1(w);
        w.call("hi", "LOCK_PREEMPTION");
        CHECK(w.call("hi", "RECEIVE_BUFFER", {"buf", "inf"}).rc == RC::InvalidMode);
        CHECK(w.call("hi", "RECEIVE_BUFFER", {"buf", "0"}).rc == RC::NotAvailable);
    }

    TEST_CASE("pool exhaustion is a configuration error") {
        World w(std::string(testkit::kTwoParts) + "messages = 1\n");
        testkit::boot_p1(w);
        CHECK(w.call("hi", "SEND_BUFFER", {"buf", "0"}).rc == RC::NoError);
        CHECK(w.call("hi", "SEND_BUFFER", {"buf", "0"}).rc == RC::InvalidConfig);
    }
}
