#include "a653/state.hpp"

#include <sstream>

#include "a653/invariants.hpp"

namespace a653 {

bool is_process_queue(WaitKind k) {
    switch (k) {
        case WaitKind::QueuingPort:
        case WaitKind::Buffer:
        case WaitKind::Blackboard:
        case WaitKind::Semaphore:
        case WaitKind::Event:
            return true;
        default:
            return false;
    }
}

std::optional<Tick> ProcessRec::next_release() const {
    if (!period || !release_point) return std::nullopt;
    return *release_point + *period;
}

std::vector<MessageId> MessageSet::ids() const {
    std::vector<MessageId> out;
    for (MessageId m = 1; m <= 64; ++m) {
        if (contains(m)) out.push_back(m);
    }
    return out;
}

std::vector<ProcessId> SystemState::processes_of(PartitionId part) const {
    std::vector<ProcessId> out;
    for (std::size_t i = 0; i < processes.size(); ++i) {
        if (processes[i] && processes[i]->partition == part) out.push_back(ProcessId{i});
    }
    return out;
}

std::optional<MessageId> SystemState::fresh_message() const {
    for (MessageId m = 1; m <= config->message_pool; ++m) {
        if (!used_messages.contains(m)) return m;
    }
    return std::nullopt;
}

namespace {

class Writer {
public:
    void u8(std::uint64_t v) { out_.push_back(static_cast<char>(v & 0xff)); }
    void u16(std::uint64_t v) {
        u8(v);
        u8(v >> 8);
    }
    void i64(std::int64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint64_t>(v) >> (8 * i));
    }
    void b(bool v) { u8(v ? 1 : 0); }
    template <class T>
    void opt(const std::optional<T>& v) {
        b(v.has_value());
        if (v) put(*v);
    }
    void put(Tick v) { i64(v); }
    void put(int v) { i64(v); }
    void put(MessageId v) { i64(v); }
    template <class Tag>
    void put(Id<Tag> v) {
        u16(v.value);
    }
    void put(const StoredMessage& m) {
        put(m.id);
        put(m.at);
    }
    void put(const Waiter& w) {
        put(w.proc);
        put(w.since);
        opt(w.msg);
    }
    void put(const ErrorStatus& e) {
        u8(static_cast<std::uint8_t>(e.code));
        opt(e.failed_process);
    }
    void put(const TimeoutEntry& t) {
        u8(static_cast<std::uint8_t>(t.target));
        put(t.at);
    }
    template <class T>
    void seq(const std::vector<T>& v) {
        u16(v.size());
        for (const auto& x : v) put(x);
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

}  // namespace

std::string SystemState::serialize() const {
    Writer w;
    w.put(clock_tick);
    w.b(need_reschedule);
    w.b(need_procresch);
    w.opt(current_partition);
    w.opt(current_process);
    w.b(module_shutdown);
    for (const auto& p : partitions) {
        w.u8(static_cast<std::uint8_t>(p.mode));
        w.put(p.lock_level);
        w.opt(p.lock_holder);
        w.opt(p.error_handler);
        w.opt(p.last_error);
    }
    for (const auto& op : processes) {
        w.b(op.has_value());
        if (!op) continue;
        const auto& p = *op;
        w.u8(static_cast<std::uint8_t>(p.state));
        w.put(p.current_priority);
        w.opt(p.deadline_time);
        w.opt(p.release_point);
        w.opt(p.delay_time);
        w.u8(static_cast<std::uint8_t>(p.start_kind));
        w.u8(static_cast<std::uint8_t>(p.wait.kind));
        w.u16(p.wait.object);
        w.put(p.ready_since);
        w.opt(p.preempted_process);
        w.put(p.creator_partition);
    }
    for (const auto& p : ports) {
        w.b(p.created);
        w.opt(p.msgspace);
        w.seq(p.queue);
        w.seq(p.waiting);
    }
    for (const auto& b : buffers) {
        w.b(b.has_value());
        if (!b) continue;
        w.seq(b->queue);
        w.seq(b->waiting);
    }
    for (const auto& b : blackboards) {
        w.b(b.has_value());
        if (!b) continue;
        w.opt(b->msgspace);
        w.u8(static_cast<std::uint8_t>(b->indicator));
        w.seq(b->waiting);
    }
    for (const auto& m : semaphores) {
        w.b(m.has_value());
        if (!m) continue;
        w.put(m->value);
        w.seq(m->waiting);
    }
    for (const auto& e : events) {
        w.b(e.has_value());
        if (!e) continue;
        w.u8(static_cast<std::uint8_t>(e->flag));
        w.seq(e->waiting);
    }
    w.i64(static_cast<std::int64_t>(used_messages.bits()));
    w.i64(static_cast<std::int64_t>(delivered_messages.bits()));
    for (const auto& t : timeout_trigger) w.opt(t);
    return w.take();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t SystemState::digest() const { return fnv1a64(serialize()); }

bool operator==(const SystemState& a, const SystemState& b) {
    return a.config == b.config && a.serialize() == b.serialize();
}

namespace {

std::string waiters(const ScenarioConfig& c, const std::vector<Waiter>& ws) {
    std::string out = "[";
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (i) out += ",";
        out += c.name(ws[i].proc) + "@" + std::to_string(ws[i].since);
        if (ws[i].msg) out += "/m" + std::to_string(*ws[i].msg);
    }
    return out + "]";
}

std::string messages(const std::vector<StoredMessage>& q) {
    std::string out = "[";
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (i) out += ",";
        out += "m" + std::to_string(q[i].id) + "@" + std::to_string(q[i].at);
    }
    return out + "]";
}

std::string message_set(const MessageSet& m) {
    std::string out = "{";
    bool first = true;
    for (auto id : m.ids()) {
        if (!first) out += ",";
        first = false;
        out += "m" + std::to_string(id);
    }
    return out + "}";
}

}  // namespace

std::string SystemState::describe() const {
    const auto& c = *config;
    std::ostringstream o;
    o << "clock=" << clock_tick << " need_reschedule=" << need_reschedule << " need_procresch=" << need_procresch
      << " current_partition=" << (current_partition ? c.name(*current_partition) : "-")
      << " current_process=" << (current_process ? c.name(*current_process) : "-")
      << " module_shutdown=" << module_shutdown << "\n";
    for (const auto& p : partitions) {
        o << "partition " << c.name(p.id) << " mode=" << to_string(p.mode) << " lock=" << p.lock_level
          << " holder=" << (p.lock_holder ? c.name(*p.lock_holder) : "-")
          << " handler=" << (p.error_handler ? c.name(*p.error_handler) : "-") << "\n";
    }
    for (const auto& op : processes) {
        if (!op) continue;
        const auto& p = *op;
        o << "process " << c.name(p.id) << " state=" << to_string(p.state) << " prio=" << p.current_priority
          << " deadline=" << (p.deadline_time ? std::to_string(*p.deadline_time) : "-")
          << " release=" << (p.release_point ? std::to_string(*p.release_point) : "-")
          << " delay=" << (p.delay_time ? std::to_string(*p.delay_time) : "-")
          << " wait=" << static_cast<int>(p.wait.kind) << "/" << p.wait.object;
        const auto& t = timeout_trigger[p.id.index()];
        if (t) o << " timeout=" << to_string(t->target) << "@" << t->at;
        o << "\n";
    }
    for (const auto& p : ports) {
        const auto& pc = c.ports[p.id.index()];
        o << "port " << pc.name << " created=" << p.created;
        if (pc.kind == PortKind::Sampling) {
            o << " msgspace=" << (p.msgspace ? "m" + std::to_string(p.msgspace->id) : "-");
        } else {
            o << " queue=" << messages(p.queue) << " waiting=" << waiters(c, p.waiting);
        }
        o << "\n";
    }
    for (const auto& b : buffers) {
        if (b) o << "buffer " << c.name(b->id) << " queue=" << messages(b->queue) << " waiting=" << waiters(c, b->waiting) << "\n";
    }
    for (const auto& b : blackboards) {
        if (b) {
            o << "blackboard " << c.name(b->id) << " msg=" << (b->msgspace ? "m" + std::to_string(*b->msgspace) : "-")
              << " waiting=" << waiters(c, b->waiting) << "\n";
        }
    }
    for (const auto& m : semaphores) {
        if (m) o << "semaphore " << c.name(m->id) << " value=" << m->value << " waiting=" << waiters(c, m->waiting) << "\n";
    }
    for (const auto& e : events) {
        if (e) {
            o << "event " << c.name(e->id) << " flag=" << (e->flag == EventFlag::Up ? "UP" : "DOWN")
              << " waiting=" << waiters(c, e->waiting) << "\n";
        }
    }
    o << "used=" << message_set(used_messages) << " delivered=" << message_set(delivered_messages) << "\n";
    return o.str();
}

SystemState new_state(std::shared_ptr<const ScenarioConfig> config) {
    validate_config(*config);
    SystemState s;
    s.config = std::move(config);
    const auto& c = *s.config;
    s.tick_len = c.tick_len;
    for (std::size_t i = 0; i < c.partitions.size(); ++i) {
        PartitionRec p;
        p.id = PartitionId{i};
        s.partitions.push_back(p);
    }
    s.processes.resize(c.processes.size());
    s.timeout_trigger.resize(c.processes.size());
    for (std::size_t i = 0; i < c.ports.size(); ++i) {
        PortRec p;
        p.id = PortId{i};
        s.ports.push_back(p);
    }
    s.buffers.resize(c.buffers.size());
    s.blackboards.resize(c.blackboards.size());
    s.semaphores.resize(c.semaphores.size());
    s.events.resize(c.events.size());
    return s;
}

SystemState new_state(const ScenarioConfig& config) {
    return new_state(std::make_shared<const ScenarioConfig>(config));
}

bool validate(const SystemState& s) { return check_invariants(s).empty(); }

}  // namespace a653
