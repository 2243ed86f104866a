#include "a653/services.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "a653/errors.hpp"
#include "a653/health.hpp"
#include "a653/ipc.hpp"
#include "a653/kernel.hpp"
#include "a653/scheduler.hpp"

namespace a653 {

const std::vector<ServiceInfo>& service_catalog() {
    using A = ArgKind;
    using G = ServiceGroup;
    static const std::vector<ServiceInfo> catalog{
        // partition management
        {"GET_PARTITION_STATUS", G::Partition, {}},
        {"SET_PARTITION_MODE", G::Partition, {A::Mode}},
        // process management
        {"CREATE_PROCESS", G::Process, {A::Process}},
        {"SET_PRIORITY", G::Process, {A::Process, A::Priority}},
        {"SUSPEND_SELF", G::Process, {A::Timeout}},
        {"SUSPEND", G::Process, {A::Process}},
        {"RESUME", G::Process, {A::Process}},
        {"STOP_SELF", G::Process, {}},
        {"STOP", G::Process, {A::Process}},
        {"START", G::Process, {A::Process}},
        {"DELAYED_START", G::Process, {A::Process, A::Delay}},
        {"LOCK_PREEMPTION", G::Process, {}},
        {"UNLOCK_PREEMPTION", G::Process, {}},
        {"GET_MY_ID", G::Process, {}},
        {"GET_PROCESS_ID", G::Process, {A::Process}},
        {"GET_PROCESS_STATUS", G::Process, {A::Process}},
        // time management
        {"TIMED_WAIT", G::Time, {A::Delay}},
        {"PERIODIC_WAIT", G::Time, {}},
        {"GET_TIME", G::Time, {}},
        {"REPLENISH", G::Time, {A::Delay}},
        // inter-partition communication
        {"CREATE_SAMPLING_PORT", G::InterPartition, {A::SamplingPort}},
        {"WRITE_SAMPLING_MESSAGE", G::InterPartition, {A::SamplingPort}},
        {"READ_SAMPLING_MESSAGE", G::InterPartition, {A::SamplingPort}},
        {"GET_SAMPLING_PORT_ID", G::InterPartition, {A::SamplingPort}},
        {"GET_SAMPLING_PORT_STATUS", G::InterPartition, {A::SamplingPort}},
        {"CREATE_QUEUING_PORT", G::InterPartition, {A::QueuingPort}},
        {"SEND_QUEUING_MESSAGE", G::InterPartition, {A::QueuingPort, A::Timeout}},
        {"RECEIVE_QUEUING_MESSAGE", G::InterPartition, {A::QueuingPort, A::Timeout}},
        {"GET_QUEUING_PORT_ID", G::InterPartition, {A::QueuingPort}},
        {"GET_QUEUING_PORT_STATUS", G::InterPartition, {A::QueuingPort}},
        {"CLEAR_QUEUING_PORT", G::InterPartition, {A::QueuingPort}},
        // intra-partition communication
        {"CREATE_BUFFER", G::IntraPartition, {A::Buffer}},
        {"SEND_BUFFER", G::IntraPartition, {A::Buffer, A::Timeout}},
        {"RECEIVE_BUFFER", G::IntraPartition, {A::Buffer, A::Timeout}},
        {"GET_BUFFER_ID", G::IntraPartition, {A::Buffer}},
        {"GET_BUFFER_STATUS", G::IntraPartition, {A::Buffer}},
        {"CREATE_BLACKBOARD", G::IntraPartition, {A::Blackboard}},
        {"DISPLAY_BLACKBOARD", G::IntraPartition, {A::Blackboard}},
        {"READ_BLACKBOARD", G::IntraPartition, {A::Blackboard, A::Timeout}},
        {"CLEAR_BLACKBOARD", G::IntraPartition, {A::Blackboard}},
        {"GET_BLACKBOARD_ID", G::IntraPartition, {A::Blackboard}},
        {"GET_BLACKBOARD_STATUS", G::IntraPartition, {A::Blackboard}},
        {"CREATE_SEMAPHORE", G::IntraPartition, {A::Semaphore}},
        {"WAIT_SEMAPHORE", G::IntraPartition, {A::Semaphore, A::Timeout}},
        {"SIGNAL_SEMAPHORE", G::IntraPartition, {A::Semaphore}},
        {"GET_SEMAPHORE_ID", G::IntraPartition, {A::Semaphore}},
        {"GET_SEMAPHORE_STATUS", G::IntraPartition, {A::Semaphore}},
        {"CREATE_EVENT", G::IntraPartition, {A::Event}},
        {"SET_EVENT", G::IntraPartition, {A::Event}},
        {"RESET_EVENT", G::IntraPartition, {A::Event}},
        {"WAIT_EVENT", G::IntraPartition, {A::Event, A::Timeout}},
        {"GET_EVENT_ID", G::IntraPartition, {A::Event}},
        {"GET_EVENT_STATUS", G::IntraPartition, {A::Event}},
        // health monitoring
        {"REPORT_APPLICATION_MESSAGE", G::Health, {}},
        {"CREATE_ERROR_HANDLER", G::Health, {}},
        {"GET_ERROR_STATUS", G::Health, {}},
        {"RAISE_APPLICATION_ERROR", G::Health, {A::ErrorCode}},
    };
    return catalog;
}

const ServiceInfo* find_service(std::string_view name) {
    for (const auto& s : service_catalog()) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

bool caller_valid(const SystemState& s, const std::optional<ProcessId>& caller) {
    if (caller) {
        return s.has_process(*caller) && s.proc(*caller).state == ProcessState::Running && s.current_process == caller;
    }
    return s.current_partition && is_start_mode(s.part(*s.current_partition).mode);
}

bool current_process_flag(const SystemState& s, const ServiceCall& call) {
    const auto* info = find_service(call.service);
    if (info == nullptr || !call.caller || info->args.empty() || info->args.front() != ArgKind::Process) return false;
    if (call.args.empty()) return false;
    return s.cfg().find_process(call.args.front()) == call.caller;
}

std::string describe_call(const ScenarioConfig& cfg, const ServiceCall& call) {
    std::string out = call.caller ? cfg.name(*call.caller) : std::string("main");
    out += ":" + call.service + "(";
    for (std::size_t i = 0; i < call.args.size(); ++i) {
        if (i > 0) out += ",";
        out += call.args[i];
    }
    return out + ")";
}

namespace {

using RC = ReturnCode;
using PS = ProcessState;

std::optional<Tick> natural(std::string_view s) {
    Tick v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || v < 0) return std::nullopt;
    return v;
}

std::string opt_tick(const std::optional<Tick>& t) { return t ? std::to_string(*t) : std::string("inf"); }

/// One invocation in flight. Error returns leave `in` untouched; the normal
/// part mutates `out` through `ctx`.
class Svc {
public:
    Svc(const SystemState& in, const ServiceCall& call, VariantToggles toggles)
        : in(in), call(call), out(in), ctx{out, log, toggles, true} {
        self = call.caller;
        part = self ? in.proc(*self).partition : *in.current_partition;
    }

    const SystemState& in;
    const ServiceCall& call;
    SystemState out;
    StepLog log;
    Ctx ctx;
    std::optional<ProcessId> self;
    PartitionId part;
    std::vector<std::pair<std::string, std::string>> outs;
    std::optional<PendingCall> blocked;

    const ScenarioConfig& cfg() const { return in.cfg(); }
    const std::string& arg(std::size_t i) const { return call.args[i]; }
    PartitionMode mode() const { return in.part(part).mode; }
    bool start_mode() const { return is_start_mode(mode()); }
    bool is_handler() const { return self && in.proc(*self).is_error_handler; }

    void put(std::string k, std::string v) { outs.emplace_back(std::move(k), std::move(v)); }

    ServiceResult err(RC rc) {
        StepLog elog;
        elog.trace.push_back({in.clock_tick, "service", part, self, call.service + " -> " + std::string(to_string(rc))});
        return ServiceResult{in, rc, {}, std::nullopt, std::move(elog)};
    }

    ServiceResult done(RC rc = RC::NoError) {
        ctx.trace("service", part, self, call.service + " -> " + std::string(to_string(rc)));
        return ServiceResult{std::move(out), rc, std::move(outs), std::move(blocked), std::move(log)};
    }

    /// Created, addressable process of the caller's partition.
    std::optional<ProcessId> target(std::size_t i) const {
        const auto p = cfg().find_process(arg(i));
        if (!p || cfg().processes[p->index()].is_error_handler) return std::nullopt;
        if (cfg().processes[p->index()].partition != part || !in.has_process(*p)) return std::nullopt;
        return p;
    }

    template <class IdT, class Table>
    std::optional<IdT> object(const Table& table, std::size_t i) const {
        for (std::size_t k = 0; k < table.size(); ++k) {
            if (table[k].name == arg(i)) {
                if (table[k].partition != part) return std::nullopt;
                return IdT{k};
            }
        }
        return std::nullopt;
    }

    std::optional<PortId> port(std::size_t i, PortKind kind) const {
        const auto p = object<PortId>(cfg().ports, i);
        if (!p || cfg().ports[p->index()].kind != kind) return std::nullopt;
        return p;
    }

    /// Whether the caller may block with a nonzero timeout.
    bool may_block() const { return self && !is_handler() && in.part(part).lock_level == 0; }

    /// Error checks shared by every blocking path once the resource turned
    /// out to be unavailable.
    std::optional<RC> block_check(const std::optional<Tick>& timeout) const {
        if (timeout && *timeout == 0) return RC::NotAvailable;
        if (!may_block()) return RC::InvalidMode;
        return std::nullopt;
    }

    void block_on(WaitKind kind, std::uint16_t object, const std::optional<Tick>& timeout) {
        sched::detail::block(ctx, *self, {kind, object}, timeout);
        blocked = PendingCall{call.service, *self, timeout ? std::optional<Tick>(in.clock_tick + *timeout) : std::nullopt};
    }

    Waiter waiter(std::optional<MessageId> msg = std::nullopt) const { return Waiter{*self, in.clock_tick, msg}; }
};

using Handler = std::function<ServiceResult(Svc&)>;

// ---- partition management

ServiceResult get_partition_status(Svc& v) {
    const auto& pr = v.in.part(v.part);
    v.put("identifier", v.cfg().name(v.part));
    v.put("period", std::to_string(v.cfg().partitions[v.part.index()].period));
    v.put("operating_mode", std::string(to_string(pr.mode)));
    v.put("lock_level", std::to_string(pr.lock_level));
    return v.done();
}

ServiceResult set_partition_mode(Svc& v) {
    const auto m = parse_partition_mode(v.arg(0));
    if (!m) return v.err(RC::InvalidParam);
    const auto cur = v.mode();
    if (*m == PartitionMode::Normal && cur == PartitionMode::Normal) return v.err(RC::NoAction);
    if (*m == PartitionMode::WarmStart && cur == PartitionMode::ColdStart) return v.err(RC::InvalidMode);
    if (*m == PartitionMode::Normal && v.in.processes_of(v.part).empty()) return v.err(RC::InvalidMode);
    if (!kernel::mode_transition_allowed(cur, *m)) return v.err(RC::InvalidMode);
    kernel::detail::apply_partition_mode(v.ctx, v.part, *m);
    if (*m == PartitionMode::Idle) v.out.need_reschedule = true;
    return v.done();
}

// ---- process management

ServiceResult create_process(Svc& v) {
    if (!v.start_mode()) return v.err(RC::InvalidMode);
    const auto p = v.cfg().find_process(v.arg(0));
    if (!p || v.cfg().processes[p->index()].is_error_handler || v.cfg().processes[p->index()].partition != v.part) {
        return v.err(RC::InvalidConfig);
    }
    if (v.in.has_process(*p)) return v.err(RC::NoAction);
    kernel::detail::add_process(v.out, v.part, *p);
    v.put("process_id", std::to_string(p->value));
    return v.done();
}

ServiceResult set_priority(Svc& v) {
    const auto p = v.target(0);
    if (!p) return v.err(RC::InvalidParam);
    const auto prio = natural(v.arg(1));
    if (!prio || *prio < v.cfg().min_priority || *prio > v.cfg().max_priority) return v.err(RC::InvalidParam);
    if (v.in.proc(*p).state == PS::Dormant) return v.err(RC::InvalidMode);
    auto& rec = v.out.proc(*p);
    rec.current_priority = static_cast<int>(*prio);
    rec.ready_since = v.in.clock_tick;
    v.out.need_procresch = true;
    return v.done();
}

ServiceResult suspend_self(Svc& v) {
    const auto t = parse_timeout(v.arg(0));
    if (!t) return v.err(RC::InvalidParam);
    if (!v.self || v.is_handler() || v.in.part(v.part).lock_level > 0) return v.err(RC::InvalidMode);
    if (v.in.proc(*v.self).periodic()) return v.err(RC::InvalidMode);
    if (*t && **t == 0) return v.done();
    set_process_state(v.ctx, *v.self, PS::Suspend, Trigger::SuspendSelf);
    if (*t) v.out.timeout_trigger[v.self->index()] = TimeoutEntry{PS::Ready, v.in.clock_tick + **t};
    v.blocked = PendingCall{v.call.service, *v.self,
                            *t ? std::optional<Tick>(v.in.clock_tick + **t) : std::nullopt};
    return v.done();
}

ServiceResult suspend(Svc& v) {
    const auto p = v.target(0);
    if (!p || p == v.self) return v.err(RC::InvalidParam);
    const auto& rec = v.in.proc(*p);
    if (rec.periodic()) return v.err(RC::InvalidMode);
    if (rec.state == PS::Dormant) return v.err(RC::InvalidMode);
    if (rec.state == PS::Suspend || rec.state == PS::WaitandSuspend) return v.err(RC::NoAction);
    set_process_state(v.ctx, *p, rec.state == PS::Waiting ? PS::WaitandSuspend : PS::Suspend, Trigger::Suspend);
    return v.done();
}

ServiceResult resume(Svc& v) {
    const auto p = v.target(0);
    if (!p || p == v.self) return v.err(RC::InvalidParam);
    const auto& rec = v.in.proc(*p);
    if (rec.periodic()) return v.err(RC::InvalidMode);
    if (rec.state == PS::Dormant) return v.err(RC::InvalidMode);
    if (rec.state != PS::Suspend && rec.state != PS::WaitandSuspend) return v.err(RC::NoAction);
    if (rec.state == PS::Suspend) {
        v.out.timeout_trigger[p->index()].reset();
        set_process_state(v.ctx, *p, PS::Ready, Trigger::Resume);
        return v.done();
    }
    // WaitandSuspend: the suspension ends, the wait may or may not
    const bool process_queue = is_process_queue(rec.wait.kind) || rec.wait.kind == WaitKind::TimedWait;
    if (v.mode() == PartitionMode::Normal && !process_queue && v.ctx.toggles.resume == Variant::AsWritten) {
        // the service text readies anything not on a process queue or timed wait
        auto& w = v.out.proc(*p);
        w.wait = {};
        v.out.timeout_trigger[p->index()].reset();
        set_process_state(v.ctx, *p, PS::Ready, Trigger::Resume);
        return v.done();
    }
    set_process_state(v.ctx, *p, PS::Waiting, Trigger::Resume);
    return v.done();
}

ServiceResult stop_self(Svc& v) {
    if (!v.self) return v.err(RC::InvalidMode);
    auto& pr = v.out.part(v.part);
    if (pr.lock_holder == v.self) {
        pr.lock_level = 0;
        pr.lock_holder.reset();
    }
    sched::detail::make_dormant(v.ctx, *v.self, Trigger::StopSelf);
    v.out.need_procresch = true;
    return v.done();
}

ServiceResult stop(Svc& v) {
    const auto p = v.target(0);
    if (!p || p == v.self) return v.err(RC::InvalidParam);
    if (v.in.proc(*p).state == PS::Dormant) return v.err(RC::NoAction);
    auto& pr = v.out.part(v.part);
    const bool handler_victim = v.is_handler() && v.in.proc(*v.self).preempted_process == p;
    if (handler_victim || pr.lock_holder == p) {
        pr.lock_level = 0;
        pr.lock_holder.reset();
    }
    sched::detail::make_dormant(v.ctx, *p, Trigger::Stop);
    v.out.need_procresch = true;
    return v.done();
}

void start_common(Svc& v, ProcessId p, Tick delay, bool delayed) {
    auto& rec = v.out.proc(p);
    rec.current_priority = rec.base_priority;
    rec.start_kind = delayed ? StartKind::Delayed : StartKind::Normal;
    rec.delay_time = delay;
    const Trigger trig = rec.periodic() ? (delayed ? Trigger::DelayedStartPeriodic : Trigger::StartPeriodic)
                                        : (delayed ? Trigger::DelayedStartAperiodic : Trigger::StartAperiodic);
    const Tick now = v.in.clock_tick;
    if (v.start_mode()) {
        rec.wait = {WaitKind::PartitionStart, 0};
        set_process_state(v.ctx, p, PS::Waiting, trig);
        return;
    }
    if (rec.periodic()) {
        rec.wait = {WaitKind::ReleasePoint, 0};
        sched::detail::apply_start_periodic_timing(v.out, p, delay);
        set_process_state(v.ctx, p, PS::Waiting, trig);
        return;
    }
    if (delay > 0) {
        rec.wait = {WaitKind::Delay, 0};
        v.out.timeout_trigger[p.index()] = TimeoutEntry{PS::Ready, now + delay};
        if (rec.time_capacity) rec.deadline_time = now + delay + *rec.time_capacity;
        set_process_state(v.ctx, p, PS::Waiting, trig);
        return;
    }
    if (rec.time_capacity) rec.deadline_time = now + *rec.time_capacity;
    set_process_state(v.ctx, p, PS::Ready, trig);
}

ServiceResult start(Svc& v) {
    const auto p = v.target(0);
    if (!p) return v.err(RC::InvalidParam);
    if (v.in.proc(*p).state != PS::Dormant) return v.err(RC::NoAction);
    start_common(v, *p, 0, false);
    v.out.need_procresch = true;
    return v.done();
}

ServiceResult delayed_start(Svc& v) {
    const auto p = v.target(0);
    if (!p) return v.err(RC::InvalidParam);
    const auto d = natural(v.arg(1));
    if (!d) return v.err(RC::InvalidParam);
    const auto& rec = v.in.proc(*p);
    if (rec.periodic() && *d >= *rec.period) return v.err(RC::InvalidParam);
    if (rec.state != PS::Dormant) return v.err(RC::NoAction);
    start_common(v, *p, *d, true);
    v.out.need_procresch = true;
    return v.done();
}

ServiceResult lock_preemption(Svc& v) {
    if (!v.self || v.is_handler()) return v.err(RC::NoAction);
    const auto& pr = v.in.part(v.part);
    if (pr.lock_level >= v.cfg().max_lock_level) return v.err(RC::InvalidConfig);
    auto& o = v.out.part(v.part);
    ++o.lock_level;
    o.lock_holder = v.self;
    v.put("lock_level", std::to_string(o.lock_level));
    return v.done();
}

ServiceResult unlock_preemption(Svc& v) {
    if (!v.self || v.is_handler()) return v.err(RC::NoAction);
    if (v.in.part(v.part).lock_level == 0) return v.err(RC::NoAction);
    auto& o = v.out.part(v.part);
    if (--o.lock_level == 0) {
        o.lock_holder.reset();
        v.out.need_procresch = true;
    }
    v.put("lock_level", std::to_string(o.lock_level));
    return v.done();
}

ServiceResult get_my_id(Svc& v) {
    if (!v.self || v.is_handler()) return v.err(RC::InvalidMode);
    v.put("process_id", std::to_string(v.self->value));
    return v.done();
}

ServiceResult get_process_id(Svc& v) {
    const auto p = v.target(0);
    if (!p) return v.err(RC::InvalidConfig);
    v.put("process_id", std::to_string(p->value));
    return v.done();
}

ServiceResult get_process_status(Svc& v) {
    const auto p = v.target(0);
    if (!p) return v.err(RC::InvalidParam);
    const auto& rec = v.in.proc(*p);
    v.put("process_state", std::string(to_string(rec.state)));
    v.put("current_priority", std::to_string(rec.current_priority));
    v.put("base_priority", std::to_string(rec.base_priority));
    v.put("deadline_time", rec.deadline_time ? std::to_string(*rec.deadline_time) : std::string("-"));
    v.put("period", opt_tick(rec.period));
    v.put("time_capacity", opt_tick(rec.time_capacity));
    return v.done();
}

// ---- time management

ServiceResult timed_wait(Svc& v) {
    const auto d = natural(v.arg(0));
    if (!d) return v.err(RC::InvalidParam);
    if (!v.self || v.is_handler() || v.in.part(v.part).lock_level > 0) return v.err(RC::InvalidMode);
    sched::detail::apply_timed_wait(v.ctx, *v.self, *d);
    if (*d > 0) v.blocked = PendingCall{v.call.service, *v.self, v.in.clock_tick + *d};
    return v.done();
}

ServiceResult periodic_wait(Svc& v) {
    if (!v.self || v.is_handler() || v.in.part(v.part).lock_level > 0) return v.err(RC::InvalidMode);
    if (!v.in.proc(*v.self).periodic()) return v.err(RC::InvalidMode);
    sched::detail::apply_periodic_wait(v.ctx, *v.self);
    v.blocked = PendingCall{v.call.service, *v.self, v.out.proc(*v.self).release_point};
    return v.done();
}

ServiceResult get_time(Svc& v) {
    v.put("system_time", std::to_string(v.in.now()));
    return v.done();
}

ServiceResult replenish(Svc& v) {
    const auto b = natural(v.arg(0));
    if (!b) return v.err(RC::InvalidParam);
    if (!v.self) return v.err(RC::InvalidMode);
    const auto& rec = v.in.proc(*v.self);
    if (!rec.time_capacity) return v.done();
    const Tick deadline = v.in.clock_tick + *b;
    if (rec.periodic()) {
        const auto next = rec.next_release();
        if (next && deadline > *next) return v.err(RC::InvalidMode);
    }
    v.out.proc(*v.self).deadline_time = deadline;
    return v.done();
}

// ---- sampling ports

ServiceResult create_port(Svc& v, PortKind kind) {
    if (!v.start_mode()) return v.err(RC::InvalidMode);
    const auto p = v.port(0, kind);
    if (!p) return v.err(RC::InvalidConfig);
    if (v.in.ports[p->index()].created) return v.err(RC::NoAction);
    v.out.ports[p->index()].created = true;
    if (kind == PortKind::Queuing) ipc::detail::queuing_settle(v.ctx, *p);
    v.put("port_id", std::to_string(p->value));
    return v.done();
}

std::optional<PortId> created_port(Svc& v, PortKind kind) {
    const auto p = v.port(0, kind);
    if (!p || !v.in.ports[p->index()].created) return std::nullopt;
    return p;
}

ServiceResult write_sampling_message(Svc& v) {
    const auto p = created_port(v, PortKind::Sampling);
    if (!p) return v.err(RC::InvalidParam);
    if (v.cfg().ports[p->index()].direction != Direction::Source) return v.err(RC::InvalidMode);
    const auto m = v.in.fresh_message();
    if (!m) return v.err(RC::InvalidConfig);
    ipc::detail::sampling_write(v.ctx, *p, *m);
    v.put("message", std::to_string(*m));
    return v.done();
}

ServiceResult read_sampling_message(Svc& v) {
    const auto p = created_port(v, PortKind::Sampling);
    if (!p) return v.err(RC::InvalidParam);
    if (v.cfg().ports[p->index()].direction != Direction::Destination) return v.err(RC::InvalidMode);
    const auto& ms = v.in.ports[p->index()].msgspace;
    if (!ms) return v.err(RC::NotAvailable);
    v.put("message", std::to_string(ms->id));
    v.put("written_at", std::to_string(ms->at));
    return v.done();
}

ServiceResult get_port_id(Svc& v, PortKind kind) {
    const auto p = created_port(v, kind);
    if (!p) return v.err(RC::InvalidConfig);
    v.put("port_id", std::to_string(p->value));
    return v.done();
}

ServiceResult get_sampling_port_status(Svc& v) {
    const auto p = created_port(v, PortKind::Sampling);
    if (!p) return v.err(RC::InvalidParam);
    const auto& ms = v.in.ports[p->index()].msgspace;
    v.put("port_direction", std::string(to_string(v.cfg().ports[p->index()].direction)));
    v.put("last_msg", ms ? std::to_string(ms->id) : std::string("-"));
    return v.done();
}

// ---- queuing ports

ServiceResult send_queuing_message(Svc& v) {
    const auto p = created_port(v, PortKind::Queuing);
    if (!p) return v.err(RC::InvalidParam);
    const auto t = parse_timeout(v.arg(1));
    if (!t) return v.err(RC::InvalidParam);
    if (v.cfg().ports[p->index()].direction != Direction::Source) return v.err(RC::InvalidMode);
    const auto m = v.in.fresh_message();
    if (!m) return v.err(RC::InvalidConfig);
    const auto& rec = v.in.ports[p->index()];
    if (static_cast<int>(rec.queue.size()) < v.cfg().ports[p->index()].max_msg_num && rec.waiting.empty()) {
        ipc::detail::queuing_insert(v.ctx, *p, *m);
        v.put("message", std::to_string(*m));
        return v.done();
    }
    if (const auto e = v.block_check(*t)) return v.err(*e);
    v.out.used_messages.insert(*m);
    v.out.ports[p->index()].waiting.push_back(v.waiter(*m));
    v.block_on(WaitKind::QueuingPort, p->value, *t);
    v.put("message", std::to_string(*m));
    return v.done();
}

ServiceResult receive_queuing_message(Svc& v) {
    const auto p = created_port(v, PortKind::Queuing);
    if (!p) return v.err(RC::InvalidParam);
    const auto t = parse_timeout(v.arg(1));
    if (!t) return v.err(RC::InvalidParam);
    if (v.cfg().ports[p->index()].direction != Direction::Destination) return v.err(RC::InvalidMode);
    if (!v.in.ports[p->index()].queue.empty()) {
        const auto m = ipc::detail::queuing_take(v.ctx, *p);
        v.put("message", std::to_string(*m));
        return v.done();
    }
    if (const auto e = v.block_check(*t)) return v.err(*e);
    v.out.ports[p->index()].waiting.push_back(v.waiter());
    v.block_on(WaitKind::QueuingPort, p->value, *t);
    return v.done();
}

ServiceResult get_queuing_port_status(Svc& v) {
    const auto p = created_port(v, PortKind::Queuing);
    if (!p) return v.err(RC::InvalidParam);
    const auto& rec = v.in.ports[p->index()];
    v.put("nb_message", std::to_string(rec.queue.size()));
    v.put("max_nb_message", std::to_string(v.cfg().ports[p->index()].max_msg_num));
    v.put("port_direction", std::string(to_string(v.cfg().ports[p->index()].direction)));
    v.put("waiting_processes", std::to_string(rec.waiting.size()));
    return v.done();
}

ServiceResult clear_queuing_port(Svc& v) {
    const auto p = created_port(v, PortKind::Queuing);
    if (!p) return v.err(RC::InvalidParam);
    if (v.cfg().ports[p->index()].direction != Direction::Destination) return v.err(RC::InvalidMode);
    ipc::detail::queuing_clear(v.ctx, *p);
    return v.done();
}

// ---- buffers

template <class IdT, class Rec, class Table>
ServiceResult create_object(Svc& v, const Table& table, std::vector<std::optional<Rec>>& slots,
                            std::vector<std::optional<Rec>> const& before, const std::function<Rec(IdT)>& make) {
    if (!v.start_mode()) return v.err(RC::InvalidMode);
    const auto id = v.object<IdT>(table, 0);
    if (!id) return v.err(RC::InvalidConfig);
    if (before[id->index()]) return v.err(RC::NoAction);
    slots[id->index()] = make(*id);
    v.put("id", std::to_string(id->value));
    return v.done();
}

template <class IdT, class Table, class Slots>
std::optional<IdT> created(Svc& v, const Table& table, const Slots& slots) {
    const auto id = v.object<IdT>(table, 0);
    if (!id || !slots[id->index()]) return std::nullopt;
    return id;
}

ServiceResult get_object_id(Svc& v, bool exists, std::uint16_t id) {
    if (!exists) return v.err(RC::InvalidConfig);
    v.put("id", std::to_string(id));
    return v.done();
}

ServiceResult create_buffer(Svc& v) {
    return create_object<BufferId, BufferRec>(v, v.cfg().buffers, v.out.buffers, v.in.buffers, [&](BufferId id) {
        return BufferRec{id, v.part, {}, {}};
    });
}

ServiceResult send_buffer(Svc& v) {
    const auto b = created<BufferId>(v, v.cfg().buffers, v.in.buffers);
    if (!b) return v.err(RC::InvalidParam);
    const auto t = parse_timeout(v.arg(1));
    if (!t) return v.err(RC::InvalidParam);
    const auto m = v.in.fresh_message();
    if (!m) return v.err(RC::InvalidConfig);
    const auto& rec = *v.in.buffers[b->index()];
    const bool receivers = !rec.waiting.empty() && !rec.waiting.front().msg;
    const bool senders = !rec.waiting.empty() && rec.waiting.front().msg;
    const bool room = static_cast<int>(rec.queue.size()) < v.cfg().buffers[b->index()].max_msg_num;
    v.put("message", std::to_string(*m));
    if (receivers || (room && !senders)) {
        ipc::detail::buffer_put(v.ctx, *b, *m);
        return v.done();
    }
    if (const auto e = v.block_check(*t)) return v.err(*e);
    v.out.used_messages.insert(*m);
    v.out.buffers[b->index()]->waiting.push_back(v.waiter(*m));
    v.block_on(WaitKind::Buffer, b->value, *t);
    return v.done();
}

ServiceResult receive_buffer(Svc& v) {
    const auto b = created<BufferId>(v, v.cfg().buffers, v.in.buffers);
    if (!b) return v.err(RC::InvalidParam);
    const auto t = parse_timeout(v.arg(1));
    if (!t) return v.err(RC::InvalidParam);
    if (!v.in.buffers[b->index()]->queue.empty()) {
        const auto m = ipc::detail::buffer_take(v.ctx, *b);
        v.put("message", std::to_string(*m));
        return v.done();
    }
    if (const auto e = v.block_check(*t)) return v.err(*e);
    v.out.buffers[b->index()]->waiting.push_back(v.waiter());
    v.block_on(WaitKind::Buffer, b->value, *t);
    return v.done();
}

ServiceResult get_buffer_status(Svc& v) {
    const auto b = created<BufferId>(v, v.cfg().buffers, v.in.buffers);
    if (!b) return v.err(RC::InvalidParam);
    const auto& rec = *v.in.buffers[b->index()];
    v.put("nb_message", std::to_string(rec.queue.size()));
    v.put("max_nb_message", std::to_string(v.cfg().buffers[b->index()].max_msg_num));
    v.put("waiting_processes", std::to_string(rec.waiting.size()));
    return v.done();
}

// ---- blackboards

ServiceResult create_blackboard(Svc& v) {
    return create_object<BlackboardId, BlackboardRec>(v, v.cfg().blackboards, v.out.blackboards, v.in.blackboards,
                                                      [&](BlackboardId id) {
                                                          BlackboardRec r;
                                                          r.id = id;
                                                          r.partition = v.part;
                                                          return r;
                                                      });
}

ServiceResult display_blackboard(Svc& v) {
    const auto b = created<BlackboardId>(v, v.cfg().blackboards, v.in.blackboards);
    if (!b) return v.err(RC::InvalidParam);
    const auto m = v.in.fresh_message();
    if (!m) return v.err(RC::InvalidConfig);
    ipc::detail::blackboard_display(v.ctx, *b, *m);
    v.put("message", std::to_string(*m));
    return v.done();
}

ServiceResult read_blackboard(Svc& v) {
    const auto b = created<BlackboardId>(v, v.cfg().blackboards, v.in.blackboards);
    if (!b) return v.err(RC::InvalidParam);
    const auto t = parse_timeout(v.arg(1));
    if (!t) return v.err(RC::InvalidParam);
    const auto& rec = *v.in.blackboards[b->index()];
    if (rec.indicator == BlackboardIndicator::Occupied) {
        v.put("message", std::to_string(rec.msgspace.value_or(0)));
        return v.done();
    }
    if (const auto e = v.block_check(*t)) return v.err(*e);
    v.out.blackboards[b->index()]->waiting.push_back(v.waiter());
    v.block_on(WaitKind::Blackboard, b->value, *t);
    return v.done();
}

ServiceResult clear_blackboard(Svc& v) {
    const auto b = created<BlackboardId>(v, v.cfg().blackboards, v.in.blackboards);
    if (!b) return v.err(RC::InvalidParam);
    ipc::detail::blackboard_clear(v.ctx, *b);
    return v.done();
}

ServiceResult get_blackboard_status(Svc& v) {
    const auto b = created<BlackboardId>(v, v.cfg().blackboards, v.in.blackboards);
    if (!b) return v.err(RC::InvalidParam);
    const auto& rec = *v.in.blackboards[b->index()];
    v.put("empty_indicator", rec.indicator == BlackboardIndicator::Empty ? "EMPTY" : "OCCUPIED");
    v.put("waiting_processes", std::to_string(rec.waiting.size()));
    return v.done();
}

// ---- semaphores

ServiceResult create_semaphore(Svc& v) {
    return create_object<SemaphoreId, SemaphoreRec>(v, v.cfg().semaphores, v.out.semaphores, v.in.semaphores,
                                                    [&](SemaphoreId id) {
                                                        const auto& c = v.cfg().semaphores[id.index()];
                                                        return SemaphoreRec{id, v.part, c.initial, c.max_value, {}};
                                                    });
}

ServiceResult wait_semaphore(Svc& v) {
    const auto m = created<SemaphoreId>(v, v.cfg().semaphores, v.in.semaphores);
    if (!m) return v.err(RC::InvalidParam);
    const auto t = parse_timeout(v.arg(1));
    if (!t) return v.err(RC::InvalidParam);
    if (v.in.semaphores[m->index()]->value > 0) {
        --v.out.semaphores[m->index()]->value;
        v.ctx.note({NoteKind::SemaphoreWait, v.self.value_or(ProcessId{}), {}, {}, {}, {}, m->value, 0});
        return v.done();
    }
    if (const auto e = v.block_check(*t)) return v.err(*e);
    v.out.semaphores[m->index()]->waiting.push_back(v.waiter());
    v.block_on(WaitKind::Semaphore, m->value, *t);
    return v.done();
}

ServiceResult signal_semaphore(Svc& v) {
    const auto m = created<SemaphoreId>(v, v.cfg().semaphores, v.in.semaphores);
    if (!m) return v.err(RC::InvalidParam);
    const auto& rec = *v.in.semaphores[m->index()];
    if (rec.waiting.empty() && rec.value >= rec.max_value) return v.err(RC::NoAction);
    ipc::detail::semaphore_signal(v.ctx, *m);
    v.out.need_procresch = true;
    return v.done();
}

ServiceResult get_semaphore_status(Svc& v) {
    const auto m = created<SemaphoreId>(v, v.cfg().semaphores, v.in.semaphores);
    if (!m) return v.err(RC::InvalidParam);
    const auto& rec = *v.in.semaphores[m->index()];
    v.put("current_value", std::to_string(rec.value));
    v.put("maximum_value", std::to_string(rec.max_value));
    v.put("waiting_processes", std::to_string(rec.waiting.size()));
    return v.done();
}

// ---- events

ServiceResult create_event(Svc& v) {
    return create_object<EventObjId, EventObjRec>(v, v.cfg().events, v.out.events, v.in.events, [&](EventObjId id) {
        EventObjRec r;
        r.id = id;
        r.partition = v.part;
        return r;
    });
}

ServiceResult set_event(Svc& v) {
    const auto e = created<EventObjId>(v, v.cfg().events, v.in.events);
    if (!e) return v.err(RC::InvalidParam);
    ipc::detail::event_set(v.ctx, *e);
    return v.done();
}

ServiceResult reset_event(Svc& v) {
    const auto e = created<EventObjId>(v, v.cfg().events, v.in.events);
    if (!e) return v.err(RC::InvalidParam);
    v.out.events[e->index()]->flag = EventFlag::Down;
    v.ctx.note({NoteKind::EventReset, v.self.value_or(ProcessId{}), {}, {}, {}, {}, e->value, 0});
    return v.done();
}

ServiceResult wait_event(Svc& v) {
    const auto e = created<EventObjId>(v, v.cfg().events, v.in.events);
    if (!e) return v.err(RC::InvalidParam);
    const auto t = parse_timeout(v.arg(1));
    if (!t) return v.err(RC::InvalidParam);
    if (v.in.events[e->index()]->flag == EventFlag::Up) return v.done();
    if (const auto x = v.block_check(*t)) return v.err(*x);
    v.out.events[e->index()]->waiting.push_back(v.waiter());
    v.block_on(WaitKind::Event, e->value, *t);
    return v.done();
}

ServiceResult get_event_status(Svc& v) {
    const auto e = created<EventObjId>(v, v.cfg().events, v.in.events);
    if (!e) return v.err(RC::InvalidParam);
    const auto& rec = *v.in.events[e->index()];
    v.put("event_state", rec.flag == EventFlag::Up ? "UP" : "DOWN");
    v.put("waiting_processes", std::to_string(rec.waiting.size()));
    return v.done();
}

// ---- health monitoring

ServiceResult report_application_message(Svc& v) {
    v.ctx.trace("application_message", v.part, v.self);
    return v.done();
}

ServiceResult create_error_handler(Svc& v) {
    if (!v.start_mode()) return v.err(RC::InvalidMode);
    if (v.in.part(v.part).error_handler) return v.err(RC::NoAction);
    const ProcessId slot = v.cfg().error_handler_slot(v.part);
    kernel::detail::add_process(v.out, v.part, slot);
    v.out.part(v.part).error_handler = slot;
    return v.done();
}

ServiceResult get_error_status(Svc& v) {
    if (!v.is_handler()) return v.err(RC::InvalidConfig);
    const auto& le = v.in.part(v.part).last_error;
    if (!le) return v.err(RC::NoAction);
    v.put("error_code", std::string(to_string(le->code)));
    v.put("failed_process", le->failed_process ? v.cfg().name(*le->failed_process) : std::string("-"));
    v.out.part(v.part).last_error.reset();
    return v.done();
}

ServiceResult raise_application_error(Svc& v) {
    const auto code = parse_error_code(v.arg(0));
    if (!code || *code != ErrorCode::ApplicationError) return v.err(RC::InvalidParam);
    try {
        hm::detail::raise(v.ctx, *code, std::nullopt, hm::Source{v.self, v.part});
    } catch (const UnconfiguredError&) {
        v.ctx.trace("hm_unconfigured", v.part, v.self, "APPLICATION_ERROR");
    }
    return v.done();
}

const std::map<std::string_view, Handler>& handlers() {
    static const std::map<std::string_view, Handler> table{
        {"GET_PARTITION_STATUS", get_partition_status},
        {"SET_PARTITION_MODE", set_partition_mode},
        {"CREATE_PROCESS", create_process},
        {"SET_PRIORITY", set_priority},
        {"SUSPEND_SELF", suspend_self},
        {"SUSPEND", suspend},
        {"RESUME", resume},
        {"STOP_SELF", stop_self},
        {"STOP", stop},
        {"START", start},
        {"DELAYED_START", delayed_start},
        {"LOCK_PREEMPTION", lock_preemption},
        {"UNLOCK_PREEMPTION", unlock_preemption},
        {"GET_MY_ID", get_my_id},
        {"GET_PROCESS_ID", get_process_id},
        {"GET_PROCESS_STATUS", get_process_status},
        {"TIMED_WAIT", timed_wait},
        {"PERIODIC_WAIT", periodic_wait},
        {"GET_TIME", get_time},
        {"REPLENISH", replenish},
        {"CREATE_SAMPLING_PORT", [](Svc& v) { return create_port(v, PortKind::Sampling); }},
        {"WRITE_SAMPLING_MESSAGE", write_sampling_message},
        {"READ_SAMPLING_MESSAGE", read_sampling_message},
        {"GET_SAMPLING_PORT_ID", [](Svc& v) { return get_port_id(v, PortKind::Sampling); }},
        {"GET_SAMPLING_PORT_STATUS", get_sampling_port_status},
        {"CREATE_QUEUING_PORT", [](Svc& v) { return create_port(v, PortKind::Queuing); }},
        {"SEND_QUEUING_MESSAGE", send_queuing_message},
        {"RECEIVE_QUEUING_MESSAGE", receive_queuing_message},
        {"GET_QUEUING_PORT_ID", [](Svc& v) { return get_port_id(v, PortKind::Queuing); }},
        {"GET_QUEUING_PORT_STATUS", get_queuing_port_status},
        {"CLEAR_QUEUING_PORT", clear_queuing_port},
        {"CREATE_BUFFER", create_buffer},
        {"SEND_BUFFER", send_buffer},
        {"RECEIVE_BUFFER", receive_buffer},
        {"GET_BUFFER_ID",
         [](Svc& v) {
             const auto b = created<BufferId>(v, v.cfg().buffers, v.in.buffers);
             return get_object_id(v, b.has_value(), b ? b->value : 0);
         }},
        {"GET_BUFFER_STATUS", get_buffer_status},
        {"CREATE_BLACKBOARD", create_blackboard},
        {"DISPLAY_BLACKBOARD", display_blackboard},
        {"READ_BLACKBOARD", read_blackboard},
        {"CLEAR_BLACKBOARD", clear_blackboard},
        {"GET_BLACKBOARD_ID",
         [](Svc& v) {
             const auto b = created<BlackboardId>(v, v.cfg().blackboards, v.in.blackboards);
             return get_object_id(v, b.has_value(), b ? b->value : 0);
         }},
        {"GET_BLACKBOARD_STATUS", get_blackboard_status},
        {"CREATE_SEMAPHORE", create_semaphore},
        {"WAIT_SEMAPHORE", wait_semaphore},
        {"SIGNAL_SEMAPHORE", signal_semaphore},
        {"GET_SEMAPHORE_ID",
         [](Svc& v) {
             const auto m = created<SemaphoreId>(v, v.cfg().semaphores, v.in.semaphores);
             return get_object_id(v, m.has_value(), m ? m->value : 0);
         }},
        {"GET_SEMAPHORE_STATUS", get_semaphore_status},
        {"CREATE_EVENT", create_event},
        {"SET_EVENT", set_event},
        {"RESET_EVENT", reset_event},
        {"WAIT_EVENT", wait_event},
        {"GET_EVENT_ID",
         [](Svc& v) {
             const auto e = created<EventObjId>(v, v.cfg().events, v.in.events);
             return get_object_id(v, e.has_value(), e ? e->value : 0);
         }},
        {"GET_EVENT_STATUS", get_event_status},
        {"REPORT_APPLICATION_MESSAGE", report_application_message},
        {"CREATE_ERROR_HANDLER", create_error_handler},
        {"GET_ERROR_STATUS", get_error_status},
        {"RAISE_APPLICATION_ERROR", raise_application_error},
    };
    return table;
}

}  // namespace

ServiceResult invoke(const SystemState& s, const ServiceCall& call, VariantToggles toggles) {
    const auto* info = find_service(call.service);
    if (info == nullptr) throw UnknownServiceError("unknown service `" + call.service + "`");
    if (call.args.size() != info->args.size()) {
        throw ModelError(call.service + " takes " + std::to_string(info->args.size()) + " argument(s)");
    }
    if (s.module_shutdown) throw ModuleDownError();
    if (!caller_valid(s, call.caller)) throw InvalidModeError(describe_call(s.cfg(), call) + ": caller cannot run");
    Svc v(s, call, toggles);
    return handlers().at(info->name)(v);
}

}  // namespace a653
