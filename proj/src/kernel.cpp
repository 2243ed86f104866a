#include "a653/kernel.hpp"

#include <algorithm>
#include <array>

#include "a653/errors.hpp"
#include "a653/ipc.hpp"
#include "a653/scheduler.hpp"

namespace a653::kernel {

std::optional<ModeClass> mode_class(PartitionMode m) {
    if (m == PartitionMode::Normal) return ModeClass::Normal;
    if (is_start_mode(m)) return ModeClass::Start;
    return std::nullopt;
}

const std::vector<TransitionRule>& transition_rules() {
    static const std::vector<TransitionRule> rules = [] {
        std::vector<TransitionRule> r;
#define ROW(mode, from, to, trig, aug, src)                                                             \
    r.push_back(TransitionRule{ModeClass::mode, ProcessState::from, ProcessState::to, Trigger::trig, aug, \
                               src});
#include "transition_relation.inc"
#undef ROW
        return r;
    }();
    return rules;
}

bool transition_allowed(TransitionModelVariant variant, PartitionMode mode, ProcessState from, ProcessState to,
                        std::optional<Trigger> trigger) {
    const auto mc = mode_class(mode);
    if (!mc) return false;
    return std::any_of(transition_rules().begin(), transition_rules().end(), [&](const TransitionRule& r) {
        if (r.augmented_only && variant == TransitionModelVariant::AsFigured) return false;
        return r.mode == *mc && r.from == from && r.to == to && (!trigger || r.trigger == *trigger);
    });
}

bool mode_transition_allowed(PartitionMode from, PartitionMode to) {
    using M = PartitionMode;
    switch (from) {
        case M::Idle:
            return false;
        case M::ColdStart:
            return true;  // restart, WARM_START, NORMAL, IDLE
        case M::WarmStart:
            return to != M::ColdStart;
        case M::Normal:
            return to != M::Normal;
    }
    return false;
}

namespace detail {

void add_process(SystemState& s, PartitionId creator, ProcessId proc) {
    const auto& pc = s.cfg().processes[proc.index()];
    ProcessRec p;
    p.id = proc;
    p.partition = pc.partition;
    p.base_priority = pc.priority;
    p.current_priority = pc.priority;
    p.period = pc.period;
    p.time_capacity = pc.time_capacity;
    p.is_error_handler = pc.is_error_handler;
    p.creator_partition = creator;
    s.processes[proc.index()] = p;
}

namespace {

bool drop_waiter(Ctx& ctx, std::vector<Waiter>& waiting, ProcessId proc) {
    auto it = std::find_if(waiting.begin(), waiting.end(), [&](const Waiter& w) { return w.proc == proc; });
    if (it == waiting.end()) return false;
    if (it->msg) ipc::detail::discard(ctx, *it->msg);
    waiting.erase(it);
    return true;
}

void discard_queue(Ctx& ctx, std::vector<StoredMessage>& q) {
    for (const auto& m : q) ipc::detail::discard(ctx, m.id);
    q.clear();
}

bool in_any_msgspace(const SystemState& s, MessageId m) {
    for (const auto& p : s.ports) {
        if (p.msgspace && p.msgspace->id == m) return true;
    }
    for (const auto& b : s.blackboards) {
        if (b && b->msgspace == m) return true;
    }
    return false;
}

}  // namespace

void remove_from_waiting_queues(Ctx& ctx, ProcessId proc) {
    auto& s = ctx.s;
    for (auto& p : s.ports) {
        if (drop_waiter(ctx, p.waiting, proc)) return;
    }
    for (auto& b : s.buffers) {
        if (b && drop_waiter(ctx, b->waiting, proc)) return;
    }
    for (auto& b : s.blackboards) {
        if (b && drop_waiter(ctx, b->waiting, proc)) return;
    }
    for (auto& m : s.semaphores) {
        if (m && drop_waiter(ctx, m->waiting, proc)) return;
    }
    for (auto& e : s.events) {
        if (e && drop_waiter(ctx, e->waiting, proc)) return;
    }
}

void clear_partition(Ctx& ctx, PartitionId part) {
    auto& s = ctx.s;
    const auto& cfg = s.cfg();
    for (ProcessId proc : s.processes_of(part)) {
        remove_from_waiting_queues(ctx, proc);
        s.timeout_trigger[proc.index()].reset();
        s.processes[proc.index()].reset();
        if (s.current_process == proc) s.current_process.reset();
    }
    for (std::size_t i = 0; i < s.buffers.size(); ++i) {
        if (cfg.buffers[i].partition == part && s.buffers[i]) {
            discard_queue(ctx, s.buffers[i]->queue);
            s.buffers[i].reset();
        }
    }
    for (std::size_t i = 0; i < s.blackboards.size(); ++i) {
        if (cfg.blackboards[i].partition == part && s.blackboards[i]) {
            const auto m = s.blackboards[i]->msgspace;
            s.blackboards[i].reset();
            if (m && !in_any_msgspace(s, *m)) ipc::detail::discard(ctx, *m);
        }
    }
    for (std::size_t i = 0; i < s.semaphores.size(); ++i) {
        if (cfg.semaphores[i].partition == part) s.semaphores[i].reset();
    }
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        if (cfg.events[i].partition == part) s.events[i].reset();
    }
    for (std::size_t i = 0; i < s.ports.size(); ++i) {
        if (cfg.ports[i].partition != part) continue;
        auto& p = s.ports[i];
        p.created = false;
        discard_queue(ctx, p.queue);
        if (p.msgspace) {
            const auto m = p.msgspace->id;
            p.msgspace.reset();
            if (!in_any_msgspace(s, m)) ipc::detail::discard(ctx, m);
        }
    }
    auto& pr = s.part(part);
    pr.lock_holder.reset();
    pr.error_handler.reset();
    pr.last_error.reset();
}

void apply_partition_mode(Ctx& ctx, PartitionId part, PartitionMode newmode) {
    auto& s = ctx.s;
    const auto old = s.part(part).mode;
    ctx.trace("partition_mode", part, std::nullopt,
              std::string(to_string(old)) + "->" + std::string(to_string(newmode)));
    if (newmode == PartitionMode::Normal) {
        for (ProcessId proc : s.processes_of(part)) {
            auto& p = s.proc(proc);
            if (p.wait.kind != WaitKind::PartitionStart) continue;
            const bool suspended = p.state == ProcessState::WaitandSuspend;
            const Tick delay = p.delay_time.value_or(0);
            if (p.periodic()) {
                p.wait = {WaitKind::ReleasePoint, 0};
                sched::detail::apply_start_periodic_timing(s, proc, delay);
            } else if (p.start_kind == StartKind::Delayed && delay > 0) {
                p.wait = {WaitKind::Delay, 0};
                s.timeout_trigger[proc.index()] = TimeoutEntry{ProcessState::Ready, s.clock_tick + delay};
                if (p.time_capacity) p.deadline_time = s.clock_tick + delay + *p.time_capacity;
            } else {
                p.wait = {};
                if (p.time_capacity) p.deadline_time = s.clock_tick + *p.time_capacity;
                set_process_state(ctx, proc, suspended ? ProcessState::Suspend : ProcessState::Ready, Trigger::ToNormal);
            }
        }
        auto& pr = s.part(part);
        pr.mode = PartitionMode::Normal;
        pr.lock_level = 0;
        pr.lock_holder.reset();
        s.need_procresch = true;
        return;
    }
    clear_partition(ctx, part);
    auto& pr = s.part(part);
    pr.mode = newmode;
    pr.lock_level = 1;
    if (s.current_partition == part) {
        s.current_process.reset();
        s.need_procresch = true;
        if (newmode == PartitionMode::Idle) s.current_partition.reset();
    }
}

}  // namespace detail

SystemState partition_mode_transition(const SystemState& s, PartitionId part, PartitionMode newmode) {
    const auto old = s.part(part).mode;
    if (!mode_transition_allowed(old, newmode)) {
        throw IllegalModeTransition("partition " + s.cfg().name(part) + ": " + std::string(to_string(old)) + " -> " +
                                    std::string(to_string(newmode)));
    }
    SystemState out = s;
    StepLog log;
    Ctx ctx{out, log, {}, false};
    detail::apply_partition_mode(ctx, part, newmode);
    return out;
}

SystemState process_state_transition(const SystemState& s, PartitionId part, ProcessId proc, ProcessState newstate,
                                     TransitionModelVariant variant) {
    const auto mode = s.part(part).mode;
    const auto describe = [&](ProcessState from) {
        return std::string(to_string(mode)) + " " + std::string(to_string(from)) + " -> " +
               std::string(to_string(newstate));
    };
    if (!s.has_process(proc) || s.proc(proc).partition != part) {
        throw IllegalStateTransition("process not in partition: " + describe(ProcessState::Dormant));
    }
    const auto from = s.proc(proc).state;
    if (mode == PartitionMode::Idle || !transition_allowed(variant, mode, from, newstate)) {
        throw IllegalStateTransition(describe(from));
    }
    SystemState out = s;
    out.proc(proc).state = newstate;
    return out;
}

SystemState create_process(const SystemState& s, PartitionId part, ProcessId proc) {
    if (!is_start_mode(s.part(part).mode)) {
        throw InvalidModeError("processes are created only during partition initialization");
    }
    if (proc.index() >= s.cfg().processes.size() || s.cfg().processes[proc.index()].partition != part) {
        throw ModelError("process is not configured for partition " + s.cfg().name(part));
    }
    if (s.has_process(proc)) throw DuplicateIdError("process " + s.cfg().name(proc) + " already exists");
    SystemState out = s;
    detail::add_process(out, part, proc);
    return out;
}

std::vector<AbstractBinding> enabled_abstract_events(const SystemState& s, TransitionModelVariant variant) {
    static constexpr std::array kStates{ProcessState::Dormant, ProcessState::Ready,   ProcessState::Running,
                                        ProcessState::Waiting, ProcessState::Suspend, ProcessState::WaitandSuspend};
    static constexpr std::array kModes{PartitionMode::Idle, PartitionMode::ColdStart, PartitionMode::WarmStart,
                                       PartitionMode::Normal};
    std::vector<AbstractBinding> out;
    const auto& cfg = s.cfg();
    for (std::size_t i = 0; i < s.partitions.size(); ++i) {
        const PartitionId part{i};
        const auto mode = s.part(part).mode;
        for (auto m : kModes) {
            if (mode_transition_allowed(mode, m)) out.push_back({"partition_mode_transition", part, {}, {}, m});
        }
        if (mode == PartitionMode::Idle) continue;
        for (ProcessId proc : s.processes_of(part)) {
            for (auto st : kStates) {
                if (transition_allowed(variant, mode, s.proc(proc).state, st)) {
                    out.push_back({"process_state_transition", part, proc, st, {}});
                }
            }
        }
        if (is_start_mode(mode)) {
            for (std::size_t k = 0; k < cfg.processes.size(); ++k) {
                const ProcessId proc{k};
                if (cfg.processes[k].partition == part && !cfg.processes[k].is_error_handler && !s.has_process(proc)) {
                    out.push_back({"create_process", part, proc, {}, {}});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace a653::kernel
