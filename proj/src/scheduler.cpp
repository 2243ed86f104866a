#include "a653/scheduler.hpp"

#include <tuple>

#include "a653/errors.hpp"
#include "a653/health.hpp"
#include "a653/kernel.hpp"

namespace a653::sched {

namespace {

bool runnable(const ProcessRec& p) { return p.state == ProcessState::Ready || p.state == ProcessState::Running; }

template <class F>
SystemState with_ctx(const SystemState& s, F&& f) {
    SystemState out = s;
    StepLog log;
    Ctx ctx{out, log, {}, false};
    f(ctx);
    return out;
}

}  // namespace

Tick next_mtf_boundary(Tick mtf, Tick t) { return (t / mtf + 1) * mtf; }

std::optional<ProcessId> choose_process(const SystemState& s, PartitionId part) {
    const auto& pr = s.part(part);
    if (pr.mode != PartitionMode::Normal) return std::nullopt;
    if (pr.error_handler && s.has_process(*pr.error_handler) && runnable(s.proc(*pr.error_handler))) {
        return pr.error_handler;
    }
    if (pr.lock_level > 0) {
        if (pr.lock_holder && s.has_process(*pr.lock_holder) && runnable(s.proc(*pr.lock_holder))) {
            return pr.lock_holder;
        }
        return std::nullopt;
    }
    std::optional<ProcessId> best;
    for (ProcessId id : s.processes_of(part)) {
        const auto& p = s.proc(id);
        if (!runnable(p)) continue;
        if (!best) {
            best = id;
            continue;
        }
        const auto& b = s.proc(*best);
        // higher priority, then longer in the ready set, then lower id
        if (std::make_tuple(-p.current_priority, p.ready_since, id.value) <
            std::make_tuple(-b.current_priority, b.ready_since, best->value)) {
            best = id;
        }
    }
    return best;
}

std::vector<ProcessId> detect_deadline_miss(const SystemState& s) {
    std::vector<ProcessId> out;
    for (const auto& p : s.processes) {
        if (p && p->deadline_time && s.clock_tick > *p->deadline_time) out.push_back(p->id);
    }
    return out;
}

std::vector<ProcessId> expired_timeouts(const SystemState& s) {
    std::vector<ProcessId> out;
    for (std::size_t i = 0; i < s.timeout_trigger.size(); ++i) {
        if (s.timeout_trigger[i] && s.timeout_trigger[i]->at <= s.clock_tick) out.push_back(ProcessId{i});
    }
    return out;
}

std::vector<ProcessId> due_release_points(const SystemState& s) {
    std::vector<ProcessId> out;
    for (const auto& p : s.processes) {
        if (p && p->state == ProcessState::Waiting && p->wait.kind == WaitKind::ReleasePoint && p->release_point &&
            *p->release_point <= s.clock_tick) {
            out.push_back(p->id);
        }
    }
    return out;
}

namespace detail {

void do_ticktock(Ctx& ctx) {
    auto& s = ctx.s;
    if (s.module_shutdown) throw ModuleDownError();
    ++s.clock_tick;
    if (s.schedule().is_boundary(s.clock_tick)) s.need_reschedule = true;
    ctx.trace("ticktock", s.current_partition, s.current_process);
}

void wake(Ctx& ctx, ProcessId proc, Trigger trigger) {
    auto& p = ctx.s.proc(proc);
    p.wait = {};
    ctx.s.timeout_trigger[proc.index()].reset();
    if (p.state == ProcessState::Waiting) {
        set_process_state(ctx, proc, ProcessState::Ready, trigger);
    } else if (p.state == ProcessState::WaitandSuspend) {
        set_process_state(ctx, proc, ProcessState::Suspend, trigger);
    }
}

void block(Ctx& ctx, ProcessId proc, WaitReason why, std::optional<Tick> timeout) {
    auto& p = ctx.s.proc(proc);
    p.wait = why;
    if (timeout) ctx.s.timeout_trigger[proc.index()] = TimeoutEntry{ProcessState::Ready, ctx.s.clock_tick + *timeout};
    set_process_state(ctx, proc, ProcessState::Waiting, Trigger::ReqBusyResource);
}

void make_dormant(Ctx& ctx, ProcessId proc, Trigger trigger) {
    kernel::detail::remove_from_waiting_queues(ctx, proc);
    ctx.s.timeout_trigger[proc.index()].reset();
    auto& p = ctx.s.proc(proc);
    p.deadline_time.reset();
    p.release_point.reset();
    p.delay_time.reset();
    p.start_kind = StartKind::None;
    p.wait = {};
    p.current_priority = p.base_priority;
    p.preempted_process.reset();
    set_process_state(ctx, proc, ProcessState::Dormant, trigger);
}

void do_time_out(Ctx& ctx) {
    auto& s = ctx.s;
    for (ProcessId proc : expired_timeouts(s)) {
        auto& p = s.proc(proc);
        s.timeout_trigger[proc.index()].reset();
        if (is_process_queue(p.wait.kind)) {
            kernel::detail::remove_from_waiting_queues(ctx, proc);
            ctx.trace("time_out", p.partition, proc, "TIMED_OUT");
        } else {
            ctx.trace("time_out", p.partition, proc);
        }
        p.wait = {};
        switch (p.state) {
            case ProcessState::Waiting:
            case ProcessState::Suspend:
                set_process_state(ctx, proc, ProcessState::Ready, Trigger::TimeOut);
                break;
            case ProcessState::WaitandSuspend:
                set_process_state(ctx, proc, ProcessState::Suspend, Trigger::TimeOut);
                break;
            default:
                break;
        }
    }
    s.need_procresch = true;
}

void do_release(Ctx& ctx, ProcessId proc) {
    auto& p = ctx.s.proc(proc);
    if (p.state != ProcessState::Waiting || p.wait.kind != WaitKind::ReleasePoint || !p.release_point ||
        *p.release_point > ctx.s.clock_tick) {
        return;
    }
    p.wait = {};
    if (p.time_capacity) p.deadline_time = *p.release_point + *p.time_capacity;
    ctx.trace("releasepoint", p.partition, proc, "release=" + std::to_string(*p.release_point));
    set_process_state(ctx, proc, ProcessState::Ready, Trigger::ReleasePoint);
}

void do_deadline_miss(Ctx& ctx, ProcessId proc) {
    auto& p = ctx.s.proc(proc);
    const auto part = p.partition;
    ctx.trace("deadline_miss", part, proc, "deadline=" + std::to_string(p.deadline_time.value_or(0)));
    p.deadline_time.reset();
    try {
        hm::detail::raise(ctx, ErrorCode::DeadlineMissed, std::nullopt, hm::Source{proc, part});
    } catch (const UnconfiguredError& e) {
        ctx.trace("hm_unconfigured", part, proc, "DEADLINE_MISSED");
    }
}

void do_partition_schedule(Ctx& ctx) {
    auto& s = ctx.s;
    const Window* w = s.schedule().window_at(s.clock_tick);
    std::optional<PartitionId> target;
    if (w != nullptr && s.part(w->partition).mode != PartitionMode::Idle) target = w->partition;
    if (s.current_process && target != s.current_partition) {
        set_process_state(ctx, *s.current_process, ProcessState::Ready, Trigger::Schedule);
    }
    s.current_partition = target;
    s.need_reschedule = false;
    s.need_procresch = true;
    ctx.trace("partition_schedule", target, std::nullopt,
              w == nullptr ? "gap" : "window=" + std::to_string(w->start) + ".." + std::to_string(w->end));
}

void do_process_schedule(Ctx& ctx) {
    auto& s = ctx.s;
    std::optional<ProcessId> chosen;
    if (s.current_partition) chosen = choose_process(s, *s.current_partition);
    if (chosen != s.current_process) {
        if (s.current_process) set_process_state(ctx, *s.current_process, ProcessState::Ready, Trigger::Schedule);
        if (chosen) set_process_state(ctx, *chosen, ProcessState::Running, Trigger::Schedule);
        s.current_process = chosen;
    }
    s.need_procresch = false;
    ctx.trace("process_schedule", s.current_partition, s.current_process);
}

void apply_start_periodic_timing(SystemState& s, ProcessId proc, Tick delay) {
    auto& p = s.proc(proc);
    const Tick release = next_mtf_boundary(s.schedule().mtf, s.clock_tick + delay);
    p.release_point = release;
    if (p.time_capacity) {
        p.deadline_time = release + *p.time_capacity;
    } else {
        p.deadline_time.reset();
    }
}

void apply_periodic_wait(Ctx& ctx, ProcessId proc) {
    auto& p = ctx.s.proc(proc);
    const Tick release = p.release_point.value_or(ctx.s.clock_tick) + *p.period;
    p.release_point = release;
    if (p.time_capacity) p.deadline_time = release + *p.time_capacity;
    p.wait = {WaitKind::ReleasePoint, 0};
    set_process_state(ctx, proc, ProcessState::Waiting, Trigger::PeriodicWait);
}

void apply_timed_wait(Ctx& ctx, ProcessId proc, Tick t) {
    if (t == 0) {
        set_process_state(ctx, proc, ProcessState::Ready, Trigger::TimedWait);
        return;
    }
    auto& p = ctx.s.proc(proc);
    p.wait = {WaitKind::TimedWait, 0};
    ctx.s.timeout_trigger[proc.index()] = TimeoutEntry{ProcessState::Ready, ctx.s.clock_tick + t};
    set_process_state(ctx, proc, ProcessState::Waiting, Trigger::TimedWait);
}

}  // namespace detail

SystemState ticktock(const SystemState& s) {
    return with_ctx(s, [](Ctx& ctx) { detail::do_ticktock(ctx); });
}

SystemState partition_schedule(const SystemState& s) {
    if (!s.need_reschedule) return s;
    return with_ctx(s, [](Ctx& ctx) { detail::do_partition_schedule(ctx); });
}

SystemState process_schedule(const SystemState& s) {
    if (!s.need_procresch) return s;
    return with_ctx(s, [](Ctx& ctx) { detail::do_process_schedule(ctx); });
}

SystemState start_periodic_timing(const SystemState& s, ProcessId proc, Tick delay) {
    SystemState out = s;
    detail::apply_start_periodic_timing(out, proc, delay);
    return out;
}

SystemState periodicproc_reach_releasepoint(const SystemState& s, ProcessId proc) {
    return with_ctx(s, [&](Ctx& ctx) { detail::do_release(ctx, proc); });
}

SystemState periodic_wait(const SystemState& s, ProcessId proc) {
    if (!s.has_process(proc) || !s.proc(proc).periodic()) throw InvalidModeError("PERIODIC_WAIT on an aperiodic process");
    if (s.proc(proc).state != ProcessState::Running) throw InvalidModeError("PERIODIC_WAIT by a process not running");
    return with_ctx(s, [&](Ctx& ctx) { detail::apply_periodic_wait(ctx, proc); });
}

SystemState timed_wait(const SystemState& s, ProcessId proc, Tick t) {
    if (!s.has_process(proc) || s.proc(proc).state != ProcessState::Running) {
        throw InvalidModeError("TIMED_WAIT by a process not running");
    }
    return with_ctx(s, [&](Ctx& ctx) { detail::apply_timed_wait(ctx, proc, t); });
}

SystemState replenish(const SystemState& s, ProcessId proc, Tick budget) {
    SystemState out = s;
    out.proc(proc).deadline_time = s.clock_tick + budget;
    return out;
}

SystemState time_out(const SystemState& s) {
    if (expired_timeouts(s).empty()) return s;
    return with_ctx(s, [](Ctx& ctx) { detail::do_time_out(ctx); });
}

namespace {

void settle_into(Ctx& ctx, std::vector<std::string>& fired) {
    auto& s = ctx.s;
    while (!s.module_shutdown) {
        if (!expired_timeouts(s).empty()) {
            detail::do_time_out(ctx);
            fired.emplace_back("time_out");
        } else if (auto due = due_release_points(s); !due.empty()) {
            for (ProcessId p : due) detail::do_release(ctx, p);
            fired.emplace_back("releasepoint");
        } else if (auto missed = detect_deadline_miss(s); !missed.empty()) {
            detail::do_deadline_miss(ctx, missed.front());
            fired.emplace_back("deadline_miss");
        } else if (s.need_reschedule) {
            detail::do_partition_schedule(ctx);
            fired.emplace_back("partition_schedule");
        } else if (s.need_procresch) {
            detail::do_process_schedule(ctx);
            fired.emplace_back("process_schedule");
        } else {
            break;
        }
    }
}

}  // namespace

TickOutcome run_tick(const SystemState& s, VariantToggles toggles) {
    TickOutcome out{s, {}, {}};
    Ctx ctx{out.new_state, out.log, toggles, true};
    detail::do_ticktock(ctx);
    out.fired.emplace_back("ticktock");
    settle_into(ctx, out.fired);
    return out;
}

TickOutcome settle(const SystemState& s, VariantToggles toggles) {
    TickOutcome out{s, {}, {}};
    Ctx ctx{out.new_state, out.log, toggles, true};
    settle_into(ctx, out.fired);
    return out;
}

}  // namespace a653::sched
