#include "a653/health.hpp"

#include "a653/errors.hpp"
#include "a653/kernel.hpp"

namespace a653::hm {

namespace detail {

namespace {

std::optional<HmEntry> lookup(const HmTable& t, ErrorCode code) {
    const auto it = t.find(code);
    if (it == t.end()) return std::nullopt;
    return it->second;
}

Decision module_decision(RecoveryAction a, std::optional<PartitionId> part) {
    if (a == RecoveryAction::ModuleShutdown) return {Route::ModuleShutdown, a, part};
    if (a == RecoveryAction::ModuleReset) return {Route::ModuleReset, a, part};
    if (a == RecoveryAction::ProcessErrorHandler) a = RecoveryAction::PartitionIdle;
    return {Route::Partition, a, part};
}

}  // namespace

Decision decide(const SystemState& s, ErrorCode code, std::optional<ErrorLevel> level_hint, const Source& source) {
    if (s.module_shutdown) throw ModuleDownError();
    std::optional<PartitionId> part = source.part;
    if (!part && source.proc && s.has_process(*source.proc)) part = s.proc(*source.proc).partition;

    const Window* w = s.schedule().window_at(s.clock_tick);
    if (w == nullptr) {
        // outside every partition time window only the module table applies
        const auto e = lookup(s.cfg().module_hm, code);
        if (!e) throw UnconfiguredError("no module HM entry for " + std::string(to_string(code)));
        if (!part && e->action != RecoveryAction::ModuleShutdown && e->action != RecoveryAction::ModuleReset) {
            throw UnconfiguredError("module HM entry for " + std::string(to_string(code)) + " needs a partition");
        }
        return module_decision(e->action, part);
    }

    const auto& mp = s.cfg().partitions[w->partition.index()].multi_part_hm;
    if (const auto e = lookup(mp, code); e && e->level == ErrorLevel::Module) return module_decision(e->action, part);

    if (!part) {
        const auto e = lookup(s.cfg().module_hm, code);
        if (!e) throw UnconfiguredError("no module HM entry for " + std::string(to_string(code)));
        return module_decision(e->action, w->partition);
    }

    const auto e = lookup(s.cfg().partitions[part->index()].partition_hm, code);
    if (!e) {
        throw UnconfiguredError("no HM entry for " + std::string(to_string(code)) + " in partition " +
                                s.cfg().name(*part));
    }
    const ErrorLevel level = level_hint.value_or(e->level);
    if (level == ErrorLevel::Module) return module_decision(e->action, part);

    const auto& pr = s.part(*part);
    const bool handler_usable = level == ErrorLevel::Process && pr.error_handler && s.has_process(*pr.error_handler) &&
                                source.proc != pr.error_handler && s.current_process != pr.error_handler &&
                                pr.mode == PartitionMode::Normal;
    if (handler_usable) return {Route::ErrorHandler, RecoveryAction::ProcessErrorHandler, part};
    return module_decision(e->action, part);
}

void module_reset(Ctx& ctx) {
    auto& s = ctx.s;
    ctx.trace("module_reset", std::nullopt, std::nullopt);
    for (std::size_t i = 0; i < s.partitions.size(); ++i) {
        kernel::detail::apply_partition_mode(ctx, PartitionId{i}, PartitionMode::ColdStart);
    }
    s.current_process.reset();
    s.need_reschedule = true;
    s.need_procresch = true;
}

void apply_partition_action(Ctx& ctx, PartitionId part, RecoveryAction action) {
    auto& s = ctx.s;
    PartitionMode target = PartitionMode::Idle;
    switch (action) {
        case RecoveryAction::PartitionColdRestart: target = PartitionMode::ColdStart; break;
        case RecoveryAction::PartitionWarmRestart: target = PartitionMode::WarmStart; break;
        default: target = PartitionMode::Idle; break;
    }
    const auto old = s.part(part).mode;
    if (old == PartitionMode::Idle) return;
    // a warm restart of a cold-starting partition keeps it cold
    if (old == PartitionMode::ColdStart && target == PartitionMode::WarmStart) target = PartitionMode::ColdStart;
    ctx.trace("hm_partition", part, std::nullopt, std::string(to_string(action)));
    kernel::detail::apply_partition_mode(ctx, part, target);
    if (target == PartitionMode::Idle) s.need_reschedule = true;
}

void activate_handler(Ctx& ctx, PartitionId part, ErrorCode code, std::optional<ProcessId> failed) {
    auto& s = ctx.s;
    auto& pr = s.part(part);
    const ProcessId h = *pr.error_handler;
    pr.last_error = ErrorStatus{code, failed};
    auto& hp = s.proc(h);
    ctx.trace("hm_errorhandler", part, h, std::string(to_string(code)));
    if (hp.state != ProcessState::Dormant) return;
    std::optional<ProcessId> preempted;
    if (s.current_process && s.proc(*s.current_process).partition == part) preempted = s.current_process;
    hp.preempted_process = preempted;
    hp.start_kind = StartKind::Normal;
    hp.current_priority = hp.base_priority;
    set_process_state(ctx, h, ProcessState::Ready, Trigger::ErrorHandlerStart);
    s.need_procresch = true;
}

Route raise(Ctx& ctx, ErrorCode code, std::optional<ErrorLevel> level_hint, const Source& source) {
    const Decision d = decide(ctx.s, code, level_hint, source);
    ctx.trace("hm_raise", d.part, source.proc, std::string(to_string(code)));
    switch (d.route) {
        case Route::ModuleShutdown:
            ctx.s.module_shutdown = true;
            ctx.trace("module_shutdown", d.part, std::nullopt);
            break;
        case Route::ModuleReset:
            module_reset(ctx);
            break;
        case Route::Partition:
            apply_partition_action(ctx, *d.part, d.action);
            break;
        case Route::ErrorHandler:
            activate_handler(ctx, *d.part, code, source.proc);
            break;
    }
    return d.route;
}

}  // namespace detail

RaiseOutcome raise_error(const SystemState& s, ErrorCode code, std::optional<ErrorLevel> level_hint, Source source) {
    RaiseOutcome out{s, Route::Partition, RecoveryAction::PartitionIdle, {}};
    Ctx ctx{out.state, out.log, {}, true};
    const auto d = detail::decide(s, code, level_hint, source);
    detail::raise(ctx, code, level_hint, source);
    out.route = d.route;
    out.action = d.action;
    return out;
}

SystemState hm_recoveryaction_shutdown_module(const SystemState& s, ErrorCode code) {
    if (s.module_shutdown) throw ModuleDownError();
    if (!s.current_partition) return s;
    const auto& mp = s.cfg().partitions[s.current_partition->index()].multi_part_hm;
    const auto it = mp.find(code);
    if (it == mp.end() || it->second.action != RecoveryAction::ModuleShutdown) return s;
    SystemState out = s;
    out.module_shutdown = true;
    return out;
}

SystemState hm_recoveryaction_partition(const SystemState& s, PartitionId part, ErrorCode code) {
    if (s.module_shutdown) throw ModuleDownError();
    const auto& t = s.cfg().partitions[part.index()].partition_hm;
    const auto it = t.find(code);
    if (it == t.end()) return s;
    RecoveryAction a = it->second.action;
    if (a == RecoveryAction::ProcessErrorHandler || a == RecoveryAction::ModuleShutdown ||
        a == RecoveryAction::ModuleReset) {
        a = RecoveryAction::PartitionIdle;
    }
    SystemState out = s;
    StepLog log;
    Ctx ctx{out, log, {}, false};
    detail::apply_partition_action(ctx, part, a);
    return out;
}

SystemState hm_recoveryaction_errorhandler(const SystemState& s, PartitionId part, ErrorCode code,
                                           std::optional<ProcessId> failed) {
    if (s.module_shutdown) throw ModuleDownError();
    const auto& pr = s.part(part);
    if (!pr.error_handler || !s.has_process(*pr.error_handler) || s.current_process == pr.error_handler) return s;
    SystemState out = s;
    StepLog log;
    Ctx ctx{out, log, {}, false};
    detail::activate_handler(ctx, part, code, failed);
    return out;
}

SystemState create_error_handler(const SystemState& s, PartitionId part) {
    if (!is_start_mode(s.part(part).mode)) throw InvalidModeError("error handler created outside initialization");
    if (s.part(part).error_handler) throw AlreadyExistsError("partition " + s.cfg().name(part) + " has a handler");
    SystemState out = s;
    const ProcessId slot = s.cfg().error_handler_slot(part);
    kernel::detail::add_process(out, part, slot);
    out.part(part).error_handler = slot;
    return out;
}

}  // namespace a653::hm
