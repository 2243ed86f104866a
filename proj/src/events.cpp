#include "a653/events.hpp"

#include <algorithm>

#include "a653/errors.hpp"
#include "a653/scheduler.hpp"

namespace a653 {

std::string_view to_string(StageKind k) {
    switch (k) {
        case StageKind::TickTock: return "ticktock";
        case StageKind::TimeOut: return "time_out";
        case StageKind::ReleasePoint: return "releasepoint";
        case StageKind::DeadlineMiss: return "deadline_miss";
        case StageKind::PartitionSchedule: return "partition_schedule";
        case StageKind::ProcessSchedule: return "process_schedule";
    }
    return "?";
}

std::string event_label(const ScenarioConfig& cfg, const Event& e) {
    if (const auto* st = std::get_if<StageEvent>(&e)) {
        std::string out(to_string(st->kind));
        if (st->proc) out += "(" + cfg.name(*st->proc) + ")";
        return out;
    }
    if (const auto* c = std::get_if<ServiceCall>(&e)) return describe_call(cfg, *c);
    return "script_skip#" + std::to_string(std::get<ScriptSkip>(e).index);
}

std::string event_kind_name(const Event& e) {
    if (const auto* st = std::get_if<StageEvent>(&e)) return std::string(to_string(st->kind));
    if (const auto* c = std::get_if<ServiceCall>(&e)) return c->service;
    return "script_skip";
}

namespace {

bool contains(const std::vector<ProcessId>& v, const std::optional<ProcessId>& p) {
    return p && std::find(v.begin(), v.end(), *p) != v.end();
}

}  // namespace

bool stage_enabled(const SystemState& s, const StageEvent& e) {
    if (s.module_shutdown) return false;
    switch (e.kind) {
        case StageKind::TickTock: return true;
        case StageKind::TimeOut: return !sched::expired_timeouts(s).empty();
        case StageKind::ReleasePoint: return contains(sched::due_release_points(s), e.proc);
        case StageKind::DeadlineMiss: return contains(sched::detect_deadline_miss(s), e.proc);
        case StageKind::PartitionSchedule: return s.need_reschedule;
        case StageKind::ProcessSchedule: return s.need_procresch;
    }
    return false;
}

std::vector<StageEvent> urgent_stage_events(const SystemState& s) {
    std::vector<StageEvent> out;
    if (s.module_shutdown) return out;
    if (!sched::expired_timeouts(s).empty()) out.push_back({StageKind::TimeOut, std::nullopt});
    for (ProcessId p : sched::due_release_points(s)) out.push_back({StageKind::ReleasePoint, p});
    for (ProcessId p : sched::detect_deadline_miss(s)) out.push_back({StageKind::DeadlineMiss, p});
    if (s.need_reschedule) out.push_back({StageKind::PartitionSchedule, std::nullopt});
    if (s.need_procresch) out.push_back({StageKind::ProcessSchedule, std::nullopt});
    return out;
}

StepResult apply_event(const SystemState& s, const Event& e, VariantToggles toggles) {
    if (const auto* c = std::get_if<ServiceCall>(&e)) {
        auto r = invoke(s, *c, toggles);
        return StepResult{std::move(r.state), std::move(r.log), r.return_code, std::move(r.out_values)};
    }
    StepResult out{s, {}, std::nullopt, {}};
    Ctx ctx{out.state, out.log, toggles, true};
    if (const auto* k = std::get_if<ScriptSkip>(&e)) {
        ctx.trace("script_skip", s.current_partition, std::nullopt, "entry=" + std::to_string(k->index));
        return out;
    }
    const auto& st = std::get<StageEvent>(e);
    switch (st.kind) {
        case StageKind::TickTock: sched::detail::do_ticktock(ctx); break;
        case StageKind::TimeOut: sched::detail::do_time_out(ctx); break;
        case StageKind::ReleasePoint: sched::detail::do_release(ctx, *st.proc); break;
        case StageKind::DeadlineMiss: sched::detail::do_deadline_miss(ctx, *st.proc); break;
        case StageKind::PartitionSchedule: sched::detail::do_partition_schedule(ctx); break;
        case StageKind::ProcessSchedule: sched::detail::do_process_schedule(ctx); break;
    }
    return out;
}

}  // namespace a653
