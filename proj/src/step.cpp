#include "a653/step.hpp"

#include <array>

namespace a653 {

namespace {

constexpr std::array<std::string_view, 18> kTriggerNames{
    "start_aperiodic", "start_periodic", "delayed_start_aperiodic", "delayed_start_periodic",
    "stop",            "stop_self",      "suspend",                 "suspend_self",
    "resume",          "timed_wait",     "periodic_wait",           "time_out",
    "release_point",   "req_busy_resource", "resource_available",   "schedule",
    "to_normal",       "error_handler_start",
};

}  // namespace

std::string_view to_string(Trigger t) { return kTriggerNames[static_cast<std::size_t>(t)]; }

std::optional<Trigger> parse_trigger(std::string_view s) {
    for (std::size_t i = 0; i < kTriggerNames.size(); ++i) {
        if (kTriggerNames[i] == s) return static_cast<Trigger>(i);
    }
    return std::nullopt;
}

std::string_view abstract_event_name(NoteKind k) {
    switch (k) {
        case NoteKind::ProcessTransition: return "process_state_transition";
        case NoteKind::QueuingSend: return "send_queuing_message";
        case NoteKind::QueuingSendUnblocked: return "send_queuing_message_unblocked";
        case NoteKind::QueuingReceive: return "receive_queuing_message";
        case NoteKind::BufferSend: return "send_buffer";
        case NoteKind::BufferReceive: return "receive_buffer";
        case NoteKind::BlackboardDisplay: return "display_blackboard";
        case NoteKind::BlackboardClear: return "clear_blackboard";
        case NoteKind::SamplingWrite: return "write_sampling_message";
        case NoteKind::SemaphoreWait: return "wait_semaphore";
        case NoteKind::SemaphoreSignal: return "signal_semaphore";
        case NoteKind::EventSet: return "set_event";
        case NoteKind::EventReset: return "reset_event";
    }
    return "?";
}

std::string format_trace_line(const ScenarioConfig& cfg, const TraceLine& line) {
    std::string out = "tick=" + std::to_string(line.tick) + " event=" + line.event;
    out += " part=" + (line.part ? cfg.name(*line.part) : std::string("-"));
    out += " proc=" + (line.proc ? cfg.name(*line.proc) : std::string("-"));
    out += " detail=" + (line.detail.empty() ? std::string("-") : line.detail);
    return out;
}

void Ctx::trace(std::string event, std::optional<PartitionId> part, std::optional<ProcessId> proc,
                std::string detail) {
    if (!tracing) return;
    log.trace.push_back({s.clock_tick, std::move(event), part, proc, std::move(detail)});
}

void set_process_state(Ctx& ctx, ProcessId proc, ProcessState to, Trigger trigger) {
    auto& p = ctx.s.proc(proc);
    const ProcessState from = p.state;
    if (from == to) return;
    p.state = to;
    const bool runnable = to == ProcessState::Ready || to == ProcessState::Running;
    if (!runnable) {
        p.ready_since = 0;
    } else if (from != ProcessState::Ready && from != ProcessState::Running) {
        p.ready_since = ctx.s.clock_tick;
    }
    if (ctx.s.current_process == proc && to != ProcessState::Running) ctx.s.current_process.reset();
    if (to == ProcessState::Ready || from == ProcessState::Running || from == ProcessState::Ready) {
        ctx.s.need_procresch = true;
    }
    const auto mode = ctx.s.part(p.partition).mode;
    ctx.note({NoteKind::ProcessTransition, proc, mode, from, to, trigger, 0, 0});
    if (ctx.tracing) {
        ctx.trace("process_state", p.partition, proc,
                  std::string(to_string(from)) + "->" + std::string(to_string(to)) + "/" + std::string(to_string(trigger)));
    }
}

}  // namespace a653
