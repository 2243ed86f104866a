#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "a653/state.hpp"

namespace a653 {

/// The action that caused a process state change. The abstract transition
/// relation is keyed on it.
enum class Trigger : std::uint8_t {
    StartAperiodic,
    StartPeriodic,
    DelayedStartAperiodic,
    DelayedStartPeriodic,
    Stop,
    StopSelf,
    Suspend,
    SuspendSelf,
    Resume,
    TimedWait,
    PeriodicWait,
    TimeOut,
    ReleasePoint,
    ReqBusyResource,
    ResourceAvailable,
    Schedule,
    ToNormal,
    ErrorHandlerStart,
};

std::string_view to_string(Trigger t);
std::optional<Trigger> parse_trigger(std::string_view s);

/// Abstract-level facts a concrete step claims to realize. The refinement
/// checker evaluates the abstract guard and before-after predicate of each
/// note against the real pre- and post-states.
enum class NoteKind : std::uint8_t {
    ProcessTransition,
    QueuingSend,
    QueuingSendUnblocked,
    QueuingReceive,
    BufferSend,
    BufferReceive,
    BlackboardDisplay,
    BlackboardClear,
    SamplingWrite,
    SemaphoreWait,
    SemaphoreSignal,
    EventSet,
    EventReset,
};

/// Name of the abstract event a note kind refines into.
std::string_view abstract_event_name(NoteKind k);

struct Note {
    NoteKind kind = NoteKind::ProcessTransition;
    ProcessId proc;
    PartitionMode mode = PartitionMode::Normal;
    ProcessState from = ProcessState::Dormant;
    ProcessState to = ProcessState::Dormant;
    Trigger trigger = Trigger::Schedule;
    std::uint16_t object = 0;
    MessageId msg = 0;
};

struct TraceLine {
    Tick tick = 0;
    std::string event;
    std::optional<PartitionId> part;
    std::optional<ProcessId> proc;
    std::string detail;
};

/// `tick=<n> event=<name> part=<id> proc=<id> detail=<...>`
std::string format_trace_line(const ScenarioConfig& cfg, const TraceLine& line);

struct StepLog {
    std::vector<Note> notes;
    std::vector<TraceLine> trace;
};

/// Mutable view used while computing one step. Public operations copy the
/// input state, run against a Ctx, and return the copy.
struct Ctx {
    SystemState& s;
    StepLog& log;
    VariantToggles toggles;
    bool tracing = true;

    void trace(std::string event, std::optional<PartitionId> part, std::optional<ProcessId> proc,
               std::string detail = {});
    void note(Note n) { log.notes.push_back(n); }
};

/// Changes one process state, maintaining ready-queue timestamps, and
/// records the transition for the refinement checker.
void set_process_state(Ctx& ctx, ProcessId proc, ProcessState to, Trigger trigger);

}  // namespace a653
