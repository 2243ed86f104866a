#pragma once

#include <optional>
#include <string>
#include <vector>

#include "a653/state.hpp"
#include "a653/step.hpp"

namespace a653::sched {

/// Result of running the tick pipeline once.
struct TickOutcome {
    SystemState new_state;
    std::vector<std::string> fired;
    StepLog log;
};

SystemState ticktock(const SystemState& s);
SystemState partition_schedule(const SystemState& s);
SystemState process_schedule(const SystemState& s);

/// Process the scheduler would pick in `part` right now. Never a START-mode
/// partition's process.
[[nodiscard]] std::optional<ProcessId> choose_process(const SystemState& s, PartitionId part);

/// Smallest multiple of mtf strictly greater than t.
[[nodiscard]] Tick next_mtf_boundary(Tick mtf, Tick t);

SystemState start_periodic_timing(const SystemState& s, ProcessId proc, Tick delay);
SystemState periodicproc_reach_releasepoint(const SystemState& s, ProcessId proc);
SystemState periodic_wait(const SystemState& s, ProcessId proc);
SystemState timed_wait(const SystemState& s, ProcessId proc, Tick t);
SystemState replenish(const SystemState& s, ProcessId proc, Tick budget);
SystemState time_out(const SystemState& s);

[[nodiscard]] std::vector<ProcessId> detect_deadline_miss(const SystemState& s);
[[nodiscard]] std::vector<ProcessId> expired_timeouts(const SystemState& s);
[[nodiscard]] std::vector<ProcessId> due_release_points(const SystemState& s);

/// ticktock followed by the rest of the canonical pipeline.
TickOutcome run_tick(const SystemState& s, VariantToggles toggles = {});
/// The pipeline without ticktock: fires every urgent stage until none is
/// left. Used at tick 0 and after service calls.
TickOutcome settle(const SystemState& s, VariantToggles toggles = {});

namespace detail {

void do_ticktock(Ctx& ctx);
void do_time_out(Ctx& ctx);
void do_release(Ctx& ctx, ProcessId proc);
/// Raises DEADLINE_MISSED for `proc` and clears its deadline.
void do_deadline_miss(Ctx& ctx, ProcessId proc);
void do_partition_schedule(Ctx& ctx);
void do_process_schedule(Ctx& ctx);

void apply_start_periodic_timing(SystemState& s, ProcessId proc, Tick delay);
void apply_periodic_wait(Ctx& ctx, ProcessId proc);
void apply_timed_wait(Ctx& ctx, ProcessId proc, Tick t);

/// Moves `proc` out of a Waiting-family state after its wait ended.
/// Waiting -> Ready, WaitandSuspend -> Suspend.
void wake(Ctx& ctx, ProcessId proc, Trigger trigger);

/// Blocks the current process on a resource with an optional finite timeout.
void block(Ctx& ctx, ProcessId proc, WaitReason why, std::optional<Tick> timeout);

/// Puts a process back to Dormant and drops every per-activation field.
void make_dormant(Ctx& ctx, ProcessId proc, Trigger trigger);

}  // namespace detail

}  // namespace a653::sched
