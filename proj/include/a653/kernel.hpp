#pragma once

#include <optional>
#include <string>
#include <vector>

#include "a653/state.hpp"
#include "a653/step.hpp"

namespace a653::kernel {

enum class ModeClass : std::uint8_t { Start, Normal };

[[nodiscard]] std::optional<ModeClass> mode_class(PartitionMode m);

/// One row of the abstract process transition relation.
struct TransitionRule {
    ModeClass mode = ModeClass::Normal;
    ProcessState from = ProcessState::Dormant;
    ProcessState to = ProcessState::Dormant;
    Trigger trigger = Trigger::Schedule;
    bool augmented_only = false;
    std::string source;  ///< where the row comes from
};

/// The relation as shipped in the data table (both variants; rows marked
/// augmented_only are absent from AS_FIGURED).
const std::vector<TransitionRule>& transition_rules();

/// Membership test. Without a trigger, any trigger matches.
[[nodiscard]] bool transition_allowed(TransitionModelVariant variant, PartitionMode mode, ProcessState from,
                                      ProcessState to, std::optional<Trigger> trigger = std::nullopt);

/// Abstract partition mode graph.
[[nodiscard]] bool mode_transition_allowed(PartitionMode from, PartitionMode to);

SystemState partition_mode_transition(const SystemState& s, PartitionId part, PartitionMode newmode);

/// Abstract process_state_transition: frame condition, only the process
/// state changes. Throws IllegalStateTransition.
SystemState process_state_transition(const SystemState& s, PartitionId part, ProcessId proc, ProcessState newstate,
                                     TransitionModelVariant variant);

/// Creates the configured process `proc` in `part` in state Dormant.
SystemState create_process(const SystemState& s, PartitionId part, ProcessId proc);

struct AbstractBinding {
    std::string event;
    PartitionId part;
    std::optional<ProcessId> proc;
    std::optional<ProcessState> newstate;
    std::optional<PartitionMode> newmode;
    auto operator<=>(const AbstractBinding&) const = default;
};

/// Guard-satisfying abstract events over the finite parameter domains of `s`.
std::vector<AbstractBinding> enabled_abstract_events(const SystemState& s,
                                                     TransitionModelVariant variant = TransitionModelVariant::Augmented);

namespace detail {

/// Mode change with all side effects on processes and objects. Caller has
/// already checked legality.
void apply_partition_mode(Ctx& ctx, PartitionId part, PartitionMode newmode);
void add_process(SystemState& s, PartitionId creator, ProcessId proc);
/// Destroys every process and intra-partition object of the partition.
void clear_partition(Ctx& ctx, PartitionId part);
/// Drops a process from every waiting queue, discarding a carried message.
void remove_from_waiting_queues(Ctx& ctx, ProcessId proc);

}  // namespace detail

}  // namespace a653::kernel
