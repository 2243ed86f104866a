#pragma once

#include <optional>

#include "a653/state.hpp"
#include "a653/step.hpp"

namespace a653::hm {

enum class Route : std::uint8_t { ModuleShutdown, ModuleReset, Partition, ErrorHandler };

/// Where an error comes from. Both unset means the module itself.
struct Source {
    std::optional<ProcessId> proc;
    std::optional<PartitionId> part;
};

struct RaiseOutcome {
    SystemState state;
    Route route = Route::Partition;
    RecoveryAction action = RecoveryAction::PartitionIdle;
    StepLog log;
};

/// Routes the error through the HM tables and applies the single recovery
/// action selected. Throws ModuleDownError, UnconfiguredError.
RaiseOutcome raise_error(const SystemState& s, ErrorCode code, std::optional<ErrorLevel> level_hint, Source source);

SystemState hm_recoveryaction_shutdown_module(const SystemState& s, ErrorCode code);
SystemState hm_recoveryaction_partition(const SystemState& s, PartitionId part, ErrorCode code);
SystemState hm_recoveryaction_errorhandler(const SystemState& s, PartitionId part, ErrorCode code,
                                           std::optional<ProcessId> failed = std::nullopt);

/// Throws AlreadyExistsError, InvalidModeError.
SystemState create_error_handler(const SystemState& s, PartitionId part);

namespace detail {

struct Decision {
    Route route = Route::Partition;
    RecoveryAction action = RecoveryAction::PartitionIdle;
    std::optional<PartitionId> part;
};

/// Pure routing decision; throws UnconfiguredError on a table miss.
Decision decide(const SystemState& s, ErrorCode code, std::optional<ErrorLevel> level_hint, const Source& source);

Route raise(Ctx& ctx, ErrorCode code, std::optional<ErrorLevel> level_hint, const Source& source);
void apply_partition_action(Ctx& ctx, PartitionId part, RecoveryAction action);
void activate_handler(Ctx& ctx, PartitionId part, ErrorCode code, std::optional<ProcessId> failed);
void module_reset(Ctx& ctx);

}  // namespace detail

}  // namespace a653::hm
