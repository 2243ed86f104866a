#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "a653/services.hpp"
#include "a653/state.hpp"
#include "a653/step.hpp"

namespace a653 {

/// Kernel-side events of the tick pipeline, in canonical order.
enum class StageKind : std::uint8_t { TickTock, TimeOut, ReleasePoint, DeadlineMiss, PartitionSchedule, ProcessSchedule };

std::string_view to_string(StageKind k);

struct StageEvent {
    StageKind kind = StageKind::TickTock;
    std::optional<ProcessId> proc;  ///< ReleasePoint and DeadlineMiss only
    auto operator<=>(const StageEvent&) const = default;
};

/// A script entry whose caller could not run when its turn came.
struct ScriptSkip {
    std::size_t index = 0;
    auto operator<=>(const ScriptSkip&) const = default;
};

using Event = std::variant<StageEvent, ServiceCall, ScriptSkip>;

/// Stable label used in traces and counterexamples.
std::string event_label(const ScenarioConfig& cfg, const Event& e);
/// Name used for pairing lookups: the service name or the stage name.
std::string event_kind_name(const Event& e);

struct StepResult {
    SystemState state;
    StepLog log;
    std::optional<ReturnCode> return_code;
    std::vector<std::pair<std::string, std::string>> out_values;
};

[[nodiscard]] bool stage_enabled(const SystemState& s, const StageEvent& e);

/// Every enabled stage event except ticktock.
std::vector<StageEvent> urgent_stage_events(const SystemState& s);

/// Applies one event. Stage events are applied only when enabled (callers
/// check); HM table misses during a deadline miss are traced, not thrown.
StepResult apply_event(const SystemState& s, const Event& e, VariantToggles toggles);

}  // namespace a653
