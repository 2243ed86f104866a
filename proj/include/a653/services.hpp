#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a653/state.hpp"
#include "a653/step.hpp"

namespace a653 {

/// Argument kinds of the service catalog. Objects are passed by name.
enum class ArgKind : std::uint8_t {
    Process,
    Mode,
    Priority,
    Delay,    ///< natural ticks
    Timeout,  ///< natural ticks or `inf`
    SamplingPort,
    QueuingPort,
    Buffer,
    Blackboard,
    Semaphore,
    Event,
    ErrorCode,
};

enum class ServiceGroup : std::uint8_t { Partition, Process, Time, InterPartition, IntraPartition, Health };

struct ServiceInfo {
    std::string_view name;
    ServiceGroup group;
    std::vector<ArgKind> args;
};

/// All services, in catalog order.
const std::vector<ServiceInfo>& service_catalog();
const ServiceInfo* find_service(std::string_view name);

struct ServiceCall {
    std::string service;
    /// nullopt: the initialization flow of the current partition.
    std::optional<ProcessId> caller;
    std::vector<std::string> args;

    auto operator<=>(const ServiceCall&) const = default;
};

/// Recorded when the caller blocks; the return code arrives with the wake-up
/// (NO_ERROR) or with the time-out (TIMED_OUT).
struct PendingCall {
    std::string service;
    ProcessId proc;
    std::optional<Tick> expires;
};

struct ServiceResult {
    SystemState state;
    ReturnCode return_code = ReturnCode::NoError;
    std::vector<std::pair<std::string, std::string>> out_values;
    std::optional<PendingCall> blocked;
    StepLog log;
};

/// True when the caller may issue a service now: a process must be the
/// running one; the init flow needs a current partition in a START mode.
[[nodiscard]] bool caller_valid(const SystemState& s, const std::optional<ProcessId>& caller);

/// Whether the call names the caller itself as its target process.
[[nodiscard]] bool current_process_flag(const SystemState& s, const ServiceCall& call);

/// Error part first (state unchanged on any error), then the normal part.
/// Throws UnknownServiceError, InvalidModeError for an invalid caller.
ServiceResult invoke(const SystemState& s, const ServiceCall& call, VariantToggles toggles);

/// Renders `SERVICE(arg,...)` with the caller name in front.
std::string describe_call(const ScenarioConfig& cfg, const ServiceCall& call);

}  // namespace a653
