#include "a653/types.hpp"

#include <array>
#include <utility>

namespace a653 {

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<std::string_view, E>, N>& table, std::string_view s) {
    for (const auto& [name, value] : table) {
        if (name == s) return value;
    }
    return std::nullopt;
}

constexpr std::array<std::pair<std::string_view, PartitionMode>, 4> kModes{{
    {"IDLE", PartitionMode::Idle},
    {"COLD_START", PartitionMode::ColdStart},
    {"WARM_START", PartitionMode::WarmStart},
    {"NORMAL", PartitionMode::Normal},
}};

constexpr std::array<std::pair<std::string_view, ProcessState>, 6> kStates{{
    {"Dormant", ProcessState::Dormant},
    {"Ready", ProcessState::Ready},
    {"Running", ProcessState::Running},
    {"Waiting", ProcessState::Waiting},
    {"Suspend", ProcessState::Suspend},
    {"WaitandSuspend", ProcessState::WaitandSuspend},
}};

constexpr std::array<std::pair<std::string_view, ReturnCode>, 7> kReturnCodes{{
    {"NO_ERROR", ReturnCode::NoError},
    {"NO_ACTION", ReturnCode::NoAction},
    {"INVALID_PARAM", ReturnCode::InvalidParam},
    {"INVALID_MODE", ReturnCode::InvalidMode},
    {"NOT_AVAILABLE", ReturnCode::NotAvailable},
    {"TIMED_OUT", ReturnCode::TimedOut},
    {"INVALID_CONFIG", ReturnCode::InvalidConfig},
}};

constexpr std::array<std::pair<std::string_view, ErrorCode>, kErrorCodeCount> kErrorCodes{{
    {"DEADLINE_MISSED", ErrorCode::DeadlineMissed},
    {"APPLICATION_ERROR", ErrorCode::ApplicationError},
    {"NUMERIC_ERROR", ErrorCode::NumericError},
    {"ILLEGAL_REQUEST", ErrorCode::IllegalRequest},
    {"STACK_OVERFLOW", ErrorCode::StackOverflow},
    {"MEMORY_VIOLATION", ErrorCode::MemoryViolation},
    {"HARDWARE_FAULT", ErrorCode::HardwareFault},
    {"POWER_FAIL", ErrorCode::PowerFail},
}};

constexpr std::array<std::pair<std::string_view, ErrorLevel>, 3> kLevels{{
    {"MODULE", ErrorLevel::Module},
    {"PARTITION", ErrorLevel::Partition},
    {"PROCESS", ErrorLevel::Process},
}};

constexpr std::array<std::pair<std::string_view, RecoveryAction>, 6> kActions{{
    {"MODULE_SHUTDOWN", RecoveryAction::ModuleShutdown},
    {"MODULE_RESET", RecoveryAction::ModuleReset},
    {"PARTITION_IDLE", RecoveryAction::PartitionIdle},
    {"PARTITION_COLD_RESTART", RecoveryAction::PartitionColdRestart},
    {"PARTITION_WARM_RESTART", RecoveryAction::PartitionWarmRestart},
    {"PROCESS_ERRORHANDLER", RecoveryAction::ProcessErrorHandler},
}};

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<std::string_view, E>, N>& table, E value) {
    for (const auto& [name, v] : table) {
        if (v == value) return name;
    }
    return "?";
}

}  // namespace

bool is_start_mode(PartitionMode m) { return m == PartitionMode::ColdStart || m == PartitionMode::WarmStart; }

ProcessState standard_view(ProcessState s) {
    return is_waiting_family(s) ? ProcessState::Waiting : s;
}

bool is_waiting_family(ProcessState s) {
    return s == ProcessState::Waiting || s == ProcessState::Suspend || s == ProcessState::WaitandSuspend;
}

std::string_view to_string(PartitionMode m) { return name_of(kModes, m); }
std::string_view to_string(ProcessState s) { return name_of(kStates, s); }
std::string_view to_string(ReturnCode r) { return name_of(kReturnCodes, r); }
std::string_view to_string(ErrorCode e) { return name_of(kErrorCodes, e); }
std::string_view to_string(ErrorLevel l) { return name_of(kLevels, l); }
std::string_view to_string(RecoveryAction a) { return name_of(kActions, a); }

std::string_view to_string(Variant v) { return v == Variant::AsWritten ? "as_written" : "corrected"; }

std::string_view to_string(TransitionModelVariant v) {
    return v == TransitionModelVariant::AsFigured ? "as_figured" : "augmented";
}

std::string_view to_string(Discipline d) { return d == Discipline::Fifo ? "fifo" : "priority"; }
std::string_view to_string(Direction d) { return d == Direction::Source ? "src" : "dst"; }

std::optional<PartitionMode> parse_partition_mode(std::string_view s) { return lookup(kModes, s); }
std::optional<ProcessState> parse_process_state(std::string_view s) { return lookup(kStates, s); }
std::optional<ErrorCode> parse_error_code(std::string_view s) { return lookup(kErrorCodes, s); }
std::optional<ErrorLevel> parse_error_level(std::string_view s) { return lookup(kLevels, s); }
std::optional<RecoveryAction> parse_recovery_action(std::string_view s) { return lookup(kActions, s); }

std::optional<Variant> parse_variant(std::string_view s) {
    if (s == "as_written") return Variant::AsWritten;
    if (s == "corrected") return Variant::Corrected;
    return std::nullopt;
}

std::optional<TransitionModelVariant> parse_model_variant(std::string_view s) {
    if (s == "as_figured") return TransitionModelVariant::AsFigured;
    if (s == "augmented") return TransitionModelVariant::Augmented;
    return std::nullopt;
}

}  // namespace a653
