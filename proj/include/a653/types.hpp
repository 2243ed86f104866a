#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace a653 {

using Tick = std::int64_t;

/// Index-backed identifier. The tag keeps partitions, processes and the IPC
/// objects from being mixed up; the value indexes the matching table in the
/// scenario configuration.
template <class Tag>
struct Id {
    std::uint16_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::uint16_t v) : value(v) {}
    constexpr explicit Id(std::size_t v) : value(static_cast<std::uint16_t>(v)) {}
    constexpr explicit Id(int v) : value(static_cast<std::uint16_t>(v)) {}

    [[nodiscard]] constexpr std::size_t index() const { return value; }
    auto operator<=>(const Id&) const = default;
};

using PartitionId = Id<struct PartitionTag>;
using ProcessId = Id<struct ProcessTag>;
using PortId = Id<struct PortTag>;
using ChannelId = Id<struct ChannelTag>;
using BufferId = Id<struct BufferTag>;
using BlackboardId = Id<struct BlackboardTag>;
using SemaphoreId = Id<struct SemaphoreTag>;
using EventObjId = Id<struct EventObjTag>;

/// Messages are opaque. Ids are drawn from a finite pool 1..N (N <= 64).
using MessageId = std::uint32_t;
inline constexpr std::uint32_t kMaxMessagePool = 64;

enum class PartitionMode : std::uint8_t { Idle, ColdStart, WarmStart, Normal };

/// Waiting is split three ways: Suspend (suspended only), Waiting (blocked on
/// a resource, timer, release point or partition start), WaitandSuspend
/// (both at once).
enum class ProcessState : std::uint8_t { Dormant, Ready, Running, Waiting, Suspend, WaitandSuspend };

enum class PortKind : std::uint8_t { Sampling, Queuing };
enum class Direction : std::uint8_t { Source, Destination };
enum class Discipline : std::uint8_t { Fifo, Priority };
enum class BlackboardIndicator : std::uint8_t { Empty, Occupied };
enum class EventFlag : std::uint8_t { Down, Up };

enum class ReturnCode : std::uint8_t {
    NoError,
    NoAction,
    InvalidParam,
    InvalidMode,
    NotAvailable,
    TimedOut,
    InvalidConfig,
};

enum class ErrorCode : std::uint8_t {
    DeadlineMissed,
    ApplicationError,
    NumericError,
    IllegalRequest,
    StackOverflow,
    MemoryViolation,
    HardwareFault,
    PowerFail,
};
inline constexpr int kErrorCodeCount = 8;

enum class ErrorLevel : std::uint8_t { Module, Partition, Process };

enum class RecoveryAction : std::uint8_t {
    ModuleShutdown,
    ModuleReset,
    PartitionIdle,
    PartitionColdRestart,
    PartitionWarmRestart,
    ProcessErrorHandler,
};

/// Defective service text versus its repaired semantics.
enum class Variant : std::uint8_t { AsWritten, Corrected };

/// Which abstract process-transition relation to check against.
enum class TransitionModelVariant : std::uint8_t { AsFigured, Augmented };

struct VariantToggles {
    Variant resume = Variant::Corrected;
    Variant send_queuing = Variant::Corrected;
    Variant receive_buffer = Variant::Corrected;
    auto operator<=>(const VariantToggles&) const = default;
};

[[nodiscard]] bool is_start_mode(PartitionMode m);
/// Waiting, Suspend and WaitandSuspend all read as "Waiting" in the standard.
[[nodiscard]] ProcessState standard_view(ProcessState s);
[[nodiscard]] bool is_waiting_family(ProcessState s);

std::string_view to_string(PartitionMode m);
std::string_view to_string(ProcessState s);
std::string_view to_string(ReturnCode r);
std::string_view to_string(ErrorCode e);
std::string_view to_string(ErrorLevel l);
std::string_view to_string(RecoveryAction a);
std::string_view to_string(Variant v);
std::string_view to_string(TransitionModelVariant v);
std::string_view to_string(Discipline d);
std::string_view to_string(Direction d);

std::optional<PartitionMode> parse_partition_mode(std::string_view s);
std::optional<ProcessState> parse_process_state(std::string_view s);
std::optional<ErrorCode> parse_error_code(std::string_view s);
std::optional<ErrorLevel> parse_error_level(std::string_view s);
std::optional<RecoveryAction> parse_recovery_action(std::string_view s);
std::optional<Variant> parse_variant(std::string_view s);
std::optional<TransitionModelVariant> parse_model_variant(std::string_view s);

}  // namespace a653
