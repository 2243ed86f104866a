#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "a653/config.hpp"
#include "a653/types.hpp"

namespace a653 {

enum class StartKind : std::uint8_t { None, Normal, Delayed };

/// What a Waiting-family process is blocked on.
enum class WaitKind : std::uint8_t {
    None,
    PartitionStart,  ///< started during initialization, waits for NORMAL
    Delay,           ///< delayed start, delay not yet elapsed
    ReleasePoint,    ///< periodic process waiting for its release point
    TimedWait,
    QueuingPort,
    Buffer,
    Blackboard,
    Semaphore,
    Event,
};

struct WaitReason {
    WaitKind kind = WaitKind::None;
    std::uint16_t object = 0;
    auto operator<=>(const WaitReason&) const = default;
};

[[nodiscard]] bool is_process_queue(WaitKind k);

struct ProcessRec {
    ProcessId id;
    PartitionId partition;
    ProcessState state = ProcessState::Dormant;
    int base_priority = 0;
    int current_priority = 0;
    std::optional<Tick> period;          ///< nullopt: aperiodic (infinite period)
    std::optional<Tick> time_capacity;   ///< nullopt: infinite
    std::optional<Tick> deadline_time;
    std::optional<Tick> release_point;   ///< release point of the current activation
    std::optional<Tick> delay_time;
    StartKind start_kind = StartKind::None;
    WaitReason wait;
    Tick ready_since = 0;
    bool is_error_handler = false;
    std::optional<ProcessId> preempted_process;
    PartitionId creator_partition;

    [[nodiscard]] bool periodic() const { return period.has_value(); }
    [[nodiscard]] std::optional<Tick> next_release() const;
};

struct TimeoutEntry {
    ProcessState target = ProcessState::Ready;
    Tick at = 0;
};

struct StoredMessage {
    MessageId id = 0;
    Tick at = 0;
};

struct Waiter {
    ProcessId proc;
    Tick since = 0;
    std::optional<MessageId> msg;
};

struct ErrorStatus {
    ErrorCode code = ErrorCode::ApplicationError;
    std::optional<ProcessId> failed_process;
};

struct PartitionRec {
    PartitionId id;
    PartitionMode mode = PartitionMode::ColdStart;
    int lock_level = 1;
    std::optional<ProcessId> lock_holder;
    std::optional<ProcessId> error_handler;
    std::optional<ErrorStatus> last_error;
};

/// Sampling ports use `msgspace`; queuing ports use `queue` and `waiting`.
struct PortRec {
    PortId id;
    bool created = false;
    std::optional<StoredMessage> msgspace;
    std::vector<StoredMessage> queue;
    std::vector<Waiter> waiting;
};

struct BufferRec {
    BufferId id;
    PartitionId partition;
    std::vector<StoredMessage> queue;
    std::vector<Waiter> waiting;
};

struct BlackboardRec {
    BlackboardId id;
    PartitionId partition;
    std::optional<MessageId> msgspace;
    BlackboardIndicator indicator = BlackboardIndicator::Empty;
    std::vector<Waiter> waiting;
};

struct SemaphoreRec {
    SemaphoreId id;
    PartitionId partition;
    int value = 0;
    int max_value = 1;
    std::vector<Waiter> waiting;
};

struct EventObjRec {
    EventObjId id;
    PartitionId partition;
    EventFlag flag = EventFlag::Down;
    std::vector<Waiter> waiting;
};

/// Set of message ids from the finite pool.
class MessageSet {
public:
    [[nodiscard]] bool contains(MessageId m) const { return m >= 1 && m <= 64 && ((bits_ >> (m - 1)) & 1U); }
    void insert(MessageId m) { bits_ |= (std::uint64_t{1} << (m - 1)); }
    void erase(MessageId m) { bits_ &= ~(std::uint64_t{1} << (m - 1)); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
    [[nodiscard]] bool empty() const { return bits_ == 0; }
    [[nodiscard]] std::uint64_t bits() const { return bits_; }
    [[nodiscard]] bool subset_of(const MessageSet& o) const { return (bits_ & ~o.bits_) == 0; }
    [[nodiscard]] std::vector<MessageId> ids() const;
    auto operator<=>(const MessageSet&) const = default;

private:
    std::uint64_t bits_ = 0;
};

/// The complete mutable world. A value type: copies are independent
/// snapshots; the static configuration is shared read-only.
struct SystemState {
    std::shared_ptr<const ScenarioConfig> config;

    Tick clock_tick = 0;
    Tick tick_len = 1;
    bool need_reschedule = true;
    bool need_procresch = false;
    std::optional<PartitionId> current_partition;
    std::optional<ProcessId> current_process;
    bool module_shutdown = false;

    std::vector<PartitionRec> partitions;
    std::vector<std::optional<ProcessRec>> processes;  ///< created processes only
    std::vector<PortRec> ports;
    std::vector<std::optional<BufferRec>> buffers;
    std::vector<std::optional<BlackboardRec>> blackboards;
    std::vector<std::optional<SemaphoreRec>> semaphores;
    std::vector<std::optional<EventObjRec>> events;
    MessageSet used_messages;
    /// Messages consumed by a receiver or discarded (overwritten, cleared,
    /// flushed by a restart).
    MessageSet delivered_messages;
    std::vector<std::optional<TimeoutEntry>> timeout_trigger;

    [[nodiscard]] const ScenarioConfig& cfg() const { return *config; }
    [[nodiscard]] const ScheduleTable& schedule() const { return config->schedule; }
    [[nodiscard]] Tick now() const { return clock_tick * tick_len; }

    [[nodiscard]] bool has_process(ProcessId p) const {
        return p.index() < processes.size() && processes[p.index()].has_value();
    }
    [[nodiscard]] ProcessRec& proc(ProcessId p) { return *processes[p.index()]; }
    [[nodiscard]] const ProcessRec& proc(ProcessId p) const { return *processes[p.index()]; }
    [[nodiscard]] PartitionRec& part(PartitionId p) { return partitions[p.index()]; }
    [[nodiscard]] const PartitionRec& part(PartitionId p) const { return partitions[p.index()]; }

    [[nodiscard]] std::vector<ProcessId> processes_of(PartitionId part) const;
    [[nodiscard]] std::optional<MessageId> fresh_message() const;

    /// Canonical byte encoding of every dynamic field.
    [[nodiscard]] std::string serialize() const;
    [[nodiscard]] std::uint64_t digest() const;
    /// Human-readable dump, stable across runs.
    [[nodiscard]] std::string describe() const;
};

bool operator==(const SystemState& a, const SystemState& b);

std::uint64_t fnv1a64(std::string_view bytes);

/// Initial state: every partition COLD_START with lock level 1, no
/// processes, nothing scheduled. Runs static validation first.
SystemState new_state(std::shared_ptr<const ScenarioConfig> config);
SystemState new_state(const ScenarioConfig& config);

/// True when every invariant of the catalog holds.
bool validate(const SystemState& s);

}  // namespace a653
