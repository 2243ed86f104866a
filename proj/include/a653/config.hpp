#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "a653/types.hpp"

namespace a653 {

struct HmEntry {
    ErrorLevel level = ErrorLevel::Partition;
    RecoveryAction action = RecoveryAction::PartitionIdle;
    auto operator<=>(const HmEntry&) const = default;
};

using HmTable = std::map<ErrorCode, HmEntry>;

struct Window {
    PartitionId partition;
    Tick start = 0;
    Tick end = 0;
};

struct ScheduleTable {
    Tick mtf = 0;
    std::vector<Window> windows;

    /// Window covering the given absolute time, if any.
    [[nodiscard]] const Window* window_at(Tick t) const;
    /// True when t is the start or end of some window (modulo the MTF).
    [[nodiscard]] bool is_boundary(Tick t) const;
};

struct PartitionConfig {
    std::string name;
    Tick period = 0;
    HmTable multi_part_hm;
    HmTable partition_hm;
};

struct ProcessConfig {
    std::string name;
    PartitionId partition;
    int priority = 0;
    std::optional<Tick> period;         ///< nullopt: aperiodic
    std::optional<Tick> time_capacity;  ///< nullopt: infinite
    bool is_error_handler = false;
};

struct PortConfig {
    std::string name;
    PortKind kind = PortKind::Queuing;
    Direction direction = Direction::Source;
    int max_msg_num = 1;
    Discipline discipline = Discipline::Fifo;
    PartitionId partition;
    std::optional<ChannelId> channel;
};

struct ChannelConfig {
    std::string name;
    PortId source;
    std::vector<PortId> destinations;
};

struct BufferConfig {
    std::string name;
    PartitionId partition;
    int max_msg_num = 1;
    Discipline discipline = Discipline::Fifo;
};

struct BlackboardConfig {
    std::string name;
    PartitionId partition;
};

struct SemaphoreConfig {
    std::string name;
    PartitionId partition;
    int initial = 0;
    int max_value = 1;
    Discipline discipline = Discipline::Fifo;
};

struct EventObjConfig {
    std::string name;
    PartitionId partition;
};

/// One scripted service invocation. `caller` is a process name or `main`
/// (the initialization flow of the partition owning the current window).
struct ScriptEntry {
    Tick tick = 0;
    std::string caller;
    std::string service;
    std::vector<std::string> args;
};

/// Bounds for free exploration. Timeouts use nullopt for INFINITE.
struct ExploreSettings {
    int calls_per_tick = 1;
    std::optional<int> max_calls;
    std::vector<std::string> services;
    std::vector<Tick> delays{0, 2};
    std::vector<std::optional<Tick>> timeouts{Tick{0}, Tick{2}};
    std::vector<int> priorities;
    std::size_t max_states = 1'000'000;
    double max_seconds = 60.0;
};

inline constexpr int kMaxQueueBound = 64;

struct ScenarioConfig {
    Tick tick_len = 1;
    int min_priority = 1;
    int max_priority = 63;
    int max_lock_level = 16;
    std::uint32_t message_pool = 16;
    ScheduleTable schedule;
    std::vector<PartitionConfig> partitions;
    /// Declared processes followed by one error-handler slot per partition.
    std::vector<ProcessConfig> processes;
    std::vector<PortConfig> ports;
    std::vector<ChannelConfig> channels;
    std::vector<BufferConfig> buffers;
    std::vector<BlackboardConfig> blackboards;
    std::vector<SemaphoreConfig> semaphores;
    std::vector<EventObjConfig> events;
    HmTable module_hm;
    VariantToggles variants;
    std::vector<ScriptEntry> script;
    ExploreSettings explore;

    [[nodiscard]] std::optional<PartitionId> find_partition(std::string_view name) const;
    [[nodiscard]] std::optional<ProcessId> find_process(std::string_view name) const;
    [[nodiscard]] std::optional<PortId> find_port(std::string_view name) const;
    [[nodiscard]] std::optional<BufferId> find_buffer(std::string_view name) const;
    [[nodiscard]] std::optional<BlackboardId> find_blackboard(std::string_view name) const;
    [[nodiscard]] std::optional<SemaphoreId> find_semaphore(std::string_view name) const;
    [[nodiscard]] std::optional<EventObjId> find_event(std::string_view name) const;

    [[nodiscard]] ProcessId error_handler_slot(PartitionId part) const;
    [[nodiscard]] const std::string& name(PartitionId id) const { return partitions[id.index()].name; }
    [[nodiscard]] const std::string& name(ProcessId id) const { return processes[id.index()].name; }
    [[nodiscard]] const std::string& name(PortId id) const { return ports[id.index()].name; }
    [[nodiscard]] const std::string& name(BufferId id) const { return buffers[id.index()].name; }
    [[nodiscard]] const std::string& name(BlackboardId id) const { return blackboards[id.index()].name; }
    [[nodiscard]] const std::string& name(SemaphoreId id) const { return semaphores[id.index()].name; }
    [[nodiscard]] const std::string& name(EventObjId id) const { return events[id.index()].name; }
};

/// Parses the `key = value` scenario format and runs static validation.
/// Throws ConfigError naming the offending line or key.
ScenarioConfig parse_config(std::string_view text, std::string_view origin = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Static checks: schedule table shape, port/channel wiring, HM tables,
/// process attributes. Throws ConfigError.
void validate_config(const ScenarioConfig& config);

/// Parses a timeout token: a natural number or `inf`.
std::optional<std::optional<Tick>> parse_timeout(std::string_view s);

}  // namespace a653
