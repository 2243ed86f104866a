#pragma once

#include <optional>
#include <utility>

#include "a653/state.hpp"
#include "a653/step.hpp"

namespace a653::ipc {

// Pure wrappers. A nullopt result means the event guard does not hold; the
// service layer then takes its blocking or error path.

std::optional<SystemState> send_queuing_message(const SystemState& s, PortId port, MessageId msg,
                                                VariantToggles toggles = {});
std::optional<std::pair<SystemState, MessageId>> receive_queuing_message(const SystemState& s, PortId port,
                                                                         VariantToggles toggles = {});
std::optional<SystemState> unblock_from_port(const SystemState& s, PortId port, VariantToggles toggles = {});

std::optional<SystemState> write_sampling_message(const SystemState& s, PortId port, MessageId msg);
std::optional<StoredMessage> read_sampling_message(const SystemState& s, PortId port);

std::optional<SystemState> display_blackboard(const SystemState& s, BlackboardId bb, MessageId msg);
std::optional<MessageId> read_blackboard(const SystemState& s, BlackboardId bb);
SystemState clear_blackboard(const SystemState& s, BlackboardId bb);

std::optional<SystemState> buffer_send(const SystemState& s, BufferId buf, MessageId msg);
std::optional<std::pair<SystemState, MessageId>> buffer_receive(const SystemState& s, BufferId buf,
                                                                VariantToggles toggles = {});

std::optional<SystemState> semaphore_wait(const SystemState& s, SemaphoreId sem);
/// nullopt when the value is already at its maximum.
std::optional<SystemState> semaphore_signal(const SystemState& s, SemaphoreId sem);

SystemState event_set(const SystemState& s, EventObjId ev);
SystemState event_reset(const SystemState& s, EventObjId ev);
/// True when a WAIT_EVENT would pass without blocking.
[[nodiscard]] bool event_is_up(const SystemState& s, EventObjId ev);

/// Index of the waiter the discipline selects next.
[[nodiscard]] std::size_t pick_waiter(const SystemState& s, const std::vector<Waiter>& waiting, Discipline d);

/// Every message currently held in a queue, port msgspace, blackboard or
/// waiter record, plus delivered ones. Used for the conservation check.
struct MessageCensus {
    /// Count of exclusive homes per message id (queues, waiters, delivered).
    std::vector<int> exclusive;
    MessageSet shared;  ///< sampling and blackboard msgspaces
};
[[nodiscard]] MessageCensus census(const SystemState& s);

/// Message ids in a queuing channel: source queue, destination queues and
/// messages carried by blocked senders are not included.
[[nodiscard]] MessageSet channel_contents(const SystemState& s, PortId port);

namespace detail {

// Mutating cores used by the services.
void queuing_insert(Ctx& ctx, PortId port, MessageId msg);
std::optional<MessageId> queuing_take(Ctx& ctx, PortId port);
/// Moves messages along the port's channel and serves waiters until no
/// further progress is possible.
void queuing_settle(Ctx& ctx, PortId port);
void queuing_clear(Ctx& ctx, PortId port);
void sampling_write(Ctx& ctx, PortId port, MessageId msg);

void blackboard_display(Ctx& ctx, BlackboardId bb, MessageId msg);
void blackboard_clear(Ctx& ctx, BlackboardId bb);

/// Hands the message to a waiting receiver or appends it. Caller checked room.
void buffer_put(Ctx& ctx, BufferId buf, MessageId msg);
std::optional<MessageId> buffer_take(Ctx& ctx, BufferId buf);

void semaphore_signal(Ctx& ctx, SemaphoreId sem);
void event_set(Ctx& ctx, EventObjId ev);

/// Discards a message: it counts as delivered from now on.
void discard(Ctx& ctx, MessageId msg);

}  // namespace detail

}  // namespace a653::ipc
