#include "a653/ipc.hpp"

#include <algorithm>

#include "a653/scheduler.hpp"

namespace a653::ipc {

std::size_t pick_waiter(const SystemState& s, const std::vector<Waiter>& waiting, Discipline d) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < waiting.size(); ++i) {
        const auto& w = waiting[i];
        const auto& b = waiting[best];
        if (d == Discipline::Priority) {
            const int pw = s.proc(w.proc).current_priority;
            const int pb = s.proc(b.proc).current_priority;
            if (pw != pb) {
                if (pw > pb) best = i;
                continue;
            }
        }
        if (w.since < b.since) best = i;
    }
    return best;
}

namespace {

struct ChannelEnds {
    PortId src;
    std::optional<PortId> dst;
};

/// Source and destination of the queuing channel through `port`. A port
/// outside any channel is its own source.
ChannelEnds ends(const SystemState& s, PortId port) {
    const auto& pc = s.cfg().ports[port.index()];
    if (!pc.channel) return {port, std::nullopt};
    const auto& ch = s.cfg().channels[pc.channel->index()];
    return {ch.source, ch.destinations.front()};
}

int capacity(const SystemState& s, PortId port) { return s.cfg().ports[port.index()].max_msg_num; }

bool in_any_msgspace(const SystemState& s, MessageId m) {
    for (const auto& p : s.ports) {
        if (p.msgspace && p.msgspace->id == m) return true;
    }
    for (const auto& b : s.blackboards) {
        if (b && b->msgspace == m) return true;
    }
    return false;
}

Ctx make_ctx(SystemState& s, StepLog& log, VariantToggles t) { return Ctx{s, log, t, false}; }

ProcessId acting(const SystemState& s) { return s.current_process.value_or(ProcessId{}); }

}  // namespace

namespace detail {

void discard(Ctx& ctx, MessageId msg) { ctx.s.delivered_messages.insert(msg); }

void queuing_settle(Ctx& ctx, PortId port) {
    auto& s = ctx.s;
    const auto [src_id, dst_id] = ends(s, port);
    const auto discipline_of = [&](PortId p) { return s.cfg().ports[p.index()].discipline; };
    bool progress = true;
    while (progress) {
        progress = false;
        auto& src = s.ports[src_id.index()];
        if (dst_id) {
            auto& dst = s.ports[dst_id->index()];
            while (dst.created && !src.queue.empty() && static_cast<int>(dst.queue.size()) < capacity(s, *dst_id)) {
                dst.queue.push_back(src.queue.front());
                src.queue.erase(src.queue.begin());
                progress = true;
            }
            while (!dst.queue.empty() && !dst.waiting.empty()) {
                const auto idx = pick_waiter(s, dst.waiting, discipline_of(*dst_id));
                const ProcessId receiver = dst.waiting[idx].proc;
                dst.waiting.erase(dst.waiting.begin() + static_cast<std::ptrdiff_t>(idx));
                const MessageId m = dst.queue.front().id;
                dst.queue.erase(dst.queue.begin());
                s.delivered_messages.insert(m);
                ctx.note({NoteKind::QueuingReceive, receiver, {}, {}, {}, {}, dst_id->value, m});
                ctx.trace("receive_queuing", s.proc(receiver).partition, receiver, "m" + std::to_string(m));
                sched::detail::wake(ctx, receiver, Trigger::ResourceAvailable);
                progress = true;
            }
        }
        while (!src.waiting.empty() && static_cast<int>(src.queue.size()) < capacity(s, src_id)) {
            const auto idx = pick_waiter(s, src.waiting, discipline_of(src_id));
            const Waiter w = src.waiting[idx];
            src.waiting.erase(src.waiting.begin() + static_cast<std::ptrdiff_t>(idx));
            const MessageId m = w.msg.value_or(0);
            if (ctx.toggles.send_queuing == Variant::Corrected) {
                src.queue.push_back({m, s.clock_tick});
            }
            ctx.note({NoteKind::QueuingSendUnblocked, w.proc, {}, {}, {}, {}, src_id.value, m});
            ctx.trace("send_queuing_unblocked", s.proc(w.proc).partition, w.proc, "m" + std::to_string(m));
            sched::detail::wake(ctx, w.proc, Trigger::ResourceAvailable);
            progress = true;
        }
    }
}

void queuing_insert(Ctx& ctx, PortId port, MessageId msg) {
    auto& s = ctx.s;
    s.used_messages.insert(msg);
    s.ports[port.index()].queue.push_back({msg, s.clock_tick});
    ctx.note({NoteKind::QueuingSend, acting(s), {}, {}, {}, {}, port.value, msg});
    queuing_settle(ctx, port);
}

std::optional<MessageId> queuing_take(Ctx& ctx, PortId port) {
    auto& s = ctx.s;
    auto& q = s.ports[port.index()].queue;
    if (q.empty()) return std::nullopt;
    const MessageId m = q.front().id;
    q.erase(q.begin());
    s.delivered_messages.insert(m);
    ctx.note({NoteKind::QueuingReceive, acting(s), {}, {}, {}, {}, port.value, m});
    queuing_settle(ctx, port);
    return m;
}

void queuing_clear(Ctx& ctx, PortId port) {
    auto& q = ctx.s.ports[port.index()].queue;
    for (const auto& m : q) discard(ctx, m.id);
    q.clear();
    queuing_settle(ctx, port);
}

void sampling_write(Ctx& ctx, PortId port, MessageId msg) {
    auto& s = ctx.s;
    s.used_messages.insert(msg);
    std::vector<MessageId> old;
    const auto store = [&](PortId p) {
        auto& rec = s.ports[p.index()];
        if (rec.msgspace) old.push_back(rec.msgspace->id);
        rec.msgspace = StoredMessage{msg, s.clock_tick};
    };
    store(port);
    if (const auto& ch = s.cfg().ports[port.index()].channel) {
        for (PortId d : s.cfg().channels[ch->index()].destinations) {
            if (s.ports[d.index()].created) store(d);
        }
    }
    for (MessageId m : old) {
        if (!in_any_msgspace(s, m)) discard(ctx, m);
    }
    ctx.note({NoteKind::SamplingWrite, acting(s), {}, {}, {}, {}, port.value, msg});
}

void blackboard_display(Ctx& ctx, BlackboardId bb, MessageId msg) {
    auto& s = ctx.s;
    auto& rec = *s.blackboards[bb.index()];
    s.used_messages.insert(msg);
    const auto old = rec.msgspace;
    rec.msgspace = msg;
    rec.indicator = BlackboardIndicator::Occupied;
    const auto waiting = std::move(rec.waiting);
    rec.waiting.clear();
    for (const auto& w : waiting) sched::detail::wake(ctx, w.proc, Trigger::ResourceAvailable);
    if (old && !in_any_msgspace(s, *old)) discard(ctx, *old);
    ctx.note({NoteKind::BlackboardDisplay, acting(s), {}, {}, {}, {}, bb.value, msg});
}

void blackboard_clear(Ctx& ctx, BlackboardId bb) {
    auto& s = ctx.s;
    auto& rec = *s.blackboards[bb.index()];
    const auto old = rec.msgspace;
    rec.msgspace.reset();
    rec.indicator = BlackboardIndicator::Empty;
    if (old && !in_any_msgspace(s, *old)) discard(ctx, *old);
    ctx.note({NoteKind::BlackboardClear, acting(s), {}, {}, {}, {}, bb.value, 0});
}

void buffer_put(Ctx& ctx, BufferId buf, MessageId msg) {
    auto& s = ctx.s;
    auto& rec = *s.buffers[buf.index()];
    s.used_messages.insert(msg);
    ctx.note({NoteKind::BufferSend, acting(s), {}, {}, {}, {}, buf.value, msg});
    if (!rec.waiting.empty() && !rec.waiting.front().msg) {
        const auto idx = pick_waiter(s, rec.waiting, s.cfg().buffers[buf.index()].discipline);
        const ProcessId receiver = rec.waiting[idx].proc;
        rec.waiting.erase(rec.waiting.begin() + static_cast<std::ptrdiff_t>(idx));
        s.delivered_messages.insert(msg);
        ctx.note({NoteKind::BufferReceive, receiver, {}, {}, {}, {}, buf.value, msg});
        sched::detail::wake(ctx, receiver, Trigger::ResourceAvailable);
        return;
    }
    rec.queue.push_back({msg, s.clock_tick});
}

std::optional<MessageId> buffer_take(Ctx& ctx, BufferId buf) {
    auto& s = ctx.s;
    auto& rec = *s.buffers[buf.index()];
    if (rec.queue.empty()) return std::nullopt;
    const MessageId m = rec.queue.front().id;
    if (ctx.toggles.receive_buffer == Variant::Corrected) rec.queue.erase(rec.queue.begin());
    s.delivered_messages.insert(m);
    ctx.note({NoteKind::BufferReceive, acting(s), {}, {}, {}, {}, buf.value, m});
    const auto& bc = s.cfg().buffers[buf.index()];
    while (static_cast<int>(rec.queue.size()) < bc.max_msg_num && !rec.waiting.empty() && rec.waiting.front().msg) {
        const auto idx = pick_waiter(s, rec.waiting, bc.discipline);
        const Waiter w = rec.waiting[idx];
        rec.waiting.erase(rec.waiting.begin() + static_cast<std::ptrdiff_t>(idx));
        rec.queue.push_back({*w.msg, s.clock_tick});
        ctx.note({NoteKind::BufferSend, w.proc, {}, {}, {}, {}, buf.value, *w.msg});
        sched::detail::wake(ctx, w.proc, Trigger::ResourceAvailable);
    }
    return m;
}

void semaphore_signal(Ctx& ctx, SemaphoreId sem) {
    auto& s = ctx.s;
    auto& rec = *s.semaphores[sem.index()];
    ctx.note({NoteKind::SemaphoreSignal, acting(s), {}, {}, {}, {}, sem.value, 0});
    if (!rec.waiting.empty()) {
        const auto idx = pick_waiter(s, rec.waiting, s.cfg().semaphores[sem.index()].discipline);
        const ProcessId p = rec.waiting[idx].proc;
        rec.waiting.erase(rec.waiting.begin() + static_cast<std::ptrdiff_t>(idx));
        sched::detail::wake(ctx, p, Trigger::ResourceAvailable);
        return;
    }
    ++rec.value;
}

void event_set(Ctx& ctx, EventObjId ev) {
    auto& s = ctx.s;
    auto& rec = *s.events[ev.index()];
    rec.flag = EventFlag::Up;
    const auto waiting = std::move(rec.waiting);
    rec.waiting.clear();
    for (const auto& w : waiting) sched::detail::wake(ctx, w.proc, Trigger::ResourceAvailable);
    ctx.note({NoteKind::EventSet, acting(s), {}, {}, {}, {}, ev.value, 0});
}

}  // namespace detail

std::optional<SystemState> send_queuing_message(const SystemState& s, PortId port, MessageId msg,
                                                VariantToggles toggles) {
    const auto& pc = s.cfg().ports[port.index()];
    const auto& rec = s.ports[port.index()];
    if (pc.kind != PortKind::Queuing || pc.direction != Direction::Source) return std::nullopt;
    if (msg < 1 || msg > s.cfg().message_pool || s.used_messages.contains(msg)) return std::nullopt;
    if (static_cast<int>(rec.queue.size()) >= pc.max_msg_num || !rec.waiting.empty()) return std::nullopt;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, toggles);
    detail::queuing_insert(ctx, port, msg);
    return out;
}

std::optional<std::pair<SystemState, MessageId>> receive_queuing_message(const SystemState& s, PortId port,
                                                                         VariantToggles toggles) {
    const auto& pc = s.cfg().ports[port.index()];
    const auto& rec = s.ports[port.index()];
    if (pc.kind != PortKind::Queuing || pc.direction != Direction::Destination) return std::nullopt;
    if (rec.queue.empty() || !rec.waiting.empty()) return std::nullopt;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, toggles);
    const auto m = detail::queuing_take(ctx, port);
    return std::make_pair(std::move(out), *m);
}

std::optional<SystemState> unblock_from_port(const SystemState& s, PortId port, VariantToggles toggles) {
    if (s.ports[port.index()].waiting.empty()) return std::nullopt;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, toggles);
    detail::queuing_settle(ctx, port);
    if (out.ports[port.index()].waiting.size() == s.ports[port.index()].waiting.size()) return std::nullopt;
    return out;
}

std::optional<SystemState> write_sampling_message(const SystemState& s, PortId port, MessageId msg) {
    const auto& pc = s.cfg().ports[port.index()];
    if (pc.kind != PortKind::Sampling || pc.direction != Direction::Source) return std::nullopt;
    if (msg < 1 || msg > s.cfg().message_pool || s.used_messages.contains(msg)) return std::nullopt;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, {});
    detail::sampling_write(ctx, port, msg);
    return out;
}

std::optional<StoredMessage> read_sampling_message(const SystemState& s, PortId port) {
    const auto& pc = s.cfg().ports[port.index()];
    if (pc.kind != PortKind::Sampling || pc.direction != Direction::Destination) return std::nullopt;
    return s.ports[port.index()].msgspace;
}

std::optional<SystemState> display_blackboard(const SystemState& s, BlackboardId bb, MessageId msg) {
    if (!s.blackboards[bb.index()]) return std::nullopt;
    if (msg < 1 || msg > s.cfg().message_pool || s.used_messages.contains(msg)) return std::nullopt;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, {});
    detail::blackboard_display(ctx, bb, msg);
    return out;
}

std::optional<MessageId> read_blackboard(const SystemState& s, BlackboardId bb) {
    const auto& rec = s.blackboards[bb.index()];
    if (!rec || rec->indicator != BlackboardIndicator::Occupied) return std::nullopt;
    return rec->msgspace;
}

SystemState clear_blackboard(const SystemState& s, BlackboardId bb) {
    if (!s.blackboards[bb.index()]) return s;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, {});
    detail::blackboard_clear(ctx, bb);
    return out;
}

std::optional<SystemState> buffer_send(const SystemState& s, BufferId buf, MessageId msg) {
    const auto& rec = s.buffers[buf.index()];
    if (!rec) return std::nullopt;
    if (msg < 1 || msg > s.cfg().message_pool || s.used_messages.contains(msg)) return std::nullopt;
    const bool receivers = !rec->waiting.empty() && !rec->waiting.front().msg;
    const bool senders = !rec->waiting.empty() && rec->waiting.front().msg;
    if (senders || (!receivers && static_cast<int>(rec->queue.size()) >= s.cfg().buffers[buf.index()].max_msg_num)) {
        return std::nullopt;
    }
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, {});
    detail::buffer_put(ctx, buf, msg);
    return out;
}

std::optional<std::pair<SystemState, MessageId>> buffer_receive(const SystemState& s, BufferId buf,
                                                                VariantToggles toggles) {
    const auto& rec = s.buffers[buf.index()];
    if (!rec || rec->queue.empty()) return std::nullopt;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, toggles);
    const auto m = detail::buffer_take(ctx, buf);
    return std::make_pair(std::move(out), *m);
}

std::optional<SystemState> semaphore_wait(const SystemState& s, SemaphoreId sem) {
    const auto& rec = s.semaphores[sem.index()];
    if (!rec || rec->value == 0) return std::nullopt;
    SystemState out = s;
    --out.semaphores[sem.index()]->value;
    return out;
}

std::optional<SystemState> semaphore_signal(const SystemState& s, SemaphoreId sem) {
    const auto& rec = s.semaphores[sem.index()];
    if (!rec || (rec->waiting.empty() && rec->value >= rec->max_value)) return std::nullopt;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, {});
    detail::semaphore_signal(ctx, sem);
    return out;
}

SystemState event_set(const SystemState& s, EventObjId ev) {
    if (!s.events[ev.index()]) return s;
    SystemState out = s;
    StepLog log;
    auto ctx = make_ctx(out, log, {});
    detail::event_set(ctx, ev);
    return out;
}

SystemState event_reset(const SystemState& s, EventObjId ev) {
    if (!s.events[ev.index()]) return s;
    SystemState out = s;
    out.events[ev.index()]->flag = EventFlag::Down;
    return out;
}

bool event_is_up(const SystemState& s, EventObjId ev) {
    return s.events[ev.index()] && s.events[ev.index()]->flag == EventFlag::Up;
}

MessageCensus census(const SystemState& s) {
    MessageCensus c;
    c.exclusive.assign(kMaxMessagePool + 1, 0);
    const auto count = [&](MessageId m) {
        if (m >= 1 && m <= kMaxMessagePool) ++c.exclusive[m];
    };
    const auto waiters = [&](const std::vector<Waiter>& ws) {
        for (const auto& w : ws) {
            if (w.msg) count(*w.msg);
        }
    };
    for (const auto& p : s.ports) {
        for (const auto& m : p.queue) count(m.id);
        waiters(p.waiting);
        if (p.msgspace) c.shared.insert(p.msgspace->id);
    }
    for (const auto& b : s.buffers) {
        if (!b) continue;
        for (const auto& m : b->queue) count(m.id);
        waiters(b->waiting);
    }
    for (const auto& b : s.blackboards) {
        if (b && b->msgspace) c.shared.insert(*b->msgspace);
    }
    for (MessageId m : s.delivered_messages.ids()) count(m);
    return c;
}

MessageSet channel_contents(const SystemState& s, PortId port) {
    MessageSet out;
    const auto [src, dst] = ends(s, port);
    for (const auto& m : s.ports[src.index()].queue) out.insert(m.id);
    if (dst) {
        for (const auto& m : s.ports[dst->index()].queue) out.insert(m.id);
    }
    return out;
}

}  // namespace a653::ipc
