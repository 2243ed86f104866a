#include "a653/invariants.hpp"

#include <array>
#include <functional>

#include "a653/ipc.hpp"

namespace a653 {

namespace {

using PS = ProcessState;

bool ready_like(PS s) { return s == PS::Ready || s == PS::Running || s == PS::Suspend; }
bool waiting_like(PS s) { return s == PS::Waiting || s == PS::WaitandSuspend; }

template <class F>
bool all_processes(const SystemState& s, F&& f) {
    for (const auto& p : s.processes) {
        if (p && !f(*p)) return false;
    }
    return true;
}

template <class F>
bool all_partitions(const SystemState& s, F&& f) {
    for (const auto& p : s.partitions) {
        if (!f(p)) return false;
    }
    return true;
}

/// Visits every waiting list with the partition owning the object (nullopt
/// for ports, whose waiters may only belong to the port's partition by
/// construction of the services).
template <class F>
bool all_waiters(const SystemState& s, F&& f) {
    for (const auto& p : s.ports) {
        for (const auto& w : p.waiting) {
            if (!f(w, s.cfg().ports[p.id.index()].partition)) return false;
        }
    }
    const auto lists = [&](const auto& objs) {
        for (const auto& o : objs) {
            if (!o) continue;
            for (const auto& w : o->waiting) {
                if (!f(w, o->partition)) return false;
            }
        }
        return true;
    };
    return lists(s.buffers) && lists(s.blackboards) && lists(s.semaphores) && lists(s.events);
}

bool has_processes(const SystemState& s, PartitionId part) { return !s.processes_of(part).empty(); }

bool conservation(const SystemState& s) {
    if (!s.delivered_messages.subset_of(s.used_messages)) return false;
    const auto c = ipc::census(s);
    for (MessageId m : s.used_messages.ids()) {
        if (c.exclusive[m] > 1) return false;
        if (c.exclusive[m] == 0 && !c.shared.contains(m)) return false;
    }
    for (MessageId m = 1; m <= kMaxMessagePool; ++m) {
        if (c.exclusive[m] > 0 && !s.used_messages.contains(m)) return false;
    }
    return true;
}

using Pred = std::function<bool(const SystemState&)>;

const std::array<Pred, kConservation>& predicates() {
    static const std::array<Pred, kConservation> p{
        // (1)
        [](const SystemState& s) {
            return all_processes(s, [&](const ProcessRec& r) {
                return r.partition.index() < s.partitions.size() &&
                       s.cfg().processes[r.id.index()].partition == r.partition;
            });
        },
        // (2)
        [](const SystemState& s) {
            return all_processes(s, [&](const ProcessRec& r) {
                return s.part(r.partition).mode == PartitionMode::Normal || !ready_like(r.state);
            });
        },
        // (3) per process: a ready-like process lives in a NORMAL partition
        [](const SystemState& s) {
            return all_processes(s, [&](const ProcessRec& r) {
                return !ready_like(r.state) || s.part(r.partition).mode == PartitionMode::Normal;
            });
        },
        // (4)
        [](const SystemState& s) {
            return all_partitions(s, [&](const PartitionRec& p) {
                return p.mode != PartitionMode::Normal || has_processes(s, p.id);
            });
        },
        // (5)
        [](const SystemState& s) {
            return all_partitions(s, [&](const PartitionRec& p) {
                return p.mode != PartitionMode::Idle || !has_processes(s, p.id);
            });
        },
        // (6)
        [](const SystemState& s) {
            int running = 0;
            all_processes(s, [&](const ProcessRec& r) {
                running += r.state == PS::Running ? 1 : 0;
                return true;
            });
            return running <= 1;
        },
        // (7)
        [](const SystemState& s) {
            return all_partitions(s, [](const PartitionRec& p) { return !is_start_mode(p.mode) || p.lock_level > 0; });
        },
        // (8) in NORMAL: a positive lock level has a holder of this partition
        [](const SystemState& s) {
            return all_partitions(s, [&](const PartitionRec& p) {
                if (p.mode != PartitionMode::Normal || p.lock_level == 0) return true;
                return p.lock_holder && s.has_process(*p.lock_holder) && s.proc(*p.lock_holder).partition == p.id;
            });
        },
        // (9)
        [](const SystemState& s) {
            return all_partitions(s, [](const PartitionRec& p) { return !p.lock_holder || p.lock_level > 0; });
        },
        // (10)
        [](const SystemState& s) {
            return all_partitions(s, [](const PartitionRec& p) {
                return p.lock_level != 0 || p.mode == PartitionMode::Normal;
            });
        },
        // (11)
        [](const SystemState& s) {
            if (!s.current_process || !s.current_partition) return true;
            return s.has_process(*s.current_process) && s.proc(*s.current_process).partition == *s.current_partition;
        },
        // (12)
        [](const SystemState& s) {
            return !s.current_partition || s.part(*s.current_partition).mode != PartitionMode::Idle;
        },
        // (13)
        [](const SystemState& s) {
            if (!s.current_process) return true;
            if (!s.has_process(*s.current_process)) return false;
            const auto& r = s.proc(*s.current_process);
            return r.state == PS::Running && s.part(r.partition).mode == PartitionMode::Normal;
        },
        // (14)
        [](const SystemState& s) {
            return all_processes(s, [](const ProcessRec& r) {
                return r.start_kind != StartKind::Delayed || r.delay_time.has_value();
            });
        },
        // (15)
        [](const SystemState& s) {
            return all_processes(s, [&](const ProcessRec& r) {
                return s.cfg().processes[r.id.index()].period.has_value() || !r.period.has_value();
            });
        },
        // (16)
        [](const SystemState& s) {
            return all_processes(s, [&](const ProcessRec& r) {
                if (!s.cfg().processes[r.id.index()].period) return true;
                return r.period.has_value() && *r.period > 0;
            });
        },
        // (17)
        [](const SystemState& s) {
            for (const auto& p : s.cfg().ports) {
                if (p.kind == PortKind::Queuing && (p.max_msg_num < 1 || p.max_msg_num > kMaxQueueBound)) return false;
            }
            return true;
        },
        // (18)
        [](const SystemState& s) {
            for (const auto& p : s.ports) {
                const auto& c = s.cfg().ports[p.id.index()];
                if (c.kind == PortKind::Queuing && static_cast<int>(p.queue.size()) > c.max_msg_num) return false;
            }
            return true;
        },
        // (19)
        [](const SystemState& s) {
            for (const auto& b : s.cfg().buffers) {
                if (b.max_msg_num < 1 || b.max_msg_num > kMaxQueueBound) return false;
            }
            return true;
        },
        // (20)
        [](const SystemState& s) {
            for (const auto& b : s.buffers) {
                if (b && static_cast<int>(b->queue.size()) > s.cfg().buffers[b->id.index()].max_msg_num) return false;
            }
            return true;
        },
        // (21)
        [](const SystemState& s) {
            for (const auto& b : s.blackboards) {
                if (b && b->indicator == BlackboardIndicator::Occupied && !b->msgspace) return false;
            }
            return true;
        },
        // (22)
        [](const SystemState& s) {
            for (const auto& m : s.semaphores) {
                if (m && (m->value < 0 || m->value > m->max_value)) return false;
            }
            return true;
        },
        // (23)
        [](const SystemState& s) {
            return all_waiters(s, [&](const Waiter& w, PartitionId owner) {
                return s.has_process(w.proc) && s.proc(w.proc).partition == owner;
            });
        },
        // (24)
        [](const SystemState& s) {
            return all_waiters(s, [&](const Waiter& w, PartitionId) {
                return s.has_process(w.proc) && waiting_like(s.proc(w.proc).state);
            });
        },
        // (25)
        [](const SystemState& s) {
            return all_processes(s, [&](const ProcessRec& r) {
                return !r.is_error_handler || r.current_priority == s.cfg().max_priority;
            });
        },
        // (26)
        [](const SystemState& s) {
            return all_partitions(s, [&](const PartitionRec& p) {
                return !p.error_handler ||
                       (s.has_process(*p.error_handler) && s.proc(*p.error_handler).partition == p.id);
            });
        },
        // (27)
        [](const SystemState& s) {
            return all_processes(s, [](const ProcessRec& r) {
                return !r.is_error_handler || r.creator_partition == r.partition;
            });
        },
        // message conservation
        conservation,
    };
    return p;
}

constexpr std::array<std::string_view, kConservation> kDescriptions{
    "each process is in one partition",
    "a partition not in NORMAL has no Ready, Running or Suspend process",
    "a Ready, Running or Suspend process belongs to a NORMAL partition",
    "a NORMAL partition has processes",
    "an IDLE partition has no process",
    "at most one Running process",
    "a partition in COLD_START or WARM_START has lock level > 0",
    "a positive lock level in NORMAL has a process holding the lock",
    "a process holding the lock implies lock level > 0",
    "lock level 0 implies NORMAL",
    "the current process belongs to the current partition",
    "the current partition is not IDLE",
    "the current process is Running in a NORMAL partition",
    "a delayed-started process has a delay time",
    "an aperiodic process has the infinite period",
    "a periodic process has a finite period",
    "queuing port queue size is finite",
    "queuing port holds at most its maximum number of messages",
    "buffer queue size is finite",
    "buffer holds at most its maximum number of messages",
    "an OCCUPIED blackboard holds a message",
    "semaphore value does not exceed its maximum",
    "waiters belong to the partition of the object they wait on",
    "processes in waiting queues are in a waiting state",
    "the error handler has the maximum priority",
    "the error handler is in the partition where it was created",
    "the error handler and its creator are in the same partition",
    "message conservation: every sent message is held or delivered exactly once",
};

}  // namespace

std::string_view invariant_description(int n) {
    if (n < 1 || n > kConservation) return "?";
    return kDescriptions[static_cast<std::size_t>(n - 1)];
}

bool check_invariant(const SystemState& s, int n) {
    if (n < 1 || n > kConservation) return true;
    return predicates()[static_cast<std::size_t>(n - 1)](s);
}

std::vector<int> check_invariants(const SystemState& s) {
    std::vector<int> out;
    for (int n = 1; n <= kConservation; ++n) {
        if (!check_invariant(s, n)) out.push_back(n);
    }
    return out;
}

}  // namespace a653
