#include "a653/refinement.hpp"

#include <fstream>
#include <sstream>

#include "a653/errors.hpp"
#include "a653/ipc.hpp"

namespace a653 {

Pairing default_pairing() {
    Pairing p;
    p.allowed = {
        {"SEND_QUEUING_MESSAGE", {"send_queuing_message", "receive_queuing_message"}},
        {"RECEIVE_QUEUING_MESSAGE", {"receive_queuing_message", "send_queuing_message_unblocked"}},
        {"CLEAR_QUEUING_PORT", {"send_queuing_message_unblocked", "receive_queuing_message"}},
        // a new destination port lets the channel move and frees the source
        {"CREATE_QUEUING_PORT", {"send_queuing_message_unblocked", "receive_queuing_message"}},
        {"SEND_BUFFER", {"send_buffer", "receive_buffer"}},
        {"RECEIVE_BUFFER", {"receive_buffer", "send_buffer"}},
        {"DISPLAY_BLACKBOARD", {"display_blackboard"}},
        {"CLEAR_BLACKBOARD", {"clear_blackboard"}},
        {"WRITE_SAMPLING_MESSAGE", {"write_sampling_message"}},
        {"WAIT_SEMAPHORE", {"wait_semaphore"}},
        {"SIGNAL_SEMAPHORE", {"signal_semaphore"}},
        {"SET_EVENT", {"set_event"}},
        {"RESET_EVENT", {"reset_event"}},
    };
    return p;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Pairing parse_pairing(std::string_view text) {
    Pairing p;
    std::istringstream in{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("pairing:" + std::to_string(n), "expected `<concrete> = <abstract>,...`");
        const auto key = trim(std::string_view(t).substr(0, eq));
        auto& set = p.allowed[key];
        std::istringstream vals(t.substr(eq + 1));
        std::string v;
        while (std::getline(vals, v, ',')) {
            if (auto a = trim(v); !a.empty()) set.insert(a);
        }
    }
    return p;
}

Pairing load_pairing(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path.string(), "cannot open pairing file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_pairing(ss.str());
}

std::string format_pairing(const Pairing& p) {
    std::string out;
    for (const auto& [k, vs] : p.allowed) {
        out += k + " =";
        bool first = true;
        for (const auto& v : vs) {
            out += (first ? " " : ", ") + v;
            first = false;
        }
        out += "\n";
    }
    return out;
}

namespace {

std::string mode_class_name(PartitionMode m) { return m == PartitionMode::Normal ? "NORMAL" : "START"; }

std::string transition_class(const Note& n) {
    return "(" + mode_class_name(n.mode) + ", " + std::string(to_string(standard_view(n.from))) + "->" +
           std::string(to_string(standard_view(n.to))) + ")";
}

bool carried_by_waiter(const std::vector<Waiter>& ws, MessageId m) {
    for (const auto& w : ws) {
        if (w.msg == m) return true;
    }
    return false;
}

bool fresh(const SystemState& s, MessageId m) { return !s.used_messages.contains(m); }

/// Abstract guard and before-after predicate of an IPC note, evaluated on
/// the concrete pre- and post-states. Returns a description of the failure.
std::optional<std::string> simulate(const SystemState& pre, const SystemState& post, const Note& n) {
    const auto m = n.msg;
    const auto mstr = "m" + std::to_string(m);
    switch (n.kind) {
        case NoteKind::ProcessTransition:
            return std::nullopt;
        case NoteKind::QueuingSend:
        case NoteKind::QueuingSendUnblocked: {
            const PortId port{n.object};
            if (n.kind == NoteKind::QueuingSend && !fresh(pre, m)) return mstr + " was not fresh";
            if (!ipc::channel_contents(post, port).contains(m) && !post.delivered_messages.contains(m)) {
                return mstr + " is neither in the channel nor delivered after the send";
            }
            return std::nullopt;
        }
        case NoteKind::QueuingReceive: {
            const PortId port{n.object};
            // a message can also reach a receiver straight from a sender
            // unblocked in the same step
            bool carried = false;
            for (const auto& p : pre.ports) carried = carried || carried_by_waiter(p.waiting, m);
            if (!ipc::channel_contents(pre, port).contains(m) && !fresh(pre, m) && !carried) {
                return mstr + " was not in the channel";
            }
            if (!post.delivered_messages.contains(m)) return mstr + " not delivered after the receive";
            if (ipc::channel_contents(post, port).contains(m)) return mstr + " still in the channel after the receive";
            return std::nullopt;
        }
        case NoteKind::BufferSend: {
            const auto& b = pre.buffers[n.object];
            if (!fresh(pre, m) && !(b && carried_by_waiter(b->waiting, m))) return mstr + " was not fresh";
            const auto& a = post.buffers[n.object];
            bool queued = false;
            if (a) {
                for (const auto& q : a->queue) queued = queued || q.id == m;
            }
            if (!queued && !post.delivered_messages.contains(m)) return mstr + " neither queued nor delivered";
            return std::nullopt;
        }
        case NoteKind::BufferReceive: {
            const auto& a = post.buffers[n.object];
            if (a) {
                for (const auto& q : a->queue) {
                    if (q.id == m) return mstr + " still in the buffer after the receive";
                }
            }
            if (!post.delivered_messages.contains(m)) return mstr + " not delivered after the receive";
            return std::nullopt;
        }
        case NoteKind::BlackboardDisplay: {
            const auto& a = post.blackboards[n.object];
            if (!a || a->msgspace != m || a->indicator != BlackboardIndicator::Occupied) {
                return mstr + " not displayed";
            }
            return std::nullopt;
        }
        case NoteKind::BlackboardClear: {
            const auto& a = post.blackboards[n.object];
            if (!a || a->msgspace || a->indicator != BlackboardIndicator::Empty) return std::string("blackboard not empty");
            return std::nullopt;
        }
        case NoteKind::SamplingWrite: {
            const auto& ms = post.ports[n.object].msgspace;
            if (!ms || ms->id != m) return mstr + " not stored in the port";
            return std::nullopt;
        }
        case NoteKind::SemaphoreWait: {
            const auto& b = pre.semaphores[n.object];
            const auto& a = post.semaphores[n.object];
            if (!b || !a || b->value == 0 || a->value != b->value - 1) return std::string("value not decremented");
            return std::nullopt;
        }
        case NoteKind::SemaphoreSignal: {
            const auto& b = pre.semaphores[n.object];
            const auto& a = post.semaphores[n.object];
            if (!b || !a) return std::string("semaphore missing");
            const bool released = a->waiting.size() + 1 == b->waiting.size() && a->value == b->value;
            const bool incremented = a->value == b->value + 1 && b->waiting.empty();
            if (!released && !incremented) return std::string("neither a waiter released nor the value incremented");
            return std::nullopt;
        }
        case NoteKind::EventSet: {
            const auto& a = post.events[n.object];
            if (!a || a->flag != EventFlag::Up || !a->waiting.empty()) return std::string("event not up");
            return std::nullopt;
        }
        case NoteKind::EventReset: {
            const auto& a = post.events[n.object];
            if (!a || a->flag != EventFlag::Down) return std::string("event not down");
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<Finding> refinement_findings(const SystemState& pre, const Event& e, const StepResult& r,
                                         const Pairing& pairing, const RefinementOptions& opt) {
    std::vector<Finding> out;
    const auto& cfg = pre.cfg();
    const auto label = event_label(cfg, e);
    const auto kind = event_kind_name(e);

    if (opt.guard_strengthening) {
        std::vector<bool> annotated(pre.processes.size(), false);
        for (const auto& n : r.log.notes) {
            if (n.kind != NoteKind::ProcessTransition) continue;
            annotated[n.proc.index()] = true;
            if (kernel::transition_allowed(opt.abstract_model, n.mode, n.from, n.to, n.trigger)) continue;
            Finding f;
            f.kind = FindingKind::GuardStrengthening;
            f.witness_class = transition_class(n);
            f.detail = label + " moves " + cfg.name(n.proc) + " " + std::string(to_string(n.from)) + " -> " +
                       std::string(to_string(n.to)) + " (" + std::string(to_string(n.trigger)) + ") in " +
                       std::string(to_string(n.mode)) + "; no abstract process_state_transition allows it";
            out.push_back(std::move(f));
        }
        for (std::size_t i = 0; i < pre.processes.size(); ++i) {
            const auto& a = pre.processes[i];
            const auto& b = r.state.processes[i];
            if (!a || !b || a->state == b->state || annotated[i]) continue;
            Finding f;
            f.kind = FindingKind::GuardStrengthening;
            f.witness_class = "unannotated " + std::string(to_string(a->state)) + "->" + std::string(to_string(b->state));
            f.detail = label + " changes " + cfg.name(ProcessId{i}) + " without a matching abstract event";
            out.push_back(std::move(f));
        }
    }

    if (opt.simulation) {
        const auto it = pairing.allowed.find(kind);
        for (const auto& n : r.log.notes) {
            if (n.kind == NoteKind::ProcessTransition) continue;
            const std::string abstract(abstract_event_name(n.kind));
            if (it == pairing.allowed.end() || !it->second.contains(abstract)) {
                Finding f;
                f.kind = FindingKind::Simulation;
                f.witness_class = "unpaired " + kind + "/" + abstract;
                f.detail = label + " performs " + abstract + ", which the pairing does not allow for " + kind;
                out.push_back(std::move(f));
                continue;
            }
            if (const auto why = simulate(pre, r.state, n)) {
                Finding f;
                f.kind = FindingKind::Simulation;
                f.witness_class = abstract;
                f.detail = label + " is not simulated by " + abstract + ": " + *why;
                out.push_back(std::move(f));
            }
        }
    }
    return out;
}

CheckReport check_refinement(const ScenarioConfig& cfg, const Pairing& pairing, RefinementOptions opt) {
    const auto hook = [&pairing, &opt](const SystemState& pre, const Event& e, const StepResult& r) {
        return refinement_findings(pre, e, r, pairing, opt);
    };
    return explore(cfg, opt.explore, hook);
}

CheckReport check_guard_strengthening(const ScenarioConfig& cfg, const Pairing& pairing, RefinementOptions opt) {
    opt.simulation = false;
    opt.guard_strengthening = true;
    return check_refinement(cfg, pairing, opt);
}

CheckReport check_simulation(const ScenarioConfig& cfg, const Pairing& pairing, RefinementOptions opt) {
    opt.guard_strengthening = false;
    opt.simulation = true;
    return check_refinement(cfg, pairing, opt);
}

}  // namespace a653
