#include "a653/explorer.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

#include "a653/errors.hpp"
#include "a653/invariants.hpp"

namespace a653 {

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Budget: return "BUDGET";
    }
    return "?";
}

std::string_view to_string(FindingKind k) {
    switch (k) {
        case FindingKind::Invariant: return "INVARIANT";
        case FindingKind::GuardStrengthening: return "GUARD_STRENGTHENING";
        case FindingKind::Simulation: return "SIMULATION";
    }
    return "?";
}

std::string format_summary(const CheckReport& r) {
    std::string kind = "-";
    std::string inv = "-";
    if (r.verdict == Verdict::Fail && !r.findings.empty()) {
        kind = std::string(to_string(r.findings.front().kind));
        if (r.findings.front().kind == FindingKind::Invariant) inv = std::to_string(r.findings.front().invariant);
    }
    return "verdict=" + std::string(to_string(r.verdict)) + " kind=" + kind + " inv=" + inv +
           " states=" + std::to_string(r.states_visited) + " depth=" + std::to_string(r.depth);
}

std::string format_report(const ScenarioConfig& cfg, const CheckReport& r) {
    (void)cfg;
    std::string out;
    for (std::size_t i = 0; i < r.findings.size(); ++i) {
        const auto& f = r.findings[i];
        out += "finding " + std::to_string(i + 1) + ": kind=" + std::string(to_string(f.kind));
        if (f.kind == FindingKind::Invariant) out += " inv=" + std::to_string(f.invariant);
        out += " class=" + f.witness_class + "\n";
        out += "  detail: " + f.detail + "\n";
        out += "  trace (" + std::to_string(f.trace.size()) + " events):\n";
        for (std::size_t k = 0; k < f.trace.size(); ++k) {
            char digest[17];
            std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(f.trace[k].digest));
            out += "    " + std::to_string(k + 1) + ". " + f.trace[k].event + " -> " + digest + "\n";
        }
        out += "  final state:\n";
        std::size_t start = 0;
        while (start < f.final_state.size()) {
            auto end = f.final_state.find('\n', start);
            if (end == std::string::npos) end = f.final_state.size();
            out += "    " + f.final_state.substr(start, end - start) + "\n";
            start = end + 1;
        }
    }
    if (!r.budget_reason.empty()) out += "budget: " + r.budget_reason + "\n";
    return out + format_summary(r) + "\n";
}

std::string Node::key() const {
    std::string k = state.serialize();
    const auto put = [&](std::uint64_t v) { k.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(static_cast<std::uint64_t>(calls_in_tick));
    put(static_cast<std::uint64_t>(calls_total));
    put(script_pos);
    return k;
}

Node initial_node(const ScenarioConfig& cfg) {
    return Node{new_state(std::make_shared<const ScenarioConfig>(cfg)), 0, 0, 0};
}

namespace {

/// The scripted call due at the node, if any.
std::optional<Event> script_event(const Node& n) {
    const auto& script = n.state.cfg().script;
    if (n.script_pos >= script.size() || script[n.script_pos].tick > n.state.clock_tick) return std::nullopt;
    const auto& entry = script[n.script_pos];
    std::optional<ProcessId> caller;
    if (entry.caller != "main") caller = n.state.cfg().find_process(entry.caller);
    if (!caller_valid(n.state, caller)) return Event{ScriptSkip{n.script_pos}};
    return Event{ServiceCall{entry.service, caller, entry.args}};
}

bool is_script_call(const Node& n, const Event& e) {
    const auto due = script_event(n);
    return due && *due == e;
}

bool can_tick(const Node& n, const ExploreOptions& opt) {
    return !n.state.module_shutdown && n.state.clock_tick < opt.depth_ticks;
}

template <class T>
std::vector<std::string> names_of(const std::vector<T>& table, PartitionId part) {
    std::vector<std::string> out;
    for (const auto& t : table) {
        if (t.partition == part) out.push_back(t.name);
    }
    return out;
}

}  // namespace

std::vector<ServiceCall> candidate_calls(const SystemState& s) {
    std::optional<ProcessId> caller;
    PartitionId part;
    if (s.current_process) {
        caller = s.current_process;
        part = s.proc(*caller).partition;
    } else if (s.current_partition && is_start_mode(s.part(*s.current_partition).mode)) {
        part = *s.current_partition;
    } else {
        return {};
    }
    const auto& cfg = s.cfg();
    const auto& x = cfg.explore;

    std::vector<std::string> procs;
    for (const auto& p : cfg.processes) {
        if (p.partition == part && !p.is_error_handler) procs.push_back(p.name);
    }
    std::vector<std::string> sampling;
    std::vector<std::string> queuing;
    for (const auto& p : cfg.ports) {
        if (p.partition != part) continue;
        (p.kind == PortKind::Sampling ? sampling : queuing).push_back(p.name);
    }
    std::vector<std::string> prios;
    if (x.priorities.empty()) {
        prios = {std::to_string(cfg.min_priority), std::to_string(cfg.max_priority)};
    } else {
        for (int p : x.priorities) prios.push_back(std::to_string(p));
    }
    std::vector<std::string> delays;
    for (Tick d : x.delays) delays.push_back(std::to_string(d));
    std::vector<std::string> timeouts;
    for (const auto& t : x.timeouts) timeouts.push_back(t ? std::to_string(*t) : "inf");

    const auto domain = [&](ArgKind k) -> std::vector<std::string> {
        switch (k) {
            case ArgKind::Process: return procs;
            case ArgKind::Mode: return {"IDLE", "COLD_START", "WARM_START", "NORMAL"};
            case ArgKind::Priority: return prios;
            case ArgKind::Delay: return delays;
            case ArgKind::Timeout: return timeouts;
            case ArgKind::SamplingPort: return sampling;
            case ArgKind::QueuingPort: return queuing;
            case ArgKind::Buffer: return names_of(cfg.buffers, part);
            case ArgKind::Blackboard: return names_of(cfg.blackboards, part);
            case ArgKind::Semaphore: return names_of(cfg.semaphores, part);
            case ArgKind::Event: return names_of(cfg.events, part);
            case ArgKind::ErrorCode: return {"APPLICATION_ERROR"};
        }
        return {};
    };

    std::vector<ServiceCall> out;
    for (const auto& name : x.services) {
        const auto* info = find_service(name);
        if (info == nullptr) continue;
        std::vector<std::vector<std::string>> combos{{}};
        for (ArgKind k : info->args) {
            std::vector<std::vector<std::string>> next;
            for (const auto& c : combos) {
                for (const auto& v : domain(k)) {
                    auto e = c;
                    e.push_back(v);
                    next.push_back(std::move(e));
                }
            }
            combos = std::move(next);
        }
        for (auto& c : combos) out.push_back(ServiceCall{name, caller, std::move(c)});
    }
    return out;
}

std::vector<Event> node_events(const Node& n, const ExploreOptions& opt) {
    const auto& s = n.state;
    std::vector<Event> out;
    if (s.module_shutdown) return out;
    const auto urgent = urgent_stage_events(s);
    const auto script = script_event(n);
    if (opt.mode == Interleave::Pipeline) {
        if (!urgent.empty()) {
            out.emplace_back(urgent.front());
        } else if (script) {
            out.push_back(*script);
        } else if (can_tick(n, opt)) {
            out.emplace_back(StageEvent{StageKind::TickTock, std::nullopt});
        }
        return out;
    }
    for (const auto& u : urgent) out.emplace_back(u);
    if (script) out.push_back(*script);
    const auto& x = s.cfg().explore;
    const bool budget_left = n.calls_in_tick < x.calls_per_tick && (!x.max_calls || n.calls_total < *x.max_calls);
    if (budget_left) {
        for (auto& c : candidate_calls(s)) {
            Event e{std::move(c)};
            if (!script || e != *script) out.push_back(std::move(e));
        }
    }
    if (urgent.empty() && !script && can_tick(n, opt)) out.emplace_back(StageEvent{StageKind::TickTock, std::nullopt});
    return out;
}

Node apply_node_event(const Node& n, const Event& e, const ExploreOptions& opt, StepResult* out) {
    const bool scripted = std::holds_alternative<ScriptSkip>(e) || is_script_call(n, e);
    StepResult r = apply_event(n.state, e, opt.toggles);
    Node next{std::move(r.state), n.calls_in_tick, n.calls_total, n.script_pos};
    if (const auto* st = std::get_if<StageEvent>(&e); st && st->kind == StageKind::TickTock) next.calls_in_tick = 0;
    if (scripted) {
        ++next.script_pos;
    } else if (std::holds_alternative<ServiceCall>(e)) {
        ++next.calls_in_tick;
        ++next.calls_total;
    }
    if (out != nullptr) {
        r.state = next.state;
        *out = std::move(r);
    }
    return next;
}

namespace {

struct Stored {
    Node node;
    std::string key;
    std::size_t parent = 0;
    std::optional<Event> via;
};

struct Successor {
    Event event;
    Node node;
    std::string key;
    std::uint64_t hash = 0;
    std::vector<Finding> findings;
};

class Search {
public:
    Search(const ScenarioConfig& cfg, const ExploreOptions& opt, const TransitionHook& hook)
        : cfg_(cfg), opt_(opt), hook_(hook), started_(std::chrono::steady_clock::now()) {}

    CheckReport run() {
        Node init = initial_node(cfg_);
        auto key = init.key();
        add(std::move(init), std::move(key), 0, std::nullopt);
        if (violated(0)) return finish();
        std::vector<std::size_t> frontier{0};
        while (!frontier.empty() && !stop_) {
            auto expanded = expand(frontier);
            std::vector<std::size_t> next;
            for (std::size_t i = 0; i < frontier.size() && !stop_; ++i) {
                for (auto& succ : expanded[i]) {
                    ++report_.transitions;
                    for (auto& f : succ.findings) record(frontier[i], succ.event, succ.node, std::move(f));
                    const auto id = intern(std::move(succ), frontier[i]);
                    if (!id) continue;
                    next.push_back(*id);
                    if (violated(*id) || over_budget()) break;
                }
            }
            frontier = std::move(next);
        }
        return finish();
    }

private:
    const ScenarioConfig& cfg_;
    const ExploreOptions& opt_;
    const TransitionHook& hook_;
    std::chrono::steady_clock::time_point started_;
    std::vector<Stored> nodes_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> seen_;
    std::set<std::string> classes_;
    CheckReport report_;
    bool stop_ = false;

    void add(Node n, std::string key, std::size_t parent, std::optional<Event> via) {
        const auto h = fnv1a64(key);
        report_.depth = std::max(report_.depth, n.state.clock_tick);
        seen_[h].push_back(nodes_.size());
        nodes_.push_back({std::move(n), std::move(key), parent, std::move(via)});
    }

    std::optional<std::size_t> intern(Successor&& s, std::size_t parent) {
        auto& bucket = seen_[s.hash];
        for (std::size_t id : bucket) {
            if (nodes_[id].key == s.key) return std::nullopt;
        }
        const auto id = nodes_.size();
        add(std::move(s.node), std::move(s.key), parent, std::move(s.event));
        return id;
    }

    std::vector<Successor> successors(std::size_t id) const {
        std::vector<Successor> out;
        const Node& n = nodes_[id].node;
        for (auto& e : node_events(n, opt_)) {
            StepResult r;
            Node next = [&] {
                try {
                    return apply_node_event(n, e, opt_, &r);
                } catch (const ModelError&) {
                    return n;
                }
            }();
            auto key = next.key();
            // a call that changed nothing but its own bookkeeping is not a step
            if (std::holds_alternative<ServiceCall>(e) && next.state == n.state && next.script_pos == n.script_pos) {
                continue;
            }
            std::vector<Finding> findings;
            if (hook_) findings = hook_(n.state, e, r);
            const auto h = fnv1a64(key);
            out.push_back({std::move(e), std::move(next), std::move(key), h, std::move(findings)});
        }
        return out;
    }

    std::vector<std::vector<Successor>> expand(const std::vector<std::size_t>& frontier) const {
        std::vector<std::vector<Successor>> out(frontier.size());
        const unsigned threads = std::max(1U, opt_.threads);
        if (threads == 1 || frontier.size() < 64) {
            for (std::size_t i = 0; i < frontier.size(); ++i) out[i] = successors(frontier[i]);
            return out;
        }
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < frontier.size(); i += threads) out[i] = successors(frontier[i]);
            });
        }
        for (auto& th : pool) th.join();
        return out;
    }

    std::vector<Event> path_to(std::size_t id) const {
        std::vector<Event> out;
        while (id != 0) {
            out.push_back(*nodes_[id].via);
            id = nodes_[id].parent;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    std::vector<TraceStep> trace_to(std::size_t id) const {
        std::vector<TraceStep> out;
        while (id != 0) {
            out.push_back({nodes_[id].node.state.digest(), event_label(cfg_, *nodes_[id].via)});
            id = nodes_[id].parent;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    bool violated(std::size_t id) {
        if (!opt_.check_invariants) return false;
        const auto bad = check_invariants(nodes_[id].node.state);
        if (bad.empty()) return false;
        Finding f;
        f.kind = FindingKind::Invariant;
        f.invariant = bad.front();
        f.witness_class = "inv=" + std::to_string(bad.front());
        f.detail = "violated:";
        for (int n : bad) f.detail += " (" + std::to_string(n) + ") " + std::string(invariant_description(n)) + ";";
        f.events = path_to(id);
        f.trace = trace_to(id);
        f.final_state = nodes_[id].node.state.describe();
        report_.findings.push_back(std::move(f));
        report_.verdict = Verdict::Fail;
        stop_ = true;
        return true;
    }

    void record(std::size_t parent, const Event& e, const Node& after, Finding f) {
        if (!classes_.insert(std::string(to_string(f.kind)) + "|" + f.witness_class).second) return;
        f.events = path_to(parent);
        f.events.push_back(e);
        f.trace = trace_to(parent);
        f.trace.push_back({after.state.digest(), event_label(cfg_, e)});
        f.final_state = after.state.describe();
        report_.findings.push_back(std::move(f));
        report_.verdict = Verdict::Fail;
    }

    bool over_budget() {
        if (nodes_.size() >= opt_.max_states) {
            report_.budget_reason = "state cap " + std::to_string(opt_.max_states) + " reached";
        } else if (std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count() >
                   opt_.max_seconds) {
            report_.budget_reason = "time cap " + std::to_string(opt_.max_seconds) + "s reached";
        } else {
            return false;
        }
        if (report_.verdict != Verdict::Fail) report_.verdict = Verdict::Budget;
        stop_ = true;
        return true;
    }

    CheckReport finish() {
        report_.states_visited = nodes_.size();
        return std::move(report_);
    }
};

}  // namespace

CheckReport explore(const ScenarioConfig& cfg, const ExploreOptions& opt, const TransitionHook& hook) {
    return Search(cfg, opt, hook).run();
}

std::vector<std::uint64_t> replay(const ScenarioConfig& cfg, const ExploreOptions& opt,
                                  const std::vector<Event>& events) {
    std::vector<std::uint64_t> out;
    Node n = initial_node(cfg);
    for (const auto& e : events) {
        n = apply_node_event(n, e, opt);
        out.push_back(n.state.digest());
    }
    return out;
}

RunResult run_scenario(const ScenarioConfig& cfg, Tick ticks, VariantToggles toggles) {
    ExploreOptions opt;
    opt.mode = Interleave::Pipeline;
    opt.depth_ticks = ticks;
    opt.toggles = toggles;
    Node n = initial_node(cfg);
    RunResult out{{}, n.state, check_invariants(n.state), 0};
    if (!out.violations.empty()) return out;
    while (true) {
        const auto events = node_events(n, opt);
        if (events.empty()) break;
        StepResult r;
        n = apply_node_event(n, events.front(), opt, &r);
        for (const auto& line : r.log.trace) out.trace.push_back(format_trace_line(cfg, line));
        out.final_state = n.state;
        out.violations = check_invariants(n.state);
        if (!out.violations.empty()) {
            out.violation_tick = n.state.clock_tick;
            break;
        }
    }
    return out;
}

}  // namespace a653
