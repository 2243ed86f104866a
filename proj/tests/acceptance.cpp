// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "a653/dsl.hpp"
#include "a653/explorer.hpp"
#include "a653/invariants.hpp"
#include "a653/ipc.hpp"
#include "a653/refinement.hpp"
#include "a653/scheduler.hpp"
#include "a653/services.hpp"
#include "dsl_gen.hpp"

namespace fs = std::filesystem;
using namespace a653;

namespace {

const fs::path root = A653_ROOT;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig scenario(const std::string& name) { return load_config(root / "scenarios" / name); }

unsigned worker_threads() { return std::max(2U, std::thread::hardware_concurrency()); }

ExploreOptions free_options(const ScenarioConfig& cfg, Tick mtfs) {
    ExploreOptions opt;
    opt.depth_ticks = mtfs * cfg.schedule.mtf;
    opt.mode = Interleave::Free;
    opt.max_states = cfg.explore.max_states;
    opt.max_seconds = cfg.explore.max_seconds;
    opt.toggles = cfg.variants;
    return opt;
}

bool has_class(const CheckReport& r, FindingKind k, const std::string& cls) {
    return std::any_of(r.findings.begin(), r.findings.end(),
                       [&](const Finding& f) { return f.kind == k && f.witness_class == cls; });
}

/// Replays a counterexample and returns the node before its last event.
Node before_last(const ScenarioConfig& cfg, const ExploreOptions& opt, const std::vector<Event>& events) {
    Node n = initial_node(cfg);
    for (std::size_t i = 0; i + 1 < events.size(); ++i) n = apply_node_event(n, events[i], opt);
    return n;
}

Outcome criterion1() {
    Outcome o;
    const auto cfg = scenario("reference.cfg");
    auto opt = free_options(cfg, 3);
    opt.threads = worker_threads();
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = explore(cfg, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream d;
    d << "states=" << r.states_visited << " depth=" << r.depth << " seconds=" << static_cast<int>(secs);
    o.detail = d.str();
    o.require(r.verdict == Verdict::Pass, "verdict " + std::string(to_string(r.verdict)) + ": " + format_summary(r));
    o.require(r.findings.empty(), "violations reported");
    o.require(r.states_visited >= 10'000, "fewer than 10^4 states: " + d.str());
    o.require(r.depth >= 3 * cfg.schedule.mtf, "depth below 3 MTFs: " + d.str());
    o.require(secs < 120.0, "slower than 2 minutes: " + d.str());
    return o;
}

Outcome criterion2() {
    Outcome o;
    const auto cfg = scenario("error1_resume.cfg");
    RefinementOptions opt;
    opt.abstract_model = TransitionModelVariant::Augmented;
    opt.explore = free_options(cfg, 2);
    opt.explore.check_invariants = false;

    opt.explore.toggles.resume = Variant::AsWritten;
    const auto bad = check_refinement(cfg, default_pairing(), opt);
    o.require(bad.verdict == Verdict::Fail, "as_written did not fail");
    const auto it = std::find_if(bad.findings.begin(), bad.findings.end(), [](const Finding& f) {
        return f.kind == FindingKind::GuardStrengthening && f.witness_class == "(NORMAL, Waiting->Ready)";
    });
    o.require(it != bad.findings.end(), "no (NORMAL, Waiting->Ready) guard-strengthening witness");
    if (it != bad.findings.end()) {
        const auto pre = before_last(cfg, opt.explore, it->events);
        const auto tgt = *cfg.find_process("tgt");
        const auto& p = pre.state.proc(tgt);
        const auto& due = pre.state.timeout_trigger[tgt.index()];
        o.require(p.state == ProcessState::WaitandSuspend, "witness process not suspended while waiting");
        o.require(p.start_kind == StartKind::Delayed && !p.periodic(), "witness is not a delayed-started aperiodic");
        o.require(due && due->at > pre.state.clock_tick, "witness delay already elapsed");
        const auto post = apply_node_event(pre, it->events.back(), opt.explore);
        o.require(post.state.proc(tgt).state == ProcessState::Ready, "witness does not end in Ready");
    }

    opt.explore.toggles.resume = Variant::Corrected;
    const auto good = check_refinement(cfg, default_pairing(), opt);
    o.require(good.verdict == Verdict::Pass, "corrected did not pass: " + format_summary(good));
    o.detail = "as_written=" + std::string(to_string(bad.verdict)) + " corrected=" + std::string(to_string(good.verdict));
    return o;
}

Outcome criterion3() {
    Outcome o;
    auto cfg = scenario("error2_send_queuing.cfg");
    const auto snd = *cfg.find_process("snd");
    const auto q_out = *cfg.find_port("q_out");
    const auto q_in = *cfg.find_port("q_in");

    // message the blocked sender carries
    VariantToggles bad_t;
    bad_t.send_queuing = Variant::AsWritten;
    const auto blocked = run_scenario(cfg, 4, bad_t);
    const auto& waiting = blocked.final_state.ports[q_out.index()].waiting;
    o.require(waiting.size() == 1 && waiting.front().proc == snd && waiting.front().msg, "sender not blocked at tick 4");
    if (!o.ok) return o;
    const MessageId m = *waiting.front().msg;

    RefinementOptions opt;
    opt.explore = free_options(cfg, 2);
    opt.explore.check_invariants = false;
    opt.explore.toggles = bad_t;
    const auto sim = check_simulation(cfg, default_pairing(), opt);
    o.require(sim.verdict == Verdict::Fail && has_class(sim, FindingKind::Simulation, "send_queuing_message_unblocked"),
              "as_written: no simulation failure on send_queuing_message_unblocked");

    const auto run_bad = run_scenario(cfg, 10, bad_t);
    o.require(std::find(run_bad.violations.begin(), run_bad.violations.end(), kConservation) != run_bad.violations.end(),
              "as_written: message conservation not violated");
    const auto census = ipc::census(run_bad.final_state);
    o.require(census.exclusive.size() > m && census.exclusive[m] == 0 && !census.shared.contains(m),
              "as_written: message still has a home");
    o.require(!run_bad.final_state.delivered_messages.contains(m), "as_written: message counted as delivered");

    VariantToggles good_t;
    opt.explore.toggles = good_t;
    const auto ref = check_refinement(cfg, default_pairing(), opt);
    o.require(ref.verdict == Verdict::Pass, "corrected refinement: " + format_summary(ref));
    const auto run_good = run_scenario(cfg, 5, good_t);
    o.require(run_good.violations.empty(), "corrected: invariant violation");
    bool queued = false;
    for (const auto& q : run_good.final_state.ports[q_out.index()].queue) queued = queued || q.id == m;
    o.require(queued, "corrected: sender's message not in the source queue after the release");
    const auto run_late = run_scenario(cfg, 20, good_t);
    o.require(run_late.violations.empty(), "corrected: violation by tick 20");
    o.require(ipc::channel_contents(run_late.final_state, q_in).contains(m) ||
                  run_late.final_state.delivered_messages.contains(m),
              "corrected: message lost later");
    o.detail = "message m" + std::to_string(m);
    return o;
}

struct BufferRun {
    std::vector<MessageId> received;
    std::vector<std::size_t> lengths;  ///< queue length before each receive
    std::vector<std::size_t> after;    ///< and after it
    bool length_decreased = false;
};

BufferRun receive_loop(const ScenarioConfig& cfg, VariantToggles t) {
    BufferRun out;
    const auto buf = *cfg.find_buffer("buf");
    const auto worker = *cfg.find_process("worker");
    // tick 2: both messages sent, worker running
    auto n = initial_node(cfg);
    ExploreOptions opt;
    opt.mode = Interleave::Pipeline;
    opt.depth_ticks = 2;
    opt.toggles = t;
    while (true) {
        const auto ev = node_events(n, opt);
        if (ev.empty()) break;
        n = apply_node_event(n, ev.front(), opt);
    }
    SystemState s = n.state;
    std::size_t last = s.buffers[buf.index()]->queue.size();
    for (int i = 0; i < 20; ++i) {
        if (s.current_process == worker && !s.buffers[buf.index()]->queue.empty()) {
            out.lengths.push_back(s.buffers[buf.index()]->queue.size());
            const auto r = invoke(s, ServiceCall{"RECEIVE_BUFFER", worker, {"buf", "0"}}, t);
            if (r.return_code == ReturnCode::NoError) {
                for (const auto& [k, v] : r.out_values) {
                    if (k == "message") out.received.push_back(static_cast<MessageId>(std::stoul(v)));
                }
            }
            s = sched::settle(r.state, t).new_state;
            out.after.push_back(s.buffers[buf.index()]->queue.size());
        }
        s = sched::run_tick(s, t).new_state;
        const auto len = s.buffers[buf.index()]->queue.size();
        out.length_decreased = out.length_decreased || len < last;
        last = len;
    }
    return out;
}

Outcome criterion4() {
    Outcome o;
    const auto cfg = scenario("error3_receive_buffer.cfg");
    VariantToggles bad_t;
    bad_t.receive_buffer = Variant::AsWritten;
    const auto bad = receive_loop(cfg, bad_t);
    o.require(bad.received.size() >= 2 && bad.received[0] == bad.received[1],
              "as_written: two receives did not return the same message");
    o.require(!bad.length_decreased, "as_written: queue length decreased");
    for (std::size_t i = 0; i < bad.after.size(); ++i) {
        o.require(bad.after[i] == bad.lengths[i], "as_written: a receive shortened the queue");
    }
    const auto run_bad = run_scenario(cfg, 20, bad_t);
    o.require(!run_bad.violations.empty(), "as_written: no invariant violation in the run");

    const auto good = receive_loop(cfg, VariantToggles{});
    o.require(good.received.size() == 2 && good.received[0] != good.received[1], "corrected: expected two distinct messages");
    for (std::size_t i = 0; i < good.after.size(); ++i) {
        o.require(good.after[i] + 1 == good.lengths[i], "corrected: a receive did not remove exactly one message");
    }
    const auto run_good = run_scenario(cfg, 20, VariantToggles{});
    o.require(run_good.violations.empty(), "corrected: invariant violation");
    std::ostringstream d;
    d << "as_written received";
    for (auto m : bad.received) d << " m" << m;
    d << "; corrected received";
    for (auto m : good.received) d << " m" << m;
    o.detail = d.str();
    return o;
}

Outcome criterion5() {
    Outcome o;
    const auto cfg = scenario("incompleteness.cfg");
    RefinementOptions opt;
    opt.explore = free_options(cfg, 2);
    opt.explore.check_invariants = false;
    opt.abstract_model = TransitionModelVariant::AsFigured;
    const auto fig = check_refinement(cfg, default_pairing(), opt);
    std::set<std::string> classes;
    for (const auto& f : fig.findings) {
        o.require(f.kind == FindingKind::GuardStrengthening, "non guard-strengthening finding: " + f.witness_class);
        classes.insert(f.witness_class);
    }
    const std::set<std::string> expected{"(START, Waiting->Waiting)", "(NORMAL, Dormant->Waiting)",
                                         "(NORMAL, Dormant->Ready)"};
    o.require(fig.verdict == Verdict::Fail, "as_figured did not fail");
    o.require(classes == expected, "witness classes differ from the three expected");
    opt.abstract_model = TransitionModelVariant::Augmented;
    const auto aug = check_refinement(cfg, default_pairing(), opt);
    o.require(aug.verdict == Verdict::Pass && aug.findings.empty(), "augmented: " + format_summary(aug));
    o.detail = "as_figured classes=" + std::to_string(classes.size()) +
               " augmented findings=" + std::to_string(aug.findings.size());
    return o;
}

Outcome criterion6() {
    Outcome o;
    const auto spec = dsl::parse_service(read_file(root / "apex" / "stop.apex"));
    const auto t = dsl::translate_service(spec);
    o.require(t.events.size() == 4, "STOP gives " + std::to_string(t.events.size()) + " events");
    for (const auto& e : t.events) {
        for (const auto& err : spec.errors) {
            const auto neg = err.cond.negate();
            o.require(std::find(e.guards.begin(), e.guards.end(), neg) != e.guards.end(),
                      e.name + " lacks the negation of an error clause");
        }
    }
    o.require(spec.errors.size() == 2, "STOP has two error clauses");
    o.require(dsl::check_disjointness(t.events), "STOP events overlap");

    std::mt19937 rng(653);
    int failures = 0;
    constexpr int kTrials = 1000;
    for (int i = 0; i < kTrials; ++i) {
        const auto s = testgen::random_service(rng, 6);
        const auto tr = dsl::translate_service(s);
        if (!dsl::check_disjointness(tr.events) || !dsl::check_coverage(tr, s.errors)) ++failures;
    }
    o.require(failures == 0, std::to_string(failures) + " random services failed");
    o.detail = "STOP events=" + std::to_string(t.events.size()) + " random trials=" + std::to_string(kTrials) +
               " failures=" + std::to_string(failures);
    return o;
}

Outcome criterion7() {
    Outcome o;
    const auto cfg = scenario("reference.cfg");
    const auto a = run_scenario(cfg, 30, cfg.variants);
    const auto b = run_scenario(cfg, 30, cfg.variants);
    o.require(a.trace == b.trace && a.final_state.serialize() == b.final_state.serialize(), "run traces differ");

    const auto e1 = scenario("error1_resume.cfg");
    RefinementOptions ropt;
    ropt.explore = free_options(e1, 2);
    ropt.explore.check_invariants = false;
    ropt.explore.toggles.resume = Variant::AsWritten;
    o.require(format_report(e1, check_refinement(e1, default_pairing(), ropt)) ==
                  format_report(e1, check_refinement(e1, default_pairing(), ropt)),
              "refinement reports differ");

    const auto text = read_file(root / "apex" / "stop.apex");
    o.require(dsl::format_events(dsl::translate_service(dsl::parse_service(text)).events) ==
                  dsl::format_events(dsl::translate_service(dsl::parse_service(text)).events),
              "translations differ");

    auto opt = free_options(cfg, 3);
    opt.threads = 1;
    const auto single = explore(cfg, opt);
    opt.threads = worker_threads();
    const auto par = explore(cfg, opt);
    o.require(single.verdict == par.verdict && single.states_visited == par.states_visited &&
                  single.transitions == par.transitions,
              "parallel exploration differs: " + format_summary(single) + " vs " + format_summary(par));
    o.require(format_report(cfg, single) == format_report(cfg, par), "parallel report differs");
    o.detail = "states=" + std::to_string(single.states_visited) + " threads 1 vs " + std::to_string(opt.threads);
    return o;
}

// ---- scheduler oracle

std::string random_config(std::mt19937& rng) {
    std::uniform_int_distribution<int> coin(0, 1);
    const int parts = 1 + coin(rng);
    const int mtf = std::uniform_int_distribution<int>(4, 12)(rng);
    std::ostringstream c;
    c << "schedule.mtf = " << mtf << "\n";
    // split the frame into windows, leaving an occasional gap
    std::vector<int> cuts{0, mtf};
    while (static_cast<int>(cuts.size()) < parts + 2) {
        cuts.push_back(std::uniform_int_distribution<int>(1, mtf - 1)(rng));
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    }
    std::vector<int> first_start(parts, -1);
    int w = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const int owner = static_cast<int>(i) % (parts + 1);
        if (owner == parts) continue;  // gap
        c << "schedule.window." << ++w << " = P" << owner << ":" << cuts[i] << ":" << cuts[i + 1] << "\n";
        if (first_start[owner] < 0) first_start[owner] = cuts[i];
    }
    for (int p = 0; p < parts; ++p) {
        if (first_start[p] < 0) {
            // no slot fell to this partition; hand it the last window's range
            return random_config(rng);
        }
    }
    const int procs = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<std::vector<std::string>> owned(parts);
    for (int i = 0; i < procs; ++i) {
        const int p = std::uniform_int_distribution<int>(0, parts - 1)(rng);
        const int prio = std::uniform_int_distribution<int>(1, 4)(rng);
        const std::string name = "x" + std::to_string(i);
        if (coin(rng) != 0) {
            const int period = mtf * (1 + coin(rng));
            c << "process." << name << " = P" << p << ":" << prio << ":periodic:" << period << ":"
              << std::uniform_int_distribution<int>(1, period)(rng) << "\n";
        } else {
            c << "process." << name << " = P" << p << ":" << prio << ":aperiodic:-:inf\n";
        }
        owned[p].push_back(name);
    }
    c << "hm.module.POWER_FAIL = MODULE:MODULE_SHUTDOWN\n";
    const char* actions[] = {"PARTITION_IDLE", "PARTITION_WARM_RESTART", "PARTITION_COLD_RESTART"};
    int k = 0;
    for (int p = 0; p < parts; ++p) {
        c << "hm.partition.P" << p << ".DEADLINE_MISSED = PARTITION:"
          << actions[std::uniform_int_distribution<int>(0, 2)(rng)] << "\n";
        for (const auto& n : owned[p]) c << "script." << ++k << " = " << first_start[p] << ":main:CREATE_PROCESS:" << n << "\n";
        for (const auto& n : owned[p]) {
            if (coin(rng) != 0 || owned[p].size() == 1) c << "script." << ++k << " = " << first_start[p] << ":main:START:" << n << "\n";
        }
        c << "script." << ++k << " = " << first_start[p] << ":main:SET_PARTITION_MODE:NORMAL\n";
    }
    return c.str();
}

/// Owner of the window covering the tick, unless that partition is IDLE.
std::optional<PartitionId> oracle_partition(const SystemState& s) {
    const auto& cfg = s.cfg();
    const Tick off = s.clock_tick % cfg.schedule.mtf;
    for (const auto& w : cfg.schedule.windows) {
        if (w.start <= off && off < w.end) {
            if (s.part(w.partition).mode == PartitionMode::Idle) return std::nullopt;
            return w.partition;
        }
    }
    return std::nullopt;
}

std::optional<ProcessId> oracle_process(const SystemState& s, std::optional<PartitionId> part) {
    if (!part || s.part(*part).mode != PartitionMode::Normal) return std::nullopt;
    const auto& pr = s.part(*part);
    const auto runnable = [&](ProcessId id) {
        const auto st = s.proc(id).state;
        return st == ProcessState::Ready || st == ProcessState::Running;
    };
    if (pr.error_handler && s.has_process(*pr.error_handler) && runnable(*pr.error_handler)) return pr.error_handler;
    if (pr.lock_level > 0) {
        if (pr.lock_holder && s.has_process(*pr.lock_holder) && runnable(*pr.lock_holder)) return pr.lock_holder;
        return std::nullopt;
    }
    std::optional<ProcessId> best;
    for (std::size_t i = 0; i < s.processes.size(); ++i) {
        const ProcessId id{i};
        if (!s.has_process(id) || s.proc(id).partition != *part || !runnable(id)) continue;
        if (!best) {
            best = id;
            continue;
        }
        const auto& p = s.proc(id);
        const auto& b = s.proc(*best);
        const bool better = p.current_priority > b.current_priority ||
                            (p.current_priority == b.current_priority && p.ready_since < b.ready_since);
        if (better) best = id;
    }
    return best;
}

Outcome criterion8() {
    Outcome o;
    std::mt19937 rng(8653);
    int ticks_checked = 0;
    constexpr int kConfigs = 100;
    for (int i = 0; i < kConfigs && o.ok; ++i) {
        const auto text = random_config(rng);
        const auto cfg = parse_config(text, "random");
        ExploreOptions opt;
        opt.mode = Interleave::Pipeline;
        opt.depth_ticks = 3 * cfg.schedule.mtf;
        auto n = initial_node(cfg);
        while (o.ok) {
            const auto ev = node_events(n, opt);
            const bool tick_next = ev.empty() || (std::holds_alternative<StageEvent>(ev.front()) &&
                                                  std::get<StageEvent>(ev.front()).kind == StageKind::TickTock);
            if (tick_next) {
                // pipeline settled for this tick
                const auto& s = n.state;
                const auto part = oracle_partition(s);
                o.require(s.current_partition == part,
                          "config " + std::to_string(i) + " tick " + std::to_string(s.clock_tick) + ": partition differs\n" + text);
                o.require(s.current_process == oracle_process(s, part),
                          "config " + std::to_string(i) + " tick " + std::to_string(s.clock_tick) + ": process differs\n" + text);
                ++ticks_checked;
            }
            if (ev.empty() || n.state.module_shutdown) break;
            n = apply_node_event(n, ev.front(), opt);
        }
    }
    if (o.ok) o.detail = "configs=" + std::to_string(kConfigs) + " ticks=" + std::to_string(ticks_checked);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int n;
        const char* title;
        Outcome (*run)();
    };
    const Criterion all[] = {
        {1, "invariant suite on the reference scenario", criterion1},
        {2, "RESUME defect found by guard strengthening", criterion2},
        {3, "SEND_QUEUING_MESSAGE defect loses the sender's message", criterion3},
        {4, "RECEIVE_BUFFER defect never removes the message", criterion4},
        {5, "missing transitions of the standard state diagram", criterion5},
        {6, "service translation to disjoint events", criterion6},
        {7, "deterministic output, parallel equals sequential", criterion7},
        {8, "scheduler matches a brute-force oracle", criterion8},
    };
    int failed = 0;
    for (const auto& c : all) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << "criterion " << c.n << ": " << (o.ok ? "PASS" : "FAIL") << " - " << c.title;
        if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
        std::cout << std::endl;
        failed += o.ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
