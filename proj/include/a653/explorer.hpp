#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "a653/events.hpp"
#include "a653/state.hpp"

namespace a653 {

enum class Interleave : std::uint8_t { Pipeline, Free };
enum class Verdict : std::uint8_t { Pass, Fail, Budget };
enum class FindingKind : std::uint8_t { Invariant, GuardStrengthening, Simulation };

std::string_view to_string(Verdict v);
std::string_view to_string(FindingKind k);

struct ExploreOptions {
    Tick depth_ticks = 30;
    Interleave mode = Interleave::Free;
    std::size_t max_states = 1'000'000;
    double max_seconds = 60.0;
    unsigned threads = 1;
    bool check_invariants = true;
    VariantToggles toggles;
};

struct TraceStep {
    std::uint64_t digest = 0;  ///< state after the event
    std::string event;
};

struct Finding {
    FindingKind kind = FindingKind::Invariant;
    int invariant = 0;          ///< Invariant findings only
    std::string witness_class;  ///< findings with equal classes are one defect
    std::string detail;
    std::vector<Event> events;  ///< from the initial state
    std::vector<TraceStep> trace;
    std::string final_state;
};

struct CheckReport {
    Verdict verdict = Verdict::Pass;
    std::vector<Finding> findings;
    std::size_t states_visited = 0;
    std::size_t transitions = 0;
    Tick depth = 0;  ///< deepest clock tick reached
    std::string budget_reason;
};

/// `verdict=<..> kind=<..> inv=<n?> states=<n> depth=<n>`
std::string format_summary(const CheckReport& r);
/// One block per finding, then the summary line.
std::string format_report(const ScenarioConfig& cfg, const CheckReport& r);

/// Called for every explored transition; returns the findings it exhibits.
/// Must be thread-safe (it is called from workers on immutable data).
using TransitionHook = std::function<std::vector<Finding>(const SystemState& pre, const Event& e, const StepResult& r)>;

/// Exploration node: the state plus the bookkeeping that bounds it.
struct Node {
    SystemState state;
    int calls_in_tick = 0;
    int calls_total = 0;
    std::size_t script_pos = 0;

    [[nodiscard]] std::string key() const;
};

Node initial_node(const ScenarioConfig& cfg);

/// Successor events of a node. PIPELINE yields at most one.
std::vector<Event> node_events(const Node& n, const ExploreOptions& opt);
Node apply_node_event(const Node& n, const Event& e, const ExploreOptions& opt, StepResult* out = nullptr);

/// Candidate service calls for the current caller within the explore domains.
std::vector<ServiceCall> candidate_calls(const SystemState& s);

/// Breadth-first exploration. Invariant violations stop the search; hook
/// findings are collected, keeping the first (shortest) one per class.
CheckReport explore(const ScenarioConfig& cfg, const ExploreOptions& opt, const TransitionHook& hook = {});

/// Re-executes a counterexample and returns the digest after each event.
std::vector<std::uint64_t> replay(const ScenarioConfig& cfg, const ExploreOptions& opt, const std::vector<Event>& events);

struct RunResult {
    std::vector<std::string> trace;  ///< formatted trace lines
    SystemState final_state;
    std::vector<int> violations;     ///< first violation found, if any
    Tick violation_tick = 0;
};

/// Canonical pipeline plus script for `ticks` ticks, checking invariants
/// after every event.
RunResult run_scenario(const ScenarioConfig& cfg, Tick ticks, VariantToggles toggles);

}  // namespace a653
