#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "a653/dsl.hpp"
#include "a653/errors.hpp"
#include "a653/explorer.hpp"
#include "a653/invariants.hpp"
#include "a653/refinement.hpp"

namespace {

using namespace a653;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct Common {
    std::string config;
    std::vector<std::string> variants;
};

VariantToggles toggles_for(const ScenarioConfig& cfg, const std::vector<std::string>& overrides) {
    VariantToggles t = cfg.variants;
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--variant", "expected <name>=<as_written|corrected>");
        const auto name = o.substr(0, eq);
        const auto v = parse_variant(o.substr(eq + 1));
        if (!v) throw ConfigError("--variant", "bad value `" + o.substr(eq + 1) + "`");
        if (name == "resume") {
            t.resume = *v;
        } else if (name == "send_queuing") {
            t.send_queuing = *v;
        } else if (name == "receive_buffer") {
            t.receive_buffer = *v;
        } else {
            throw ConfigError("--variant", "unknown variant `" + name + "`");
        }
    }
    return t;
}

/// `<n>` ticks or `<n>mtf`.
Tick parse_depth(const std::string& s, const ScenarioConfig& cfg) {
    std::string_view v = s;
    Tick scale = 1;
    if (v.size() > 3 && v.substr(v.size() - 3) == "mtf") {
        scale = cfg.schedule.mtf;
        v.remove_suffix(3);
    }
    Tick n = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc{} || p != v.data() + v.size() || n < 0) throw ConfigError("--depth", "bad depth `" + s + "`");
    return n * scale;
}

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::Pass: return kExitPass;
        case Verdict::Fail: return kExitFail;
        case Verdict::Budget: return kExitBudget;
    }
    return kExitFail;
}

struct ExploreArgs {
    std::string depth = "3mtf";
    std::string mode = "free";
    unsigned threads = 1;
    std::size_t max_states = 0;
    double max_seconds = 0;
};

void add_explore_flags(CLI::App* cmd, ExploreArgs& x) {
    cmd->add_option("--depth", x.depth, "ticks, or <n>mtf")->capture_default_str();
    cmd->add_option("--mode", x.mode, "free or pipeline")->check(CLI::IsMember({"free", "pipeline"}))->capture_default_str();
    cmd->add_option("--threads", x.threads, "worker threads (0: all cores)")->capture_default_str();
    cmd->add_option("--max-states", x.max_states, "state budget (default from config)");
    cmd->add_option("--max-seconds", x.max_seconds, "time budget (default from config)");
}

ExploreOptions explore_options(const ScenarioConfig& cfg, const ExploreArgs& x, VariantToggles toggles) {
    ExploreOptions opt;
    opt.depth_ticks = parse_depth(x.depth, cfg);
    opt.mode = x.mode == "pipeline" ? Interleave::Pipeline : Interleave::Free;
    opt.threads = x.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : x.threads;
    opt.max_states = x.max_states > 0 ? x.max_states : cfg.explore.max_states;
    opt.max_seconds = x.max_seconds > 0 ? x.max_seconds : cfg.explore.max_seconds;
    opt.toggles = toggles;
    return opt;
}

int cmd_run(const Common& c, Tick ticks) {
    const auto cfg = load_config(c.config);
    const auto r = run_scenario(cfg, ticks, toggles_for(cfg, c.variants));
    for (const auto& line : r.trace) std::cout << line << "\n";
    if (r.violations.empty()) {
        std::cout << "invariants: PASS (" << kConservation << " checked) ticks=" << r.final_state.clock_tick << "\n";
        return kExitPass;
    }
    std::cout << "invariants: FAIL at tick " << r.violation_tick << "\n";
    for (int n : r.violations) std::cout << "  inv " << n << ": " << invariant_description(n) << "\n";
    std::cout << r.final_state.describe();
    return kExitFail;
}

int cmd_explore(const Common& c, const ExploreArgs& x) {
    const auto cfg = load_config(c.config);
    const auto opt = explore_options(cfg, x, toggles_for(cfg, c.variants));
    const auto report = explore(cfg, opt);
    std::cout << format_report(cfg, report);
    return verdict_exit(report.verdict);
}

int cmd_refine(const Common& c, const ExploreArgs& x, const std::string& pairing_arg, const std::string& model,
               const std::string& only) {
    const auto cfg = load_config(c.config);
    RefinementOptions opt;
    opt.explore = explore_options(cfg, x, toggles_for(cfg, c.variants));
    opt.explore.check_invariants = false;
    const auto m = parse_model_variant(model);
    if (!m) throw ConfigError("--model", "expected augmented or as_figured");
    opt.abstract_model = *m;
    const Pairing pairing = pairing_arg == "default" ? default_pairing() : load_pairing(pairing_arg);
    CheckReport report;
    if (only == "gs") {
        report = check_guard_strengthening(cfg, pairing, opt);
    } else if (only == "sim") {
        report = check_simulation(cfg, pairing, opt);
    } else {
        report = check_refinement(cfg, pairing, opt);
    }
    std::cout << format_report(cfg, report);
    return verdict_exit(report.verdict);
}

int cmd_translate(const std::string& file, bool check_disjoint, bool fragment) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file, "cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    dsl::Translation t;
    std::vector<dsl::ErrorClause> errors;
    if (fragment) {
        for (auto& e : dsl::translate({dsl::ProtoEvent{"fragment", {}, {}}}, dsl::parse_statements(ss.str()))) {
            auto& into = e.actions.empty() ? t.dropped : t.events;
            e.name = "fragment_" + std::to_string(into.size() + 1);
            into.push_back(std::move(e));
        }
    } else {
        const auto spec = dsl::parse_service(ss.str());
        errors = spec.errors;
        t = dsl::translate_service(spec);
    }
    std::cout << dsl::format_events(t.events);
    std::cout << "events=" << t.events.size() << " dropped=" << t.dropped.size();
    bool ok = true;
    if (check_disjoint) {
        const bool disjoint = dsl::check_disjointness(t.events);
        const bool covered = fragment || dsl::check_coverage(t, errors);
        std::cout << " disjoint=" << (disjoint ? "true" : "false");
        if (!fragment) std::cout << " coverage=" << (covered ? "true" : "false");
        ok = disjoint && covered;
    }
    std::cout << "\n";
    return ok ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARINC 653 separation kernel model and checkers"};
    app.require_subcommand(1);

    Common common;
    ExploreArgs xargs;
    Tick ticks = 30;
    std::string pairing = "default";
    std::string model = "augmented";
    std::string only = "all";
    std::string dsl_file;
    bool check_disjoint = false;
    bool fragment = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", common.config, "scenario file")->required();
        cmd->add_option("--variant", common.variants, "override a variant, e.g. resume=as_written");
    };

    auto* run = app.add_subcommand("run", "run the tick pipeline and the script");
    add_common(run);
    run->add_option("--ticks", ticks, "ticks to run")->capture_default_str();

    auto* exp = app.add_subcommand("explore", "bounded state-space exploration with invariant checks");
    add_common(exp);
    add_explore_flags(exp, xargs);

    auto* ref = app.add_subcommand("check-refinement", "guard strengthening and simulation against the abstract model");
    add_common(ref);
    add_explore_flags(ref, xargs);
    ref->add_option("--pairing", pairing, "default or a pairing file")->capture_default_str();
    ref->add_option("--model", model, "augmented or as_figured")->capture_default_str();
    ref->add_option("--only", only, "all, gs or sim")->check(CLI::IsMember({"all", "gs", "sim"}))->capture_default_str();

    auto* tr = app.add_subcommand("translate", "translate a service description into guarded events");
    tr->add_option("file", dsl_file, "service text")->required();
    tr->add_flag("--check-disjoint", check_disjoint, "check that event guards are pairwise disjoint");
    tr->add_flag("--fragment", fragment, "input is a bare statement list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(common, ticks);
        if (*exp) return cmd_explore(common, xargs);
        if (*ref) return cmd_refine(common, xargs, pairing, model, only);
        if (*tr) return cmd_translate(dsl_file, check_disjoint, fragment);
    } catch (const dsl::ParseError& e) {
        std::cerr << dsl_file << ":" << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
