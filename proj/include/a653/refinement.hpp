#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "a653/explorer.hpp"
#include "a653/kernel.hpp"

namespace a653 {

/// Which abstract events each concrete event (service or stage name) may
/// claim to realize. process_state_transition is implicit for all.
struct Pairing {
    std::map<std::string, std::set<std::string>> allowed;
};

Pairing default_pairing();
/// Text form: `<concrete> = <abstract>[,<abstract>...]`, `#` comments.
Pairing parse_pairing(std::string_view text);
Pairing load_pairing(const std::filesystem::path& path);
std::string format_pairing(const Pairing& p);

struct RefinementOptions {
    TransitionModelVariant abstract_model = TransitionModelVariant::Augmented;
    bool guard_strengthening = true;
    bool simulation = true;
    ExploreOptions explore;
};

/// Guard-strengthening and simulation findings of one concrete transition.
std::vector<Finding> refinement_findings(const SystemState& pre, const Event& e, const StepResult& r,
                                         const Pairing& pairing, const RefinementOptions& opt);

CheckReport check_refinement(const ScenarioConfig& cfg, const Pairing& pairing, RefinementOptions opt);
CheckReport check_guard_strengthening(const ScenarioConfig& cfg, const Pairing& pairing, RefinementOptions opt);
CheckReport check_simulation(const ScenarioConfig& cfg, const Pairing& pairing, RefinementOptions opt);

}  // namespace a653
