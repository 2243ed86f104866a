#pragma once

#include <string_view>
#include <vector>

#include "a653/state.hpp"

namespace a653 {

inline constexpr int kInvariantCount = 27;
/// Message conservation is reported after the 27 numbered properties.
inline constexpr int kConservation = 28;

std::string_view invariant_description(int n);

/// Numbers of every violated property, ascending. Includes kConservation.
std::vector<int> check_invariants(const SystemState& s);

[[nodiscard]] bool check_invariant(const SystemState& s, int n);

}  // namespace a653
