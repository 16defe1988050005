#pragma once

#include <string>
#include <string_view>

#include "vdpo/mdp/finite_mdp.hpp"

namespace vdpo::mdp {

/// Plain-text MDP format.
///
///     <num_states> <num_actions> <discount>
///     one line per (s, a): P(.|s,a), |S| values
///     one line per s: R(s, .), |A| values
///     one line: rho, |S| values
///
/// Doubles are written in shortest round-trip form, so write/parse is exact.
std::string format_mdp(const FiniteMdp& mdp);
FiniteMdp parse_mdp(std::string_view text);

void save_mdp(const FiniteMdp& mdp, const std::string& path);
FiniteMdp load_mdp(const std::string& path);

}  // namespace vdpo::mdp
