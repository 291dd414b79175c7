#pragma once

#include <string>

#include <json.hpp>

#include "poisonbench/attackers.hpp"
#include "poisonbench/mdp.hpp"

namespace poisonbench {

// MdpSpec document: {S, A, H, P, R, initial_dist, reward_noise} with
// P[h][s][a][s'] and R[h][s][a] as nested arrays. Doubles are written in
// shortest round-trip form, so dump/parse is bit-stable.

nlohmann::json mdp_to_json(const MdpSpec& spec);
/// Throws ModelError on missing fields or shape mismatches; does not validate probabilities.
MdpSpec mdp_from_json(const nlohmann::json& doc);

/// {"kind": "deterministic", "actions": [[...]]} or {"kind": "stochastic", "probs": [[[...]]]}.
nlohmann::json policy_to_json(const Policy& pi);
Policy policy_from_json(const nlohmann::json& doc, int num_actions);

nlohmann::json value_tables_to_json(const ValueTables& tables);

/// Final N / Q-hat / L tables of an LCB-H attacker; -inf bounds are written as null.
nlohmann::json lcbh_tables_to_json(const LcbhState& state);

MdpSpec load_mdp(const std::string& path);
void save_mdp(const MdpSpec& spec, const std::string& path);

}  // namespace poisonbench
