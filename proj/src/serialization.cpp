#include "poisonbench/serialization.hpp"

#include <cmath>
#include <fstream>

namespace poisonbench {

using nlohmann::json;

namespace {

const json& field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ModelError(std::string("MDP document: missing field '") + key + "'");
  return doc.at(key);
}

void expect_size(const json& node, int n, const std::string& what) {
  if (!node.is_array() || static_cast<int>(node.size()) != n) {
    throw ModelError("MDP document: " + what + " must be an array of length " + std::to_string(n));
  }
}

}  // namespace

json mdp_to_json(const MdpSpec& spec) {
  const int S = spec.num_states();
  const int A = spec.num_actions();
  const int H = spec.horizon();
  json P = json::array();
  json R = json::array();
  for (int h = 0; h < H; ++h) {
    json Ph = json::array();
    json Rh = json::array();
    for (int s = 0; s < S; ++s) {
      json Phs = json::array();
      json Rhs = json::array();
      for (int a = 0; a < A; ++a) {
        const auto row = spec.transition(h, s, a);
        Phs.push_back(json(std::vector<double>(row.begin(), row.end())));
        Rhs.push_back(spec.reward(h, s, a));
      }
      Ph.push_back(std::move(Phs));
      Rh.push_back(std::move(Rhs));
    }
    P.push_back(std::move(Ph));
    R.push_back(std::move(Rh));
  }
  const auto init = spec.initial_dist();
  return json{{"S", S},
              {"A", A},
              {"H", H},
              {"P", std::move(P)},
              {"R", std::move(R)},
              {"initial_dist", std::vector<double>(init.begin(), init.end())},
              {"reward_noise", spec.reward_noise() == RewardNoise::bernoulli ? "bernoulli" : "deterministic"}};
}

static MdpSpec mdp_from_json_unchecked(const json& doc) {
  const int S = field(doc, "S").get<int>();
  const int A = field(doc, "A").get<int>();
  const int H = field(doc, "H").get<int>();
  MdpSpec spec(S, A, H);
  const json& P = field(doc, "P");
  const json& R = field(doc, "R");
  expect_size(P, H, "P");
  expect_size(R, H, "R");
  for (int h = 0; h < H; ++h) {
    expect_size(P[h], S, "P[h]");
    expect_size(R[h], S, "R[h]");
    for (int s = 0; s < S; ++s) {
      expect_size(P[h][s], A, "P[h][s]");
      expect_size(R[h][s], A, "R[h][s]");
      for (int a = 0; a < A; ++a) {
        expect_size(P[h][s][a], S, "P[h][s][a]");
        auto row = spec.transition(h, s, a);
        for (int next = 0; next < S; ++next) row[next] = P[h][s][a][next].get<double>();
        spec.reward(h, s, a) = R[h][s][a].get<double>();
      }
    }
  }
  const json& init = field(doc, "initial_dist");
  expect_size(init, S, "initial_dist");
  for (int s = 0; s < S; ++s) spec.initial_dist()[s] = init[s].get<double>();
  if (doc.contains("reward_noise")) {
    const auto noise = doc.at("reward_noise").get<std::string>();
    if (noise == "bernoulli") {
      spec.set_reward_noise(RewardNoise::bernoulli);
    } else if (noise == "deterministic") {
      spec.set_reward_noise(RewardNoise::deterministic);
    } else {
      throw ModelError("MDP document: unknown reward_noise '" + noise + "'");
    }
  }
  return spec;
}

json policy_to_json(const Policy& pi) {
  if (pi.is_deterministic()) {
    json actions = json::array();
    for (int h = 0; h < pi.horizon(); ++h) {
      std::vector<int> row(pi.num_states());
      for (int s = 0; s < pi.num_states(); ++s) row[s] = pi.action(h, s);
      actions.push_back(row);
    }
    return json{{"kind", "deterministic"}, {"actions", std::move(actions)}};
  }
  json probs = json::array();
  for (int h = 0; h < pi.horizon(); ++h) {
    json ph = json::array();
    for (int s = 0; s < pi.num_states(); ++s) {
      std::vector<double> row(pi.num_actions());
      for (int a = 0; a < pi.num_actions(); ++a) row[a] = pi.prob(h, s, a);
      ph.push_back(row);
    }
    probs.push_back(std::move(ph));
  }
  return json{{"kind", "stochastic"}, {"probs", std::move(probs)}};
}

static Policy policy_from_json_unchecked(const json& doc, int num_actions) {
  // A bare nested array is accepted as a deterministic action table.
  const bool bare = doc.is_array();
  const std::string kind = bare ? "deterministic" : doc.value("kind", "deterministic");
  if (kind == "deterministic") {
    const json& actions = bare ? doc : field(doc, "actions");
    if (!actions.is_array() || actions.empty() || !actions[0].is_array() || actions[0].empty()) {
      throw ModelError("policy document: 'actions' must be a non-empty [h][s] array");
    }
    const int H = static_cast<int>(actions.size());
    const int S = static_cast<int>(actions[0].size());
    auto pi = Policy::deterministic(H, S, num_actions);
    for (int h = 0; h < H; ++h) {
      expect_size(actions[h], S, "actions[h]");
      for (int s = 0; s < S; ++s) pi.set_action(h, s, actions[h][s].get<int>());
    }
    return pi;
  }
  if (kind == "stochastic") {
    const json& probs = field(doc, "probs");
    if (!probs.is_array() || probs.empty() || !probs[0].is_array() || probs[0].empty()) {
      throw ModelError("policy document: 'probs' must be a non-empty [h][s][a] array");
    }
    const int H = static_cast<int>(probs.size());
    const int S = static_cast<int>(probs[0].size());
    auto pi = Policy::stochastic(H, S, num_actions);
    for (int h = 0; h < H; ++h) {
      expect_size(probs[h], S, "probs[h]");
      for (int s = 0; s < S; ++s) {
        expect_size(probs[h][s], num_actions, "probs[h][s]");
        auto row = pi.probs(h, s);
        for (int a = 0; a < num_actions; ++a) row[a] = probs[h][s][a].get<double>();
      }
    }
    return pi;
  }
  throw ModelError("policy document: unknown kind '" + kind + "'");
}

MdpSpec mdp_from_json(const json& doc) {
  try {
    return mdp_from_json_unchecked(doc);
  } catch (const json::exception& e) {
    throw ModelError(std::string("MDP document: ") + e.what());
  }
}

Policy policy_from_json(const json& doc, int num_actions) {
  try {
    return policy_from_json_unchecked(doc, num_actions);
  } catch (const json::exception& e) {
    throw ModelError(std::string("policy document: ") + e.what());
  }
}

json value_tables_to_json(const ValueTables& tables) {
  json V = json::array();
  for (int h = 0; h <= tables.horizon(); ++h) {
    std::vector<double> row(tables.num_states());
    for (int s = 0; s < tables.num_states(); ++s) row[s] = tables.v(h, s);
    V.push_back(row);
  }
  json Q = json::array();
  for (int h = 0; h < tables.horizon(); ++h) {
    json qh = json::array();
    for (int s = 0; s < tables.num_states(); ++s) {
      const auto row = tables.q_row(h, s);
      qh.push_back(std::vector<double>(row.begin(), row.end()));
    }
    Q.push_back(std::move(qh));
  }
  return json{{"V", std::move(V)}, {"Q", std::move(Q)}};
}

json lcbh_tables_to_json(const LcbhState& state) {
  const Dims d = state.dims();
  json N = json::array();
  json Qhat = json::array();
  json L = json::array();
  for (int h = 0; h < d.horizon; ++h) {
    json nh = json::array();
    json qh = json::array();
    json lh = json::array();
    for (int s = 0; s < d.num_states; ++s) {
      json ns = json::array();
      json qs = json::array();
      json ls = json::array();
      for (int a = 0; a < d.num_actions; ++a) {
        ns.push_back(state.visits(h, s, a));
        qs.push_back(state.q_hat(h, s, a));
        const double lb = state.lower_bound(h, s, a);
        ls.push_back(std::isfinite(lb) ? json(lb) : json(nullptr));
      }
      nh.push_back(std::move(ns));
      qh.push_back(std::move(qs));
      lh.push_back(std::move(ls));
    }
    N.push_back(std::move(nh));
    Qhat.push_back(std::move(qh));
    L.push_back(std::move(lh));
  }
  return json{{"iota", state.iota()}, {"N", std::move(N)}, {"Q_hat", std::move(Qhat)}, {"L", std::move(L)},
              {"target", policy_to_json(state.target())}};
}

MdpSpec load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open MDP file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ModelError("cannot parse MDP file " + path + ": " + e.what());
  }
  return mdp_from_json(doc);
}

void save_mdp(const MdpSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write MDP file: " + path);
  out << mdp_to_json(spec).dump(2) << '\n';
}

}  // namespace poisonbench
