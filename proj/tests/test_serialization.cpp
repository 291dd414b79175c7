#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "poisonbench/environments.hpp"
#include "poisonbench/serialization.hpp"

namespace pb = poisonbench;
using nlohmann::json;

namespace {

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

void expect_bit_identical(const pb::MdpSpec& x, const pb::MdpSpec& y) {
  ASSERT_EQ(x.dims(), y.dims());
  for (int h = 0; h < x.horizon(); ++h)
    for (int s = 0; s < x.num_states(); ++s)
      for (int a = 0; a < x.num_actions(); ++a) {
        ASSERT_TRUE(bitwise_equal(x.reward(h, s, a), y.reward(h, s, a)));
        for (int n = 0; n < x.num_states(); ++n)
          ASSERT_TRUE(bitwise_equal(x.transition(h, s, a)[n], y.transition(h, s, a)[n]));
      }
  for (int s = 0; s < x.num_states(); ++s) ASSERT_TRUE(bitwise_equal(x.initial_dist()[s], y.initial_dist()[s]));
  EXPECT_EQ(x.reward_noise(), y.reward_noise());
}

}  // namespace

TEST(MdpJson, RoundTripIsBitStable) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const pb::MdpSpec spec = pb::gen_random_mdp(4, 3, 3, seed);
    const std::string text = pb::mdp_to_json(spec).dump();
    const pb::MdpSpec back = pb::mdp_from_json(json::parse(text));
    expect_bit_identical(spec, back);
    EXPECT_EQ(pb::mdp_to_json(back).dump(), text);
  }
}

TEST(MdpJson, RoundTripKeepsRewardNoise) {
  pb::MdpSpec spec = pb::two_state_fixture();
  spec.set_reward_noise(pb::RewardNoise::deterministic);
  const auto doc = pb::mdp_to_json(spec);
  EXPECT_EQ(doc.at("reward_noise"), "deterministic");
  EXPECT_EQ(pb::mdp_from_json(doc), spec);
}

TEST(MdpJson, SchemaFieldsPresent) {
  const auto doc = pb::mdp_to_json(pb::two_state_fixture());
  for (const char* key : {"S", "A", "H", "P", "R", "initial_dist", "reward_noise"}) EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_EQ(doc["P"].size(), 2u);
  EXPECT_EQ(doc["P"][0][0][1].size(), 2u);
  EXPECT_DOUBLE_EQ(doc["R"][0][1][0].get<double>(), 0.9);
}

TEST(MdpJson, MissingFieldNamed) {
  auto doc = pb::mdp_to_json(pb::two_state_fixture());
  doc.erase("R");
  try {
    pb::mdp_from_json(doc);
    FAIL() << "expected ModelError";
  } catch (const pb::ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("'R'"), std::string::npos);
  }
}

TEST(MdpJson, ShapeAndTypeErrorsAreModelErrors) {
  auto doc = pb::mdp_to_json(pb::two_state_fixture());
  doc["P"][1][0].erase(1);
  EXPECT_THROW(pb::mdp_from_json(doc), pb::ModelError);
  doc = pb::mdp_to_json(pb::two_state_fixture());
  doc["R"][0][0][0] = "high";
  EXPECT_THROW(pb::mdp_from_json(doc), pb::ModelError);
  doc = pb::mdp_to_json(pb::two_state_fixture());
  doc["reward_noise"] = "gaussian";
  EXPECT_THROW(pb::mdp_from_json(doc), pb::ModelError);
  EXPECT_THROW(pb::mdp_from_json(json::array()), pb::ModelError);
}

TEST(MdpJson, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "poisonbench_spec_roundtrip.json";
  const pb::MdpSpec spec = pb::gen_gridworld_2d();
  pb::save_mdp(spec, path.string());
  expect_bit_identical(spec, pb::load_mdp(path.string()));
  std::filesystem::remove(path);
  EXPECT_THROW(pb::load_mdp(path.string()), pb::ModelError);
}

TEST(PolicyJson, DeterministicAndBareForms) {
  pb::Policy pi = pb::Policy::deterministic(2, 3, 4);
  pi.set_action(1, 2, 3);
  const auto doc = pb::policy_to_json(pi);
  EXPECT_EQ(pb::policy_from_json(doc, 4), pi);
  EXPECT_EQ(pb::policy_from_json(doc.at("actions"), 4), pi);
  EXPECT_THROW(pb::policy_from_json(doc, 3), pb::ModelError);  // action 3 out of range
}

TEST(PolicyJson, StochasticRoundTrip) {
  const pb::Policy pi = pb::Policy::stochastic(2, 2, 3);
  EXPECT_EQ(pb::policy_from_json(pb::policy_to_json(pi), 3), pi);
}

TEST(PolicyJson, RejectsMalformed) {
  EXPECT_THROW(pb::policy_from_json(json{{"kind", "weird"}}, 2), pb::ModelError);
  EXPECT_THROW(pb::policy_from_json(json::array(), 2), pb::ModelError);
  EXPECT_THROW(pb::policy_from_json(json::parse("[[0, 1], [0]]"), 2), pb::ModelError);
  EXPECT_THROW(pb::policy_from_json(json::parse("[[0, \"x\"]]"), 2), pb::ModelError);
}

TEST(LcbhTablesJson, UnvisitedBoundsAreNull) {
  const pb::MdpSpec spec = pb::two_state_fixture();
  pb::LcbhState state(pb::solve_optimal(spec).policy, spec.dims(), 100, 0.05);
  const auto doc = pb::lcbh_tables_to_json(state);
  EXPECT_TRUE(doc["L"][0][0][0].is_null());
  EXPECT_EQ(doc["N"][1][1][1], 0);
  EXPECT_EQ(doc["Q_hat"].size(), 2u);
  EXPECT_TRUE(doc.contains("iota"));
  EXPECT_TRUE(doc.contains("target"));
}

TEST(ValueTablesJson, HasHorizonPlusOneValueRows) {
  const auto doc = pb::value_tables_to_json(pb::solve_optimal(pb::two_state_fixture()).values);
  EXPECT_EQ(doc["V"].size(), 3u);
  EXPECT_EQ(doc["Q"].size(), 2u);
  EXPECT_DOUBLE_EQ(doc["V"][0][1].get<double>(), 1.7);
}
