#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace qhedge {
namespace {

using testing::random_channel;
using testing::random_dims;
using testing::random_game_spec;
using testing::Rng;

double max_diff(const HermitianOperator& a, const HermitianOperator& b) {
  return (a.matrix() - align(b, a.spaces()).matrix()).cwiseAbs().maxCoeff();
}

StrategyChoi identity_strategy() {
  return strategy_from_channel(KrausChannel::identity(SpaceList{{"X", 2}}, SpaceList{{"Y", 2}}));
}

TEST(Game, HedgingIdentityStrategy) {
  OutcomeOperators g = hedging::game();
  const double c2 = hedging::single_round_value();
  EXPECT_NEAR(inner(g.op(1), identity_strategy().x), c2, 1e-12);
  auto probs = outcome_probabilities(g, identity_strategy());
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_NEAR(probs[0], 1.0 - c2, 1e-12);
  EXPECT_NEAR(probs[1], c2, 1e-12);
}

TEST(Game, HedgingConsistency) {
  OutcomeOperators g = hedging::game();
  EXPECT_LT(max_diff(g.op(0) + g.op(1), HermitianOperator::identity(g.full_space()) * 0.5), 1e-12);
  EXPECT_LT(max_diff(g.rho(), 0.5 * HermitianOperator::identity(SpaceList{{"X", 2}})), 1e-12);
}

TEST(Game, RejectsIncompleteMeasurement) {
  SingleRoundGameSpec spec = hedging::game_spec();
  spec.measurement[0] *= 0.9;
  EXPECT_THROW(outcome_operators_single_round(spec), InputError);
  SingleRoundGameSpec neg = hedging::game_spec();
  neg.measurement[0] = neg.measurement[0] + 2.0 * neg.measurement[1];
  neg.measurement[1] = -1.0 * neg.measurement[1];
  EXPECT_THROW(outcome_operators_single_round(neg), InputError);
}

TEST(Game, OutcomeOperatorsValidation) {
  OutcomeOperators g = hedging::game();
  std::vector<HermitianOperator> ops = g.ops();
  ops[0] *= 2.0;
  EXPECT_THROW(OutcomeOperators(g.layout(), ops, g.rho()), InputError);
  EXPECT_THROW(OutcomeOperators(g.layout(), g.ops(), g.rho(), {g.rho()}), InputError);
  EXPECT_THROW(OutcomeOperators(g.layout(), g.ops(), HermitianOperator::identity(SpaceList{{"X", 2}})), InputError);
}

// <P_k, J(Phi)> against Tr[Q_k (Phi (x) id_Z)(sigma)] computed by direct simulation.
TEST(Game, OutcomeOperatorsMatchDirectSimulation) {
  Rng rng(20);
  for (int gi = 0; gi < 20; ++gi) {
    auto dims = random_dims(rng);
    SingleRoundGameSpec spec = random_game_spec(rng, dims, 2 + static_cast<std::size_t>(gi % 2));
    OutcomeOperators g = outcome_operators_single_round(spec);
    for (int ci = 0; ci < 20; ++ci) {
      KrausChannel ch = random_channel(rng, SpaceList{{"X", dims.x}}, SpaceList{{"Y", dims.y}}, 1 + static_cast<std::size_t>(ci % 3));
      HermitianOperator j = choi(ch);
      DensityOperator after = apply_channel(ch, spec.sigma, {"X"});
      auto probs = outcome_probabilities(g, strategy_from_channel(ch));
      double total = 0;
      for (std::size_t k = 0; k < spec.measurement.size(); ++k) {
        double direct = inner(spec.measurement[k], after.op());
        EXPECT_NEAR(inner(g.op(k), j), direct, 1e-9);
        EXPECT_NEAR(probs[k], direct, 1e-9);
        total += probs[k];
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(Game, GroupOutcomes) {
  Rng rng(21);
  OutcomeOperators g = outcome_operators_single_round(random_game_spec(rng, {2, 2, 2}, 3));
  OutcomeOperators two = group_outcomes(g, {1, 2});
  ASSERT_EQ(two.outcome_count(), 2u);
  EXPECT_LT(max_diff(two.op(1), g.op(1) + g.op(2)), 1e-14);
  EXPECT_LT(max_diff(two.op(0), g.op(0)), 1e-14);
  EXPECT_THROW(group_outcomes(g, {5}), InputError);
}

TEST(Game, ParallelGame) {
  OutcomeOperators g = hedging::game();
  OutcomeOperators one = parallel_game(g, 1);
  EXPECT_LT(max_diff(one.op(1), relabel(g.op(1), "#0")), 1e-15);

  OutcomeOperators two = parallel_game(g, 2);
  ASSERT_EQ(two.outcome_count(), 4u);
  HermitianOperator p00 = kron(relabel(g.op(0), "#0"), relabel(g.op(0), "#1"));
  EXPECT_LT(max_diff(two.op(0), p00), 1e-15);
  // outcome (0,1) has index 1: first copy most significant
  EXPECT_LT(max_diff(two.op(1), kron(relabel(g.op(0), "#0"), relabel(g.op(1), "#1"))), 1e-15);
  EXPECT_NEAR(two.op(3).trace(), g.op(1).trace() * g.op(1).trace(), 1e-12);

  Rng rng(22);
  for (int i = 0; i < 5; ++i) {
    OutcomeOperators r = outcome_operators_single_round(random_game_spec(rng, random_dims(rng)));
    OutcomeOperators r2 = parallel_game(r, 2);
    HermitianOperator sum = HermitianOperator::zero(r2.full_space());
    for (const auto& p : r2.ops()) sum += p;
    HermitianOperator rho2 = kron(relabel(r.rho(), "#0"), relabel(r.rho(), "#1"));
    EXPECT_LT(max_diff(sum, embed(rho2, r2.full_space())), 1e-9);
  }
  EXPECT_THROW(parallel_game(g, 5), InputError);
}

TEST(Game, ParallelProbabilitiesFactorizeOnProductStrategies) {
  Rng rng(23);
  for (int i = 0; i < 10; ++i) {
    auto dims = random_dims(rng, 2);
    OutcomeOperators g = outcome_operators_single_round(random_game_spec(rng, dims, 2));
    KrausChannel ch = random_channel(rng, SpaceList{{"X", dims.x}}, SpaceList{{"Y", dims.y}});
    auto single = outcome_probabilities(g, strategy_from_channel(ch));
    SpaceList in0{{"X#0", dims.x}}, in1{{"X#1", dims.x}}, out0{{"Y#0", dims.y}}, out1{{"Y#1", dims.y}};
    KrausChannel c0(in0, out0, ch.kraus()), c1(in1, out1, ch.kraus());
    auto both = outcome_probabilities(parallel_game(g, 2), strategy_from_channel(tensor(c0, c1)));
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(both[a * 2 + b], single[a] * single[b], 1e-9);
  }
}

TEST(Game, ThresholdObjective) {
  OutcomeOperators g = hedging::game();
  auto w = [&](std::size_t i, std::size_t j) { return kron(relabel(g.op(i), "#0"), relabel(g.op(j), "#1")); };
  EXPECT_LT(max_diff(threshold_objective(g, 2, 1), w(0, 1) + w(1, 0) + w(1, 1)), 1e-14);
  EXPECT_LT(max_diff(threshold_objective(g, 1, 0), relabel(embed(g.rho(), g.full_space()), "#0")), 1e-12);
  EXPECT_EQ(strings_with_at_least(3, 2).size(), 4u);
  EXPECT_GE(min_eigenvalue(threshold_objective(g, 3, 2)), -1e-12);
  Rng rng(24);
  OutcomeOperators three = outcome_operators_single_round(random_game_spec(rng, {2, 2, 2}, 3));
  EXPECT_THROW(threshold_objective(three, 2, 1), InputError);
  EXPECT_THROW(threshold_objective(g, 2, 3), InputError);
}

TEST(Game, ValueObjective) {
  OutcomeOperators g = hedging::game();
  EXPECT_LT(max_diff(value_objective(g, {0, 1}, 1), relabel(g.op(1), "#0")), 1e-14);
  auto w = [&](std::size_t i, std::size_t j) { return kron(relabel(g.op(i), "#0"), relabel(g.op(j), "#1")); };
  EXPECT_LT(max_diff(value_objective(g, {0, 1}, 2), 0.5 * (w(0, 1) + w(1, 0)) + w(1, 1)), 1e-14);
  HermitianOperator rho2 = kron(relabel(g.rho(), "#0"), relabel(g.rho(), "#1"));
  HermitianOperator constant = value_objective(g, {0.7, 0.7}, 2);
  EXPECT_LT(max_diff(constant, 0.7 * embed(rho2, constant.spaces())), 1e-12);
  EXPECT_THROW(value_objective(g, {1.0}, 2), InputError);
}

TEST(Game, PhaseFlipStrategy) {
  OutcomeOperators two = parallel_game(hedging::game(), 2);
  StrategyChoi s = strategy_from_channel(hedging::phase_flip());
  EXPECT_EQ(s.x.dim(), 16u);
  EXPECT_NO_THROW(validate_strategy(s));
  auto probs = outcome_probabilities(two, s);
  EXPECT_NEAR(probs[0], 0.0, 1e-12);
  EXPECT_NEAR(probs[1] + probs[2], 1.0, 1e-12);
  EXPECT_NEAR(probs[3], 0.0, 1e-12);
}

TEST(Game, StrategyValidation) {
  StrategyChoi s = identity_strategy();
  s.x *= 0.5;
  EXPECT_THROW(validate_strategy(s), InputError);
  Rng rng(25);
  for (int i = 0; i < 10; ++i) {
    StrategyChoi r = strategy_from_channel(random_channel(rng, SpaceList{{"X", 3}}, SpaceList{{"Y", 2}}));
    EXPECT_LT(max_diff(partial_trace(r.x, {"Y"}), HermitianOperator::identity(SpaceList{{"X", 3}})), 1e-10);
  }
}

TEST(Game, OutcomeProbabilitiesAffineInStrategy) {
  Rng rng(26);
  OutcomeOperators g = outcome_operators_single_round(random_game_spec(rng, {2, 2, 2}, 3));
  StrategyChoi a = strategy_from_channel(random_channel(rng, SpaceList{{"X", 2}}, SpaceList{{"Y", 2}}));
  StrategyChoi b = strategy_from_channel(random_channel(rng, SpaceList{{"X", 2}}, SpaceList{{"Y", 2}}));
  StrategyChoi mix{a.layout, 0.3 * a.x + 0.7 * b.x, {}};
  auto pa = outcome_probabilities(g, a), pb = outcome_probabilities(g, b), pm = outcome_probabilities(g, mix);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(pm[i], 0.3 * pa[i] + 0.7 * pb[i], 1e-12);
}

TEST(Game, DephaseGame) {
  OutcomeOperators g = hedging::game();
  OutcomeOperators d = dephase_game(g);
  EXPECT_TRUE(is_diagonal_game(d));
  EXPECT_FALSE(is_diagonal_game(g));
  OutcomeOperators dd = dephase_game(d);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(dd.op(i).matrix(), d.op(i).matrix());
  EXPECT_LT(max_diff(d.op(0) + d.op(1), dephase(g.op(0) + g.op(1))), 1e-15);

  Rng rng(27);
  OutcomeOperators classical = outcome_operators_single_round(testing::random_diagonal_game_spec(rng, {2, 3, 2}));
  OutcomeOperators same = dephase_game(classical);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(same.op(i).matrix(), classical.op(i).matrix());
}

TEST(Game, TwoRoundGameChain) {
  Rng rng(28);
  OutcomeOperators g = testing::random_two_round_game(rng, 3);
  EXPECT_EQ(g.rounds(), 2u);
  EXPECT_EQ(g.layout().strategy_space(2).labels(), (std::vector<std::string>{"Y1", "Y2", "X1", "X2"}));
  EXPECT_EQ(g.layout().consistency_space(2).labels(), (std::vector<std::string>{"Y1", "X1", "X2"}));
  std::vector<HermitianOperator> bad = g.ops();
  bad[0] *= 1.5;
  EXPECT_THROW(OutcomeOperators(g.layout(), bad, g.rho(), {g.consistency(2)}), InputError);
  OutcomeOperators gp = parallel_game(g, 2);
  EXPECT_EQ(gp.rounds(), 2u);
  EXPECT_EQ(gp.outcome_count(), 9u);
}

}  // namespace
}  // namespace qhedge
