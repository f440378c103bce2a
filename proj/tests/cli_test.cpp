#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "qhedge/cli.hpp"
#include "support.hpp"

namespace qhedge::cli {
namespace {

using testing::TempDir;

std::string game_path() { return testing::data_file("hedging_game.json"); }

TEST(Objective, Parsing) {
  EXPECT_EQ(parse_objective("win").kind, ObjectiveSpec::Kind::win);
  ObjectiveSpec t = parse_objective("threshold:3,2");
  EXPECT_EQ(t.kind, ObjectiveSpec::Kind::threshold);
  EXPECT_EQ(t.n, 3u);
  EXPECT_EQ(t.k, 2u);
  ObjectiveSpec v = parse_objective("value:0.5,1", 2);
  EXPECT_EQ(v.values, (std::vector<double>{0.5, 1}));
  EXPECT_EQ(v.n, 2u);
  EXPECT_THROW(parse_objective("threshold:2,3"), InputError);
  EXPECT_THROW(parse_objective("threshold:2"), InputError);
  EXPECT_THROW(parse_objective("value:"), InputError);
  EXPECT_THROW(parse_objective("value:a,b"), InputError);
  EXPECT_THROW(parse_objective("lose"), InputError);
}

TEST(Solve, HedgingGameValues) {
  GlobalOptions opt;
  RunReport r = cmd_solve({game_path(), "win"}, opt);
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_NEAR(r.results["value"].get<double>(), hedging::single_round_value(), 1e-6);
  EXPECT_TRUE(r.results["certified_upper_bound"]["feasible"].get<bool>());
  EXPECT_GE(r.results["certified_upper_bound"]["value"].get<double>(), r.results["value"].get<double>() - 1e-7);

  RunReport k1 = cmd_solve({game_path(), "threshold:2,1"}, opt);
  EXPECT_NEAR(k1.results["value"].get<double>(), 1.0, 1e-6);
  // averaged value over two copies: no gain over one round
  RunReport v = cmd_solve({game_path(), "value:0,1", 2}, opt);
  EXPECT_NEAR(v.results["value"].get<double>(), hedging::single_round_value(), 1e-5);
  EXPECT_TRUE(r.timings_ms.count("solve"));
}

TEST(Solve, IterationLimitIsNumerical) {
  GlobalOptions opt;
  opt.max_iter = 1;
  RunReport r = cmd_solve({game_path(), "win"}, opt);
  EXPECT_EQ(r.exit_code, kNumerical);
  EXPECT_FALSE(r.results.contains("value"));
}

TEST(Solve, MalformedInputIsAnInputError) {
  TempDir dir;
  const std::string bad = dir.file("bad.json");
  io::write_text(bad, "{ \"type\": \"single_round\", ");
  const std::string out = dir.file("w.json");
  SolveArgs a{bad, "win", 1, out};
  EXPECT_THROW(cmd_solve(a, GlobalOptions{}), InputError);
  EXPECT_FALSE(std::filesystem::exists(out));
  EXPECT_THROW(cmd_solve({dir.file("missing.json"), "win"}, GlobalOptions{}), InputError);
  EXPECT_THROW(cmd_solve({game_path(), "value:1,2,3", 1}, GlobalOptions{}), InputError);
}

TEST(Solve, WitnessOutCertifies) {
  TempDir dir;
  const std::string w = dir.file("w.json");
  RunReport r = cmd_solve({game_path(), "threshold:2,2", 1, w}, GlobalOptions{});
  ASSERT_EQ(r.exit_code, kOk);
  ASSERT_TRUE(std::filesystem::exists(w));
  CertifyArgs c;
  c.game_file = game_path();
  c.witness_file = w;
  RunReport cr = cmd_certify(c, GlobalOptions{});
  EXPECT_EQ(cr.exit_code, kOk);
  EXPECT_EQ(cr.results["objective"], "threshold:2,2");
  EXPECT_NEAR(cr.results["feasibility"]["value"].get<double>(), std::pow(hedging::single_round_value(), 2), 1e-5);
}

TEST(Certify, Constructions) {
  GlobalOptions opt;
  const double p = hedging::single_round_value();
  struct Case {
    std::string name;
    std::size_t n;
    std::optional<std::size_t> k;
    double expected;
  } cases[] = {
      {"tensor-power", 2, std::nullopt, p * p},
      {"naive", 2, 1, 2 * p + p * p},
      {"snk", 2, 1, 2 * p},
      {"snk", 3, 2, 3 * p * p},
      {"average", 3, std::nullopt, p},
  };
  for (const auto& cs : cases) {
    CertifyArgs a;
    a.game_file = game_path();
    a.construction = cs.name;
    a.n = cs.n;
    a.k = cs.k;
    RunReport r = cmd_certify(a, opt);
    EXPECT_EQ(r.exit_code, kOk) << cs.name;
    EXPECT_NEAR(r.results["feasibility"]["value"].get<double>(), cs.expected, 1e-6) << cs.name << " n=" << cs.n;
  }
}

TEST(Certify, WitnessRoundTripAndTampering) {
  TempDir dir;
  CertifyArgs a;
  a.game_file = game_path();
  a.construction = "snk";
  a.n = 2;
  a.k = 1;
  a.witness_out = dir.file("snk.json");
  ASSERT_EQ(cmd_certify(a, GlobalOptions{}).exit_code, kOk);

  CertifyArgs b;
  b.game_file = game_path();
  b.witness_file = *a.witness_out;
  RunReport r = cmd_certify(b, GlobalOptions{});
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_EQ(r.results["construction"], "snk");

  // halve Y: the claimed value is rewritten consistently, but the value drops below the optimum
  DualWitness w = io::witness_from_json(io::read_json(*a.witness_out));
  w.y = w.y * 0.5;
  const std::string tampered = dir.file("tampered.json");
  io::write_text(tampered, io::to_json(w).dump());
  b.witness_file = tampered;
  EXPECT_EQ(cmd_certify(b, GlobalOptions{}).exit_code, kDomainNegative);
}

TEST(Certify, ArgumentErrors) {
  CertifyArgs a;
  a.game_file = game_path();
  EXPECT_THROW(cmd_certify(a, GlobalOptions{}), InputError);
  a.construction = "magic";
  EXPECT_THROW(cmd_certify(a, GlobalOptions{}), InputError);
  a.construction = "classical-binomial";
  a.k = 1;
  EXPECT_THROW(cmd_certify(a, GlobalOptions{}), DomainError);
  a.construction = "snk";
  a.k = 5;
  EXPECT_THROW(cmd_certify(a, GlobalOptions{}), InputError);
}

TEST(HedgingDemo, Values) {
  RunReport r = cmd_hedging_demo(GlobalOptions{});
  EXPECT_EQ(r.exit_code, kOk);
  const double p = hedging::single_round_value();
  EXPECT_NEAR(r.results["single_repetition"]["value"].get<double>(), p, 1e-6);
  EXPECT_NEAR(r.results["two_repetitions_at_least_one"]["value"].get<double>(), 1.0, 1e-6);
  EXPECT_NEAR(r.results["two_repetitions_both"]["value"].get<double>(), p * p, 1e-5);
  EXPECT_LE(r.results["phase_flip"]["probabilities"]["lose_both"].get<double>(), 1e-12);
  EXPECT_NEAR(r.results["phase_flip"]["exactly_one_win"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(r.results["independent_play_at_least_one"]["value"].get<double>(), 0.9785533906, 1e-6);
  EXPECT_FALSE(r.summary.empty());
}

TEST(Plan, ExitCodesAndErrors) {
  RunReport r = cmd_plan({0.9, 0.05, 1e-3});
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_EQ(r.results["plan"]["n"], 32);
  EXPECT_EQ(r.results["plan"]["k"], 8);
  EXPECT_THROW(cmd_plan({0.6, 0.59, 1e-3}), DomainError);
  EXPECT_THROW(cmd_plan({0.9, 0.05, 0.6}), InputError);
}

TEST(PlotEntropy, Csv) {
  std::string csv;
  RunReport r = cmd_plot_entropy(CurveArgs{}, csv);
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_TRUE(r.results["above_x_over_3"].get<bool>());
  EXPECT_TRUE(r.results["monotone_increasing"].get<bool>());
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y");
  std::size_t rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 100u);
  EXPECT_EQ(last, "1,1");
  EXPECT_THROW(cmd_plot_entropy({0.5, 0.2, 0.1}, csv), InputError);
}

TEST(Reports, DeterministicResults) {
  RunReport a = cmd_solve({game_path(), "threshold:2,1"}, GlobalOptions{});
  RunReport b = cmd_solve({game_path(), "threshold:2,1"}, GlobalOptions{});
  EXPECT_EQ(a.results.dump(), b.results.dump());
  io::json j = to_json(a);
  for (const char* key : {"command", "toolkit_version", "inputs", "results", "timings_ms", "exit_code"})
    EXPECT_TRUE(j.contains(key)) << key;
}

}  // namespace
}  // namespace qhedge::cli
