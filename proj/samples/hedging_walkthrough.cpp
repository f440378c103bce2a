// Builds the hedging game from its single-round description, solves the
// one- and two-copy problems, and checks the textbook certificates.
#include <cstdio>

#include "qhedge/qhedge.hpp"

int main() {
  using namespace qhedge;
  OutcomeOperators g = hedging::game();

  sdp::SdpProblem single = sdp::compile_primal(g, g.op(1));
  sdp::SolveReport r1 = sdp::solve(single);
  std::printf("one copy:             %.10f (%s, %d iterations)\n", r1.primal_value, sdp::to_string(r1.status),
              r1.iterations);

  GameLayout two = g.layout().parallel(2);
  sdp::SolveReport r2 = sdp::solve(sdp::compile_primal(two, threshold_objective(g, 2, 1)));
  std::printf("two copies, >= 1 win: %.10f\n", r2.primal_value);
  std::printf("independent play:     %.10f\n", hedging::independent_tail());

  auto probs = outcome_probabilities(parallel_game(g, 2), strategy_from_channel(hedging::phase_flip()));
  std::printf("phase flip: lose both %.3g, exactly one win %.12f\n", probs[0], probs[1] + probs[2]);

  // Dual witness from the one-copy solve, nudged onto the feasible set.
  DualWitness w = sdp::repair_witness(g.layout(), g.op(1), sdp::extract_witness(g.layout(), single, r1));
  DualWitness snk = witness_recursive_snk(w, g, 2, 1);
  auto check = sdp::check_dual_feasibility(two, threshold_objective(g, 2, 1), snk, 1e-9);
  std::printf("S(2,1) witness: %s, value %.10f\n", check.feasible ? "feasible" : "infeasible", check.value);
  return 0;
}
