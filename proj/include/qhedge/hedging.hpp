#pragma once

#include <cmath>
#include <numbers>

#include "qhedge/channel.hpp"
#include "qhedge/game.hpp"

namespace qhedge::hedging {

inline const double kCos = std::cos(std::numbers::pi / 8);
inline const double kSin = std::sin(std::numbers::pi / 8);

/// Single-round winning probability cos^2(pi/8).
inline double single_round_value() { return kCos * kCos; }

/// What independent play achieves at "win at least one of two": 1 - (1 - p)^2.
inline double independent_tail() {
  double p = single_round_value();
  return 1.0 - (1.0 - p) * (1.0 - p);
}

/// Alice keeps Z of a maximally entangled pair, sends X, gets Y back and
/// projects (Y, Z) onto cos(pi/8)|00> + sin(pi/8)|11> (outcome 1 = win).
inline SingleRoundGameSpec game_spec() {
  SpaceList xz{{"X", 2}, {"Z", 2}};
  SpaceList yz{{"Y", 2}, {"Z", 2}};
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(4);
  u(0) = u(3) = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(0) = kCos;
  v(3) = kSin;
  HermitianOperator pi1 = HermitianOperator::projector(yz, v);
  HermitianOperator pi0 = HermitianOperator::identity(yz) - pi1;
  return SingleRoundGameSpec{DensityOperator::pure(xz, u), {pi0, pi1}};
}

inline OutcomeOperators game() { return outcome_operators_single_round(game_spec()); }

/// Bob's two-copy strategy: |00> -> -|00> on the two qubits he receives.
inline KrausChannel phase_flip() {
  SpaceList in{{"X#0", 2}, {"X#1", 2}};
  SpaceList out{{"Y#0", 2}, {"Y#1", 2}};
  Matrix u = Matrix::Identity(4, 4);
  u(0, 0) = -1.0;
  return KrausChannel::unitary(in, out, u);
}

}  // namespace qhedge::hedging
