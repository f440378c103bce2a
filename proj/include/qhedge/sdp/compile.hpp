#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qhedge/game.hpp"
#include "qhedge/sdp/problem.hpp"
#include "qhedge/sdp/solver.hpp"

namespace qhedge::sdp {

namespace detail {

inline void require_objective(const GameLayout& layout, const HermitianOperator& objective) {
  if (!objective.spaces().same_set(layout.full_space()))
    throw InputError("objective lives on " + describe(objective.spaces()) + ", expected " + describe(layout.full_space()));
}

inline std::string index_name(const char* base, std::size_t j) { return std::string(base) + std::to_string(j); }

inline double product_of_output_dims(const GameLayout& l, std::size_t j) {
  double d = 1;
  for (std::size_t i = 1; i <= j; ++i) d *= static_cast<double>(l.round(i).outputs.total_dim());
  return d;
}

}  // namespace detail

/// Strictly feasible points of the strategy SDP and its dual.
struct SlaterPoints {
  std::vector<HermitianOperator> primal;  // X_1 .. X_r
  std::vector<HermitianOperator> dual;    // Y_1 .. Y_r
};

/// Primal: X_j = I / (dim Y_1 ... dim Y_j).
/// Dual: Y_r = (||objective|| + 1) I and Y_j = 2 dim(X_{j+1}) c_{j+1} I below it,
/// which leaves every dual slack >= I.
inline SlaterPoints slater_points(const GameLayout& layout, const HermitianOperator& objective) {
  detail::require_objective(layout, objective);
  const std::size_t r = layout.rounds();
  SlaterPoints s;
  for (std::size_t j = 1; j <= r; ++j)
    s.primal.push_back((1.0 / detail::product_of_output_dims(layout, j)) *
                       HermitianOperator::identity(layout.strategy_space(j)));
  std::vector<double> c(r + 1, 0.0);
  c[r] = operator_norm(objective) + 1.0;
  for (std::size_t j = r - 1; j >= 1; --j)
    c[j] = 2.0 * static_cast<double>(layout.round(j + 1).inputs.total_dim()) * c[j + 1];
  for (std::size_t j = 1; j <= r; ++j) s.dual.push_back(c[j] * HermitianOperator::identity(layout.consistency_space(j)));
  return s;
}

inline SlaterPoints slater_points(const OutcomeOperators& g, const HermitianOperator& objective) {
  return slater_points(g.layout(), objective);
}

/// maximize <objective, X_r> over strategies: Tr_{Y_1} X_1 = I, Tr_{Y_j} X_j = X_{j-1} (x) I_{X_j}.
/// Block j is X_j; constraint group "Y<j>" scalarizes the j-th equality over a
/// basis of Y_1..Y_{j-1} X_1..X_j, so its multipliers form the dual variable Y_j.
inline SdpProblem compile_primal(const GameLayout& layout, const HermitianOperator& objective) {
  detail::require_objective(layout, objective);
  const std::size_t r = layout.rounds();
  SdpProblem p;
  p.sense = Sense::maximize;
  for (std::size_t j = 1; j <= r; ++j) {
    p.blocks.push_back({detail::index_name("X", j), layout.strategy_space(j)});
    p.objective.push_back(j == r ? align(objective, layout.strategy_space(j))
                                 : HermitianOperator::zero(layout.strategy_space(j)));
  }
  for (std::size_t j = 1; j <= r; ++j) {
    SpaceList dual_space = layout.consistency_space(j);
    const std::size_t d = dual_space.total_dim();
    ConstraintGroup grp{detail::index_name("Y", j), dual_space, p.constraints.size(), d * d};
    const SpaceList& strat = layout.strategy_space(j);
    for (std::size_t a = 0; a < d * d; ++a) {
      HermitianOperator e = basis_operator(dual_space, a);
      Constraint c;
      // <E, Tr_{Y_j} X_j> = <E (x) I_{Y_j}, X_j>
      c.terms.push_back({j - 1, embed(e, strat)});
      if (j == 1) {
        c.rhs = e.trace();
      } else {
        // - <E, X_{j-1} (x) I_{X_j}> = - <Tr_{X_j} E, X_{j-1}>
        c.terms.push_back({j - 2, align(-1.0 * partial_trace(e, layout.round(j).inputs.labels()),
                                        layout.strategy_space(j - 1))});
        c.rhs = 0;
      }
      p.constraints.push_back(std::move(c));
    }
    p.groups.push_back(std::move(grp));
  }

  SlaterPoints s = slater_points(layout, objective);
  InitialPoint start;
  for (const auto& x : s.primal) start.x.push_back(x.matrix());
  for (std::size_t j = 1; j <= r; ++j) {
    auto coords = basis_coordinates(align(s.dual[j - 1], layout.consistency_space(j)));
    start.y.insert(start.y.end(), coords.begin(), coords.end());
  }
  p.start = std::move(start);
  return p;
}

inline SdpProblem compile_primal(const OutcomeOperators& g, const HermitianOperator& objective) {
  return compile_primal(g.layout(), objective);
}

/// minimize Tr(Y_1) subject to Y_j (x) I_{Y_j} - Tr_{X_{j+1}}(Y_{j+1}) = S_j >= 0 (j < r)
/// and Y_r (x) I_{Y_r} - objective = S_r >= 0.
///
/// Blocks hold Y_j shifted by a multiple of the identity (zero for a PSD objective);
/// the offset puts the reported value back on the Tr(Y_1) scale.
inline SdpProblem compile_dual(const GameLayout& layout, const HermitianOperator& objective) {
  detail::require_objective(layout, objective);
  const std::size_t r = layout.rounds();
  // Every feasible Y_j satisfies Y_j >= -c_j I with c_r = max(0, -lambda_min(objective))
  // and c_j = dim(X_{j+1}) c_{j+1}, so Y'_j = Y_j + c_j I is PSD without losing any point.
  std::vector<double> shift(r + 2, 0.0);
  shift[r] = std::max(0.0, -min_eigenvalue(objective));
  for (std::size_t j = r - 1; j >= 1; --j)
    shift[j] = static_cast<double>(layout.round(j + 1).inputs.total_dim()) * shift[j + 1];
  SdpProblem p;
  p.sense = Sense::minimize;
  std::vector<std::size_t> pos(r + 1), slack(r + 1);
  for (std::size_t j = 1; j <= r; ++j) {
    SpaceList ys = layout.consistency_space(j);
    pos[j] = p.blocks.size();
    p.blocks.push_back({detail::index_name("Y", j), ys});
    p.objective.push_back(j == 1 ? HermitianOperator::identity(ys) : HermitianOperator::zero(ys));
  }
  p.offset = -shift[1] * static_cast<double>(layout.consistency_space(1).total_dim());
  for (std::size_t j = 1; j <= r; ++j) {
    slack[j] = p.blocks.size();
    p.blocks.push_back({detail::index_name("S", j), layout.strategy_space(j)});
    p.objective.push_back(HermitianOperator::zero(layout.strategy_space(j)));
  }

  for (std::size_t j = 1; j <= r; ++j) {
    SpaceList strat = layout.strategy_space(j);
    const std::size_t d = strat.total_dim();
    ConstraintGroup grp{detail::index_name("X", j), strat, p.constraints.size(), d * d};
    for (std::size_t a = 0; a < d * d; ++a) {
      HermitianOperator e = basis_operator(strat, a);
      Constraint c;
      c.terms.push_back({pos[j], align(partial_trace(e, layout.round(j).outputs.labels()), layout.consistency_space(j))});
      if (j < r) c.terms.push_back({pos[j + 1], -1.0 * embed(e, layout.consistency_space(j + 1))});
      c.terms.push_back({slack[j], -1.0 * e});
      // the shifts cancel between consecutive rounds; only the last one reaches the rhs
      c.rhs = j == r ? inner(e, objective) + shift[r] * e.trace() : 0.0;
      p.constraints.push_back(std::move(c));
    }
    p.groups.push_back(std::move(grp));
  }
  return p;
}

inline SdpProblem compile_dual(const OutcomeOperators& g, const HermitianOperator& objective) {
  return compile_dual(g.layout(), objective);
}

/// Evaluates both objectives on a claimed primal/dual pair after checking feasibility.
/// Returns (primal objective, dual objective); for a maximization the first never
/// exceeds the second by more than 1e-7.
inline std::pair<double, double> check_weak_duality(const SdpProblem& p, const std::vector<HermitianOperator>& x,
                                                    const std::vector<double>& y, double tol = 1e-8) {
  p.validate();
  if (x.size() != p.blocks.size()) throw InputError("primal point has the wrong number of blocks");
  if (y.size() != p.constraints.size()) throw InputError("dual point has the wrong number of multipliers");
  for (std::size_t b = 0; b < x.size(); ++b) {
    double lo = min_eigenvalue(x[b]);
    if (lo < -tol)
      throw DomainError("primal block '" + p.blocks[b].name + "' is not PSD (min eigenvalue " + std::to_string(lo) + ")");
  }
  auto ax = apply_constraints(p, x);
  for (std::size_t i = 0; i < ax.size(); ++i) {
    double res = std::abs(ax[i] - p.constraints[i].rhs);
    if (res > tol * std::max(1.0, std::abs(p.constraints[i].rhs)))
      throw DomainError("primal point violates constraint " + std::to_string(i) + " (residual " + std::to_string(res) + ")");
  }
  auto aty = adjoint_constraints(p, y);
  const double sign = p.sense == Sense::maximize ? 1.0 : -1.0;
  for (std::size_t b = 0; b < aty.size(); ++b) {
    HermitianOperator slack = sign * (aty[b] - p.objective[b]);
    double lo = min_eigenvalue(slack);
    if (lo < -tol)
      throw DomainError("dual point violates the cone constraint of block '" + p.blocks[b].name +
                        "' (min eigenvalue " + std::to_string(lo) + ")");
  }
  double pv = objective_value(p, x);
  double dv = 0;
  for (std::size_t i = 0; i < y.size(); ++i) dv += p.constraints[i].rhs * y[i];
  if (sign * (pv - dv) > 1e-7)
    throw NumericalError("weak duality violated: primal " + std::to_string(pv) + " vs dual " + std::to_string(dv));
  return {pv + p.offset, dv + p.offset};
}

/// Candidate dual solution (Y, Y_2..Y_r) of the strategy SDP.
struct DualWitness {
  std::size_t rounds = 1;
  HermitianOperator y;
  std::vector<HermitianOperator> y_blocks;  // Y_2 .. Y_r
  std::string construction = "explicit";
  std::size_t n = 1;
  std::optional<std::size_t> k;
  std::vector<double> values;
  std::map<std::string, std::string> provenance;

  const HermitianOperator& block(std::size_t j) const { return j == 1 ? y : y_blocks.at(j - 2); }
  HermitianOperator& block(std::size_t j) { return j == 1 ? y : y_blocks.at(j - 2); }
  double value() const { return y.trace(); }
};

struct FeasibilityReport {
  bool feasible = false;
  double value = 0;
  double tolerance = 0;
  /// Smallest eigenvalue of each dual constraint, in round order; the last one is
  /// Y_r (x) I - objective.
  std::vector<double> min_eigenvalues;
  std::vector<std::string> constraint_names;
};

/// Operator of the j-th dual constraint: Y_j (x) I_{Y_j} - Tr_{X_{j+1}} Y_{j+1}, or
/// Y_r (x) I_{Y_r} - objective.
inline HermitianOperator dual_constraint(const GameLayout& layout, const HermitianOperator& objective,
                                         const DualWitness& w, std::size_t j) {
  SpaceList strat = layout.strategy_space(j);
  HermitianOperator lhs = embed(w.block(j), strat);
  if (j == layout.rounds()) return lhs - align(objective, strat);
  return lhs - align(partial_trace(w.block(j + 1), layout.round(j + 1).inputs.labels()), strat);
}

inline void require_witness_shape(const GameLayout& layout, const DualWitness& w) {
  const std::size_t r = layout.rounds();
  if (w.rounds != r || w.y_blocks.size() + 1 != r)
    throw InputError("witness has " + std::to_string(w.y_blocks.size() + 1) + " blocks, game has " + std::to_string(r) +
                     " rounds");
  for (std::size_t j = 1; j <= r; ++j)
    if (!w.block(j).spaces().same_set(layout.consistency_space(j)))
      throw InputError("witness block " + std::to_string(j) + " lives on " + describe(w.block(j).spaces()) +
                       ", expected " + describe(layout.consistency_space(j)));
}

inline FeasibilityReport check_dual_feasibility(const GameLayout& layout, const HermitianOperator& objective,
                                                const DualWitness& w, double tol) {
  detail::require_objective(layout, objective);
  require_witness_shape(layout, w);
  FeasibilityReport rep;
  rep.tolerance = tol;
  rep.feasible = true;
  for (std::size_t j = 1; j <= layout.rounds(); ++j) {
    double lo = min_eigenvalue(dual_constraint(layout, objective, w, j));
    rep.min_eigenvalues.push_back(lo);
    rep.constraint_names.push_back(j == layout.rounds() ? "Y" + std::to_string(j) + "(x)I - objective"
                                                        : "Y" + std::to_string(j) + "(x)I - Tr Y" + std::to_string(j + 1));
    if (lo < -tol) rep.feasible = false;
  }
  rep.value = w.value();
  return rep;
}

inline FeasibilityReport check_dual_feasibility(const OutcomeOperators& g, const HermitianOperator& objective,
                                                const DualWitness& w, double tol) {
  return check_dual_feasibility(g.layout(), objective, w, tol);
}

/// Reads the dual variables Y_j off the multipliers of a compile_primal solve.
inline DualWitness extract_witness(const GameLayout& layout, const SdpProblem& p, const SolveReport& rep) {
  DualWitness w;
  w.rounds = layout.rounds();
  w.construction = "solver";
  for (std::size_t j = 1; j <= layout.rounds(); ++j) {
    const auto& grp = p.group(detail::index_name("Y", j));
    HermitianOperator yj = from_basis_coordinates(grp.space, rep.dual_multipliers, grp.first);
    if (j == 1)
      w.y = yj;
    else
      w.y_blocks.push_back(yj);
  }
  return w;
}

/// Shifts blocks by multiples of the identity, last round first, until every dual
/// constraint has min eigenvalue >= margin. Raising Y_j by d I lowers the
/// constraint below it by d dim(X_j) I, which the next step absorbs.
inline DualWitness repair_witness(const GameLayout& layout, const HermitianOperator& objective, DualWitness w,
                                  double margin = 0.0) {
  require_witness_shape(layout, w);
  for (std::size_t j = layout.rounds(); j >= 1; --j) {
    double lo = min_eigenvalue(dual_constraint(layout, objective, w, j));
    if (lo < margin) {
      double shift = margin - lo + 1e-14 * std::max(1.0, operator_norm(w.block(j)));
      w.block(j) += shift * HermitianOperator::identity(w.block(j).spaces());
    }
  }
  return w;
}

}  // namespace qhedge::sdp
