#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qhedge/operator.hpp"

namespace qhedge::sdp {

enum class Sense { maximize, minimize };

struct Block {
  std::string name;
  SpaceList spaces;
};

struct Term {
  std::size_t block = 0;
  HermitianOperator coefficient;
};

/// sum over terms of <F_b, X_b> = rhs.
struct Constraint {
  std::vector<Term> terms;
  double rhs = 0;
};

/// A contiguous run of constraints that scalarizes one operator equality
/// against an orthonormal Hermitian basis of `space`. Multipliers of the run
/// reassemble into the operator sum_a y_a E_a.
struct ConstraintGroup {
  std::string name;
  SpaceList space;
  std::size_t first = 0;
  std::size_t count = 0;
};

/// Warm start; the dual slack is recomputed from y.
struct InitialPoint {
  std::vector<Matrix> x;
  std::vector<double> y;
};

/// Standard form: optimize sum_b <C_b, X_b> subject to the scalar equalities
/// and X_b >= 0 for every block. Dual (maximize case): minimize b^T y subject
/// to sum_i y_i F_i - C >= 0.
struct SdpProblem {
  Sense sense = Sense::maximize;
  std::vector<Block> blocks;
  std::vector<HermitianOperator> objective;
  double offset = 0;  // constant added to both reported objective values
  std::vector<Constraint> constraints;
  std::vector<ConstraintGroup> groups;
  std::optional<InitialPoint> start;

  std::size_t block_index(const std::string& name) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (blocks[b].name == name) return b;
    throw InputError("no block named '" + name + "'");
  }

  const ConstraintGroup& group(const std::string& name) const {
    for (const auto& g : groups)
      if (g.name == name) return g;
    throw InputError("no constraint group named '" + name + "'");
  }

  void validate() const {
    if (blocks.empty()) throw InputError("SDP has no variable blocks");
    if (objective.size() != blocks.size()) throw InputError("SDP needs one objective operator per block");
    if (!std::isfinite(offset)) throw InputError("SDP objective offset is not finite");
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (!objective[b].spaces().same_set(blocks[b].spaces))
        throw InputError("objective for block '" + blocks[b].name + "' is on the wrong spaces");
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& c = constraints[i];
      if (!std::isfinite(c.rhs)) throw InputError("constraint " + std::to_string(i) + " has a non-finite rhs");
      for (const auto& t : c.terms) {
        if (t.block >= blocks.size()) throw InputError("constraint " + std::to_string(i) + " refers to a missing block");
        if (!t.coefficient.spaces().same_set(blocks[t.block].spaces))
          throw InputError("constraint " + std::to_string(i) + " has a coefficient on the wrong spaces");
      }
    }
    std::size_t next = 0;
    for (const auto& g : groups) {
      if (g.first != next) throw InputError("constraint groups must tile the constraint list");
      if (g.count != g.space.total_dim() * g.space.total_dim())
        throw InputError("constraint group '" + g.name + "' does not match its basis size");
      next += g.count;
    }
    if (!groups.empty() && next != constraints.size()) throw InputError("constraint groups must tile the constraint list");
  }
};

/// Orthonormal basis of the Hermitian operators on a d-dimensional space,
/// a = i*d + j: E_ii; (E_ij + E_ji)/sqrt 2 for i < j; i(E_ji - E_ij)/sqrt 2 for i > j.
inline Matrix hermitian_basis_element(std::size_t d, std::size_t a) {
  const auto D = static_cast<Eigen::Index>(d);
  const auto i = static_cast<Eigen::Index>(a / d);
  const auto j = static_cast<Eigen::Index>(a % d);
  Matrix e = Matrix::Zero(D, D);
  const double s = 1.0 / std::sqrt(2.0);
  if (i == j) {
    e(i, i) = 1.0;
  } else if (i < j) {
    e(i, j) = s;
    e(j, i) = s;
  } else {
    e(j, i) = Complex(0, s);
    e(i, j) = Complex(0, -s);
  }
  return e;
}

inline HermitianOperator basis_operator(const SpaceList& spaces, std::size_t a) {
  return HermitianOperator::trusted(spaces, hermitian_basis_element(spaces.total_dim(), a));
}

/// Coordinates of `h` in the basis above.
inline std::vector<double> basis_coordinates(const HermitianOperator& h) {
  const std::size_t d = h.dim();
  const Matrix& m = h.matrix();
  std::vector<double> out(d * d);
  const double r2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      auto I = static_cast<Eigen::Index>(i);
      auto J = static_cast<Eigen::Index>(j);
      if (i == j)
        out[i * d + j] = m(I, I).real();
      else if (i < j)
        out[i * d + j] = r2 * m(I, J).real();
      else
        out[i * d + j] = r2 * m(J, I).imag();
    }
  return out;
}

/// sum_a y[first + a] E_a on `spaces`.
inline HermitianOperator from_basis_coordinates(const SpaceList& spaces, const std::vector<double>& y, std::size_t first) {
  const std::size_t d = spaces.total_dim();
  if (first + d * d > y.size()) throw InputError("not enough multipliers to rebuild the operator");
  const auto D = static_cast<Eigen::Index>(d);
  Matrix m = Matrix::Zero(D, D);
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double v = y[first + i * d + j];
      auto I = static_cast<Eigen::Index>(i);
      auto J = static_cast<Eigen::Index>(j);
      if (i == j) {
        m(I, I) += v;
      } else if (i < j) {
        m(I, J) += v * s;
        m(J, I) += v * s;
      } else {
        m(J, I) += Complex(0, v * s);
        m(I, J) += Complex(0, -v * s);
      }
    }
  return HermitianOperator::trusted(spaces, std::move(m));
}

/// Objective value sum_b <C_b, X_b>.
inline double objective_value(const SdpProblem& p, const std::vector<HermitianOperator>& x) {
  double v = 0;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) v += inner(p.objective[b], x.at(b));
  return v;
}

/// A(X)_i = sum_b <F_ib, X_b>.
inline std::vector<double> apply_constraints(const SdpProblem& p, const std::vector<HermitianOperator>& x) {
  std::vector<double> out(p.constraints.size(), 0.0);
  for (std::size_t i = 0; i < p.constraints.size(); ++i)
    for (const auto& t : p.constraints[i].terms) out[i] += inner(t.coefficient, x.at(t.block));
  return out;
}

/// A*(y)_b = sum_i y_i F_ib.
inline std::vector<HermitianOperator> adjoint_constraints(const SdpProblem& p, const std::vector<double>& y) {
  if (y.size() != p.constraints.size()) throw InputError("multiplier count does not match constraint count");
  std::vector<HermitianOperator> out;
  for (const auto& b : p.blocks) out.push_back(HermitianOperator::zero(b.spaces));
  for (std::size_t i = 0; i < p.constraints.size(); ++i)
    for (const auto& t : p.constraints[i].terms) out[t.block] += y[i] * t.coefficient;
  return out;
}

}  // namespace qhedge::sdp
