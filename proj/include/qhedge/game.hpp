#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qhedge/channel.hpp"
#include "qhedge/operator.hpp"

namespace qhedge {

inline constexpr double kGameTolerance = 1e-9;

/// One round of an interaction: Bob receives `inputs` (X_j) and answers on
/// `outputs` (Y_j). After parallel repetition each side holds one label per copy.
struct Round {
  SpaceList inputs;
  SpaceList outputs;
};

/// The round structure shared by a game, its strategies and its SDPs.
class GameLayout {
 public:
  GameLayout() = default;
  explicit GameLayout(std::vector<Round> rounds) : rounds_(std::move(rounds)) {
    if (rounds_.empty()) throw InputError("a game needs at least one round");
    SpaceList all;
    for (const auto& r : rounds_) {
      if (r.inputs.empty() || r.outputs.empty()) throw InputError("every round needs input and output spaces");
      all = concat(all, concat(r.inputs, r.outputs));  // rejects duplicate labels
    }
  }

  std::size_t rounds() const { return rounds_.size(); }
  const Round& round(std::size_t j) const { return rounds_.at(j - 1); }
  const std::vector<Round>& all_rounds() const { return rounds_; }

  /// Y_1 ... Y_j (x) X_1 ... X_j, the space of the strategy block X_j (1-based).
  SpaceList strategy_space(std::size_t j) const {
    SpaceList ys, xs;
    for (std::size_t i = 1; i <= j; ++i) {
      ys = concat(ys, round(i).outputs);
      xs = concat(xs, round(i).inputs);
    }
    return concat(ys, xs);
  }

  /// Y_1 ... Y_{j-1} (x) X_1 ... X_j, the space of rho (j = 1), R_j and the dual block Y_j.
  SpaceList consistency_space(std::size_t j) const {
    SpaceList ys, xs;
    for (std::size_t i = 1; i <= j; ++i) {
      if (i < j) ys = concat(ys, round(i).outputs);
      xs = concat(xs, round(i).inputs);
    }
    return concat(ys, xs);
  }

  SpaceList full_space() const { return strategy_space(rounds()); }

  bool compatible(const GameLayout& o) const {
    if (o.rounds() != rounds()) return false;
    for (std::size_t j = 1; j <= rounds(); ++j)
      if (!round(j).inputs.same_set(o.round(j).inputs) || !round(j).outputs.same_set(o.round(j).outputs))
        return false;
    return true;
  }

  /// Layout of n parallel copies; copy m carries the label suffix "#m".
  GameLayout parallel(std::size_t n) const {
    std::vector<Round> out;
    for (const auto& r : rounds_) {
      Round p;
      for (std::size_t m = 0; m < n; ++m) {
        p.inputs = concat(p.inputs, r.inputs.suffixed(copy_suffix(m)));
        p.outputs = concat(p.outputs, r.outputs.suffixed(copy_suffix(m)));
      }
      out.push_back(std::move(p));
    }
    return GameLayout(std::move(out));
  }

  static std::string copy_suffix(std::size_t m) { return "#" + std::to_string(m); }

 private:
  std::vector<Round> rounds_;
};

namespace detail {

inline double max_abs_diff(const HermitianOperator& a, const HermitianOperator& b) {
  return (a.matrix() - align(b, a.spaces()).matrix()).cwiseAbs().maxCoeff();
}

inline void require_close(const HermitianOperator& a, const HermitianOperator& b, double tol, const std::string& what) {
  double d = max_abs_diff(a, b);
  if (d > tol) throw InputError(what + " (deviation " + std::to_string(d) + ")");
}

inline std::vector<std::string> labels_of(const SpaceList& s) { return s.labels(); }

/// Tensor product of per-copy factors, copy m relabeled with "#m", aligned to `target`.
inline HermitianOperator tensor_word(const std::vector<const HermitianOperator*>& factors, const SpaceList& target) {
  HermitianOperator acc = relabel(*factors.front(), GameLayout::copy_suffix(0));
  for (std::size_t m = 1; m < factors.size(); ++m) acc = kron(acc, relabel(*factors[m], GameLayout::copy_suffix(m)));
  return align(acc, target);
}

inline std::size_t checked_power(std::size_t base, std::size_t n) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < n; ++i) {
    out *= base;
    if (out > kMaxDimension) throw InputError("parallel repetition exceeds the dimension cap of " + std::to_string(kMaxDimension));
  }
  return out;
}

}  // namespace detail

/// Outcome operators P_0..P_{t-1} with the consistency data rho and R_2..R_r.
///
/// Validated on construction: every P_i is PSD and the telescoped chain
/// Tr_{X_2} R_2 = I_{Y_1} (x) rho, Tr_{X_j} R_j = I_{Y_{j-1}} (x) R_{j-1},
/// sum_i P_i = I_{Y_r} (x) R_r (or I_{Y_1} (x) rho when r = 1) holds within 1e-9.
class OutcomeOperators {
 public:
  OutcomeOperators(GameLayout layout, std::vector<HermitianOperator> ops, HermitianOperator rho,
                   std::vector<HermitianOperator> r_ops = {})
      : layout_(std::move(layout)) {
    const std::size_t r = layout_.rounds();
    if (ops.empty()) throw InputError("a game needs at least one outcome");
    if (r_ops.size() + 1 != r)
      throw InputError("a " + std::to_string(r) + "-round game needs " + std::to_string(r - 1) + " R operators");
    SpaceList full = layout_.full_space();
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (!ops[i].spaces().same_set(full))
        throw InputError("outcome operator " + std::to_string(i) + " lives on " + describe(ops[i].spaces()) +
                         ", expected " + describe(full));
      ops_.push_back(align(ops[i], full));
      double lo = min_eigenvalue(ops_.back());
      if (lo < -kGameTolerance)
        throw InputError("outcome operator " + std::to_string(i) + " is not PSD (min eigenvalue " + std::to_string(lo) + ")");
    }
    if (!rho.spaces().same_set(layout_.consistency_space(1)))
      throw InputError("rho must live on the first-round input space " + describe(layout_.consistency_space(1)));
    consistency_.push_back(align(DensityOperator(rho, kGameTolerance).op(), layout_.consistency_space(1)));
    for (std::size_t j = 2; j <= r; ++j) {
      const auto& rj = r_ops[j - 2];
      if (!rj.spaces().same_set(layout_.consistency_space(j)))
        throw InputError("R_" + std::to_string(j) + " must live on " + describe(layout_.consistency_space(j)));
      if (min_eigenvalue(rj) < -kGameTolerance) throw InputError("R_" + std::to_string(j) + " is not PSD");
      consistency_.push_back(align(rj, layout_.consistency_space(j)));
    }

    for (std::size_t j = 2; j <= r; ++j) {
      HermitianOperator lhs = partial_trace(consistency_[j - 1], layout_.round(j).inputs.labels());
      HermitianOperator rhs = embed(consistency_[j - 2], lhs.spaces());
      detail::require_close(lhs, rhs, kGameTolerance,
                            "consistency chain fails at R_" + std::to_string(j));
    }
    HermitianOperator sum = HermitianOperator::zero(full);
    for (const auto& p : ops_) sum += p;
    detail::require_close(sum, embed(consistency_.back(), full), kGameTolerance,
                          "outcome operators do not sum to the identity tensored with the last consistency operator");
  }

  const GameLayout& layout() const { return layout_; }
  std::size_t rounds() const { return layout_.rounds(); }
  std::size_t outcome_count() const { return ops_.size(); }
  const std::vector<HermitianOperator>& ops() const { return ops_; }
  const HermitianOperator& op(std::size_t i) const { return ops_.at(i); }
  const HermitianOperator& rho() const { return consistency_.front(); }

  /// rho for j = 1, R_j for 2 <= j <= r.
  const HermitianOperator& consistency(std::size_t j) const { return consistency_.at(j - 1); }
  SpaceList full_space() const { return layout_.full_space(); }

 private:
  GameLayout layout_;
  std::vector<HermitianOperator> ops_;
  std::vector<HermitianOperator> consistency_;
};

/// A single-round interaction: Alice prepares sigma on X (x) Z, sends X, and
/// measures what comes back on Y (x) Z with {Q_k}. X, Y and Z are inferred from
/// labels: Z is shared by sigma and the measurement.
struct SingleRoundGameSpec {
  DensityOperator sigma;
  std::vector<HermitianOperator> measurement;
};

namespace detail {

struct SingleRoundSpaces {
  SpaceList x, y, z;
};

inline SingleRoundSpaces split_single_round(const SingleRoundGameSpec& g) {
  if (g.measurement.empty()) throw InputError("measurement has no operators");
  const SpaceList& s = g.sigma.spaces();
  const SpaceList& q = g.measurement.front().spaces();
  SingleRoundSpaces out;
  std::vector<Space> x, y, z;
  for (const auto& sp : s) {
    if (q.contains(sp.label)) {
      if (q.dim_of(sp.label) != sp.dim) throw InputError("memory space '" + sp.label + "' has mismatched dimensions");
      z.push_back(sp);
    } else {
      x.push_back(sp);
    }
  }
  for (const auto& sp : q)
    if (!s.contains(sp.label)) y.push_back(sp);
  if (x.empty()) throw InputError("sigma has no space sent to Bob");
  if (y.empty()) throw InputError("the measurement has no space answered by Bob");
  out.x = SpaceList(x);
  out.y = SpaceList(y);
  out.z = SpaceList(z);
  for (const auto& m : g.measurement)
    if (!m.spaces().same_set(q)) throw InputError("measurement operators act on different spaces");
  return out;
}

/// Transpose of the X factors of a matrix laid out as X (x) Z.
inline Matrix partial_transpose_first(const Matrix& m, std::size_t dx, std::size_t dz) {
  Matrix out(m.rows(), m.cols());
  const auto DX = static_cast<Eigen::Index>(dx);
  const auto DZ = static_cast<Eigen::Index>(dz);
  for (Eigen::Index x = 0; x < DX; ++x)
    for (Eigen::Index xp = 0; xp < DX; ++xp)
      for (Eigen::Index z = 0; z < DZ; ++z)
        for (Eigen::Index zp = 0; zp < DZ; ++zp) out(xp * DZ + z, x * DZ + zp) = m(x * DZ + z, xp * DZ + zp);
  return out;
}

}  // namespace detail

/// Outcome operators of a single-round game.
///
/// P_k = Tr_Z[(Q_k (x) I_X)(I_Y (x) sigma^{T_X})] on Y (x) X is the unique operator
/// with <P_k, J(Phi)> = Tr[Q_k (Phi (x) 1)(sigma)] for every channel Phi: X -> Y.
/// Consequently sum_k P_k = I_Y (x) rho with rho = Tr_Z(sigma)^T.
inline OutcomeOperators outcome_operators_single_round(const SingleRoundGameSpec& g) {
  auto sp = detail::split_single_round(g);
  const SpaceList& q_spaces = g.measurement.front().spaces();
  const auto dq = static_cast<Eigen::Index>(q_spaces.total_dim());

  HermitianOperator qsum = HermitianOperator::zero(q_spaces);
  for (std::size_t k = 0; k < g.measurement.size(); ++k) {
    double lo = min_eigenvalue(g.measurement[k]);
    if (lo < -kDensityTolerance) throw InputError("measurement operator " + std::to_string(k) + " is not PSD");
    qsum += g.measurement[k];
  }
  double dev = (qsum.matrix() - Matrix::Identity(dq, dq)).cwiseAbs().maxCoeff();
  if (dev > kDensityTolerance)
    throw InputError("measurement is incomplete: sum deviates from identity by " + std::to_string(dev));

  SpaceList xz = concat(sp.x, sp.z);
  Matrix sigma_tx = detail::partial_transpose_first(align(g.sigma.op(), xz).matrix(), sp.x.total_dim(), sp.z.total_dim());
  SpaceList yxz = concat(concat(sp.y, sp.x), sp.z);
  if (yxz.total_dim() > kMaxDimension) throw InputError("single-round game exceeds the dimension cap");
  // I_Y (x) sigma^{T_X} in Y,X,Z order.
  const auto dy = static_cast<Eigen::Index>(sp.y.total_dim());
  Matrix rhs = detail::kron_matrix(Matrix::Identity(dy, dy), sigma_tx);

  std::vector<HermitianOperator> ops;
  for (const auto& q : g.measurement) {
    Matrix lhs = embed(q, yxz).matrix();
    Matrix prod = lhs * rhs;
    ops.emplace_back(concat(sp.y, sp.x), detail::partial_trace_matrix(prod, yxz, sp.z.labels()));
  }

  HermitianOperator reduced = sp.z.empty() ? align(g.sigma.op(), sp.x) : partial_trace(g.sigma.op(), sp.z.labels());
  reduced = align(reduced, sp.x);
  HermitianOperator rho(sp.x, reduced.matrix().transpose());
  return OutcomeOperators(GameLayout({Round{sp.x, sp.y}}), std::move(ops), std::move(rho));
}

/// Merges outcomes into {0 = lose, 1 = win}; `winning` lists the winning indices.
inline OutcomeOperators group_outcomes(const OutcomeOperators& g, const std::set<std::size_t>& winning) {
  HermitianOperator win = HermitianOperator::zero(g.full_space());
  HermitianOperator lose = HermitianOperator::zero(g.full_space());
  for (auto w : winning)
    if (w >= g.outcome_count()) throw InputError("winning index " + std::to_string(w) + " out of range");
  for (std::size_t i = 0; i < g.outcome_count(); ++i) (winning.count(i) ? win : lose) += g.op(i);
  std::vector<HermitianOperator> rs;
  for (std::size_t j = 2; j <= g.rounds(); ++j) rs.push_back(g.consistency(j));
  return OutcomeOperators(g.layout(), {lose, win}, g.rho(), rs);
}

/// n parallel copies with Alice acting independently. Outcome tuples
/// (i_1..i_n) are indexed in mixed radix with the first copy most significant.
inline OutcomeOperators parallel_game(const OutcomeOperators& g, std::size_t n) {
  if (n == 0) throw InputError("parallel_game: n must be positive");
  detail::checked_power(g.full_space().total_dim(), n);
  GameLayout layout = g.layout().parallel(n);
  const std::size_t t = g.outcome_count();
  const std::size_t count = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(t), static_cast<double>(n))));
  SpaceList full = layout.full_space();

  std::vector<HermitianOperator> ops;
  ops.reserve(count);
  std::vector<const HermitianOperator*> word(n);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rest = idx;
    for (std::size_t m = n; m-- > 0;) {
      word[m] = &g.op(rest % t);
      rest /= t;
    }
    ops.push_back(detail::tensor_word(word, full));
  }
  auto power = [&](const HermitianOperator& a, const SpaceList& target) {
    std::vector<const HermitianOperator*> f(n, &a);
    return detail::tensor_word(f, target);
  };
  HermitianOperator rho = power(g.rho(), layout.consistency_space(1));
  std::vector<HermitianOperator> rs;
  for (std::size_t j = 2; j <= g.rounds(); ++j) rs.push_back(power(g.consistency(j), layout.consistency_space(j)));
  return OutcomeOperators(std::move(layout), std::move(ops), std::move(rho), std::move(rs));
}

/// Binary strings of length n, bit m = outcome of copy m.
using BitString = std::vector<int>;

inline std::vector<BitString> strings_with_at_least(std::size_t n, std::size_t k) {
  std::vector<BitString> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    BitString s(n);
    std::size_t ones = 0;
    for (std::size_t m = 0; m < n; ++m) {
      s[m] = static_cast<int>((mask >> (n - 1 - m)) & 1U);
      ones += static_cast<std::size_t>(s[m]);
    }
    if (ones >= k) out.push_back(std::move(s));
  }
  return out;
}

/// sum over strings of f(s_1) (x) ... (x) f(s_n), f(0) = zero_op, f(1) = one_op.
inline HermitianOperator word_sum(const HermitianOperator& zero_op, const HermitianOperator& one_op,
                                  const std::vector<BitString>& strings, const SpaceList& target) {
  HermitianOperator acc = HermitianOperator::zero(target);
  for (const auto& s : strings) {
    std::vector<const HermitianOperator*> f;
    for (int b : s) f.push_back(b ? &one_op : &zero_op);
    acc += detail::tensor_word(f, target);
  }
  return acc;
}

inline void require_two_outcomes(const OutcomeOperators& g) {
  if (g.outcome_count() != 2)
    throw InputError("threshold problems need exactly two outcomes (lose, win); this game has " +
                     std::to_string(g.outcome_count()));
}

/// sum over (i_1..i_n) with at least k wins of P_{i_1} (x) ... (x) P_{i_n}.
inline HermitianOperator threshold_objective(const OutcomeOperators& g, std::size_t n, std::size_t k) {
  require_two_outcomes(g);
  if (n == 0 || k > n) throw InputError("threshold_objective: need n >= 1 and 0 <= k <= n");
  detail::checked_power(g.full_space().total_dim(), n);
  return word_sum(g.op(0), g.op(1), strings_with_at_least(n, k), g.layout().parallel(n).full_space());
}

/// Objective over an arbitrary set of outcome strings (e.g. a monotone set).
inline HermitianOperator set_objective(const OutcomeOperators& g, std::size_t n, const std::vector<BitString>& strings) {
  require_two_outcomes(g);
  detail::checked_power(g.full_space().total_dim(), n);
  return word_sum(g.op(0), g.op(1), strings, g.layout().parallel(n).full_space());
}

/// sum_i v_i P_i on the game's own spaces.
inline HermitianOperator weighted_outcomes(const OutcomeOperators& g, const std::vector<double>& values) {
  if (values.size() != g.outcome_count())
    throw InputError("weighted_outcomes: " + std::to_string(values.size()) + " values for " +
                     std::to_string(g.outcome_count()) + " outcomes");
  HermitianOperator acc = HermitianOperator::zero(g.full_space());
  for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * g.op(i);
  return acc;
}

/// (1/n) sum over tuples of (v_{i_1} + ... + v_{i_n}) P_{i_1} (x) ... (x) P_{i_n}.
inline HermitianOperator value_objective(const OutcomeOperators& g, const std::vector<double>& values, std::size_t n) {
  if (values.size() != g.outcome_count())
    throw InputError("value_objective: " + std::to_string(values.size()) + " values for " +
                     std::to_string(g.outcome_count()) + " outcomes");
  if (n == 0) throw InputError("value_objective: n must be positive");
  detail::checked_power(g.full_space().total_dim(), n);
  SpaceList full = g.layout().parallel(n).full_space();
  const std::size_t t = g.outcome_count();
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) count *= t;
  HermitianOperator acc = HermitianOperator::zero(full);
  std::vector<const HermitianOperator*> word(n);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rest = idx;
    double v = 0;
    for (std::size_t m = n; m-- > 0;) {
      word[m] = &g.op(rest % t);
      v += values[rest % t];
      rest /= t;
    }
    if (v != 0.0) acc += (v / static_cast<double>(n)) * detail::tensor_word(word, full);
  }
  return acc;
}

/// Bob's strategy as Choi-type operators: X_1..X_{r-1} and X = X_r.
struct StrategyChoi {
  GameLayout layout;
  HermitianOperator x;
  std::vector<HermitianOperator> intermediates;

  /// X_j for 1 <= j <= r.
  const HermitianOperator& block(std::size_t j) const { return j == layout.rounds() ? x : intermediates.at(j - 1); }
};

/// Checks PSD blocks and Tr_{Y_1} X_1 = I, Tr_{Y_j} X_j = X_{j-1} (x) I_{X_j}.
inline void validate_strategy(const StrategyChoi& s, double tol = kGameTolerance) {
  const std::size_t r = s.layout.rounds();
  if (s.intermediates.size() + 1 != r) throw InputError("strategy has the wrong number of intermediate blocks");
  for (std::size_t j = 1; j <= r; ++j) {
    const auto& xj = s.block(j);
    if (!xj.spaces().same_set(s.layout.strategy_space(j)))
      throw InputError("strategy block " + std::to_string(j) + " lives on the wrong spaces");
    if (min_eigenvalue(xj) < -tol) throw InputError("strategy block " + std::to_string(j) + " is not PSD");
    HermitianOperator lhs = partial_trace(xj, s.layout.round(j).outputs.labels());
    HermitianOperator rhs = j == 1 ? HermitianOperator::identity(lhs.spaces()) : embed(s.block(j - 1), lhs.spaces());
    detail::require_close(lhs, rhs, tol, "strategy chain fails at block " + std::to_string(j));
  }
}

/// Single-round strategy of a channel X_1 -> Y_1: X = J(Phi).
inline StrategyChoi strategy_from_channel(const KrausChannel& ch) {
  StrategyChoi s{GameLayout({Round{ch.input_spaces(), ch.output_spaces()}}), choi(ch), {}};
  s.x = align(s.x, s.layout.full_space());
  validate_strategy(s, kTracePreservingTolerance);
  return s;
}

/// <P_i, X> for every outcome.
inline std::vector<double> outcome_probabilities(const OutcomeOperators& g, const StrategyChoi& s) {
  if (!g.layout().compatible(s.layout)) throw InputError("strategy and game have different spaces");
  validate_strategy(s);
  std::vector<double> out;
  for (const auto& p : g.ops()) out.push_back(inner(p, s.x));
  return out;
}

/// Classical restriction: every P_i, rho and R_j replaced by its diagonal.
inline OutcomeOperators dephase_game(const OutcomeOperators& g) {
  std::vector<HermitianOperator> ops;
  for (const auto& p : g.ops()) ops.push_back(dephase(p));
  std::vector<HermitianOperator> rs;
  for (std::size_t j = 2; j <= g.rounds(); ++j) rs.push_back(dephase(g.consistency(j)));
  return OutcomeOperators(g.layout(), std::move(ops), dephase(g.rho()), std::move(rs));
}

inline bool is_diagonal_game(const OutcomeOperators& g, double tol = 1e-12) {
  for (const auto& p : g.ops())
    if (!is_diagonal(p, tol)) return false;
  for (std::size_t j = 1; j <= g.rounds(); ++j)
    if (!is_diagonal(g.consistency(j), tol)) return false;
  return true;
}

}  // namespace qhedge
