#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qhedge/game.hpp"
#include "qhedge/sdp/compile.hpp"

namespace qhedge {

using sdp::DualWitness;

inline constexpr double kWitnessTolerance = 1e-9;

namespace detail {

inline void require_feasible_input(const OutcomeOperators& g, const HermitianOperator& objective, const DualWitness& w,
                                   double tol, const std::string& who) {
  auto rep = sdp::check_dual_feasibility(g, objective, w, tol);
  if (!rep.feasible) {
    double worst = *std::min_element(rep.min_eigenvalues.begin(), rep.min_eigenvalues.end());
    throw DomainError(who + ": input witness is infeasible (min eigenvalue " + std::to_string(worst) + ")");
  }
}

/// Block j of the n-fold witness built as sum over strings of f_j(s_1) (x) ... (x) f_j(s_n).
inline HermitianOperator parallel_block(const GameLayout& nfold, std::size_t j, const HermitianOperator& f0,
                                        const HermitianOperator& f1, const std::vector<BitString>& strings) {
  return word_sum(f0, f1, strings, nfold.consistency_space(j));
}

inline DualWitness string_witness(const OutcomeOperators& g, const std::vector<HermitianOperator>& zero_ops,
                                  const std::vector<HermitianOperator>& one_ops, std::size_t n,
                                  const std::vector<BitString>& strings) {
  GameLayout nfold = g.layout().parallel(n);
  DualWitness out;
  out.rounds = g.rounds();
  out.n = n;
  for (std::size_t j = 1; j <= g.rounds(); ++j) {
    HermitianOperator b = parallel_block(nfold, j, zero_ops[j - 1], one_ops[j - 1], strings);
    if (j == 1)
      out.y = b;
    else
      out.y_blocks.push_back(b);
  }
  return out;
}

inline std::vector<HermitianOperator> witness_blocks(const DualWitness& w) {
  std::vector<HermitianOperator> out{w.y};
  out.insert(out.end(), w.y_blocks.begin(), w.y_blocks.end());
  return out;
}

inline std::vector<HermitianOperator> consistency_blocks(const OutcomeOperators& g) {
  std::vector<HermitianOperator> out;
  for (std::size_t j = 1; j <= g.rounds(); ++j) out.push_back(g.consistency(j));
  return out;
}

inline std::vector<BitString> strings_with_exactly(std::size_t n, std::size_t k) {
  std::vector<BitString> out;
  for (auto& s : strings_with_at_least(n, k))
    if (static_cast<std::size_t>(std::count(s.begin(), s.end(), 1)) == k) out.push_back(std::move(s));
  return out;
}

}  // namespace detail

/// (1/n) sum_m R_j (x) ... (x) Y_j (x) ... (x) R_j, with Y_j in slot m and R_1 = rho.
/// Feasible for the n-fold average-value problem whenever w is feasible for the
/// single-round one, and keeps the value Tr(Y).
inline DualWitness witness_average(const DualWitness& w, const OutcomeOperators& g, const std::vector<double>& values,
                                   std::size_t n, double tol = kWitnessTolerance) {
  if (n == 0) throw InputError("witness_average: n must be positive");
  detail::require_feasible_input(g, weighted_outcomes(g, values), w, tol, "witness_average");
  GameLayout nfold = g.layout().parallel(n);
  auto ys = detail::witness_blocks(w);
  auto rs = detail::consistency_blocks(g);
  DualWitness out;
  out.rounds = g.rounds();
  out.n = n;
  out.values = values;
  out.construction = "average";
  for (std::size_t j = 1; j <= g.rounds(); ++j) {
    SpaceList target = nfold.consistency_space(j);
    HermitianOperator acc = HermitianOperator::zero(target);
    for (std::size_t m = 0; m < n; ++m) {
      std::vector<const HermitianOperator*> f(n, &rs[j - 1]);
      f[m] = &ys[j - 1];
      acc += detail::tensor_word(f, target);
    }
    acc *= 1.0 / static_cast<double>(n);
    if (j == 1)
      out.y = acc;
    else
      out.y_blocks.push_back(acc);
  }
  return out;
}

/// Y^(x)n, {Y_j^(x)n}: feasible for the threshold problem at k = n with value Tr(Y)^n.
inline DualWitness witness_tensor_power(const DualWitness& w, const OutcomeOperators& g, std::size_t n,
                                        double tol = kWitnessTolerance) {
  require_two_outcomes(g);
  if (n == 0) throw InputError("witness_tensor_power: n must be positive");
  detail::require_feasible_input(g, g.op(1), w, tol, "witness_tensor_power");
  auto ys = detail::witness_blocks(w);
  DualWitness out = detail::string_witness(g, ys, ys, n, {BitString(n, 1)});
  out.k = n;
  out.construction = "tensor-power";
  return out;
}

/// sum over strings with at least k ones of f(s_1) (x) ... (x) f(s_n), f(0) = R_j, f(1) = Y_j.
/// Value sum_{t >= k} C(n,t) Tr(Y)^t.
inline DualWitness witness_naive(const DualWitness& w, const OutcomeOperators& g, std::size_t n, std::size_t k,
                                 double tol = kWitnessTolerance) {
  require_two_outcomes(g);
  if (n == 0 || k > n) throw InputError("witness_naive: need n >= 1 and k <= n");
  detail::require_feasible_input(g, g.op(1), w, tol, "witness_naive");
  DualWitness out = detail::string_witness(g, detail::consistency_blocks(g), detail::witness_blocks(w), n,
                                           strings_with_at_least(n, k));
  out.k = k;
  out.construction = "naive";
  return out;
}

/// Index strings of the recursive witness: T(n,0) = {0^n}, T(n,n) = {1^n}, and
/// otherwise {0} x T(n-1,k) together with {1} x (strings of length n-1 with exactly k-1 ones).
inline std::vector<BitString> snk_strings(std::size_t n, std::size_t k) {
  if (k > n) throw InputError("snk_strings: k exceeds n");
  if (k == 0) return {BitString(n, 0)};
  if (k == n) return {BitString(n, 1)};
  std::vector<BitString> out;
  for (const auto& s : snk_strings(n - 1, k)) {
    BitString t{0};
    t.insert(t.end(), s.begin(), s.end());
    out.push_back(std::move(t));
  }
  for (const auto& s : detail::strings_with_exactly(n - 1, k - 1)) {
    BitString t{1};
    t.insert(t.end(), s.begin(), s.end());
    out.push_back(std::move(t));
  }
  return out;
}

/// The recursive witness S^{n,k}: value Tr(Y)^k C(n,k).
inline DualWitness witness_recursive_snk(const DualWitness& w, const OutcomeOperators& g, std::size_t n, std::size_t k,
                                         double tol = kWitnessTolerance) {
  require_two_outcomes(g);
  if (n == 0 || k > n) throw InputError("witness_recursive_snk: need n >= 1 and k <= n");
  detail::require_feasible_input(g, g.op(1), w, tol, "witness_recursive_snk");
  DualWitness out = detail::string_witness(g, detail::consistency_blocks(g), detail::witness_blocks(w), n,
                                           snk_strings(n, k));
  out.k = k;
  out.construction = "snk";
  return out;
}

namespace detail {

inline bool commute(const HermitianOperator& a, const HermitianOperator& b, double tol) {
  HermitianOperator bb = align(b, a.spaces());
  return (a.matrix() * bb.matrix() - bb.matrix() * a.matrix()).cwiseAbs().maxCoeff() <= tol;
}

/// Unitary diagonalizing two commuting Hermitian operators at once.
inline Matrix joint_eigenbasis(const HermitianOperator& a, const HermitianOperator& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> ea(a.matrix());
  if (ea.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  Matrix u = ea.eigenvectors();
  Matrix bt = u.adjoint() * b.matrix() * u;
  const auto& ev = ea.eigenvalues();
  Eigen::Index start = 0;
  while (start < ev.size()) {
    Eigen::Index end = start + 1;
    while (end < ev.size() && std::abs(ev(end) - ev(start)) < 1e-9) ++end;
    const Eigen::Index len = end - start;
    if (len > 1) {
      Matrix sub = bt.block(start, start, len, len);
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sub + sub.adjoint()));
      if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
      u.middleCols(start, len) = (u.middleCols(start, len) * es.eigenvectors()).eval();
    }
    start = end;
  }
  return u;
}

/// Eigenvalue-wise min(y, r) in a basis diagonalizing both.
inline HermitianOperator clamp_below(const HermitianOperator& y, const HermitianOperator& r) {
  HermitianOperator ra = align(r, y.spaces());
  Matrix u = joint_eigenbasis(ra, y);
  Matrix dy = u.adjoint() * y.matrix() * u;
  Matrix dr = u.adjoint() * ra.matrix() * u;
  const Eigen::Index d = dy.rows();
  Matrix m = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = std::min(dy(i, i).real(), dr(i, i).real());
  return HermitianOperator(y.spaces(), u * m * u.adjoint());
}

inline HermitianOperator clamp_diagonal(const HermitianOperator& y, const HermitianOperator& r) {
  HermitianOperator ra = align(r, y.spaces());
  std::vector<double> d(y.dim());
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto I = static_cast<Eigen::Index>(i);
    d[i] = std::min(y.matrix()(I, I).real(), ra.matrix()(I, I).real());
  }
  return HermitianOperator::diagonal(y.spaces(), d);
}

}  // namespace detail

/// Why the classical clamp cannot be applied, or an empty string when it can.
/// Diagonal games are always accepted. Otherwise only single-round games are
/// considered, and Y, rho and every I (x) Y, I (x) rho, P_i must commute.
inline std::string classical_clamp_refusal(const DualWitness& w, const OutcomeOperators& g, double tol = 1e-10) {
  if (is_diagonal_game(g, 1e-12)) return {};
  if (g.rounds() != 1) return "game is not diagonal and has more than one round";
  if (!detail::commute(w.y, g.rho(), tol)) return "game is not diagonal and Y does not commute with rho";
  SpaceList full = g.full_space();
  HermitianOperator iy = embed(w.y, full);
  HermitianOperator ir = embed(g.rho(), full);
  for (std::size_t i = 0; i < g.outcome_count(); ++i)
    if (!detail::commute(g.op(i), iy, tol) || !detail::commute(g.op(i), ir, tol))
      return "game is not diagonal and outcome operator " + std::to_string(i) + " does not commute with I(x)Y and I(x)rho";
  return {};
}

/// The classical binomial witness: dephase Y (diagonal games), clamp Y' = min(Y, rho)
/// and Y'_j = min(Y_j, R_j), then sum f(0) = R_j - Y'_j, f(1) = Y'_j over strings with
/// at least k ones. Value sum_{t >= k} C(n,t) q^t (1-q)^{n-t} with q = Tr(Y').
inline DualWitness witness_classical_binomial(const DualWitness& w, const OutcomeOperators& g, std::size_t n,
                                              std::size_t k, double tol = kWitnessTolerance) {
  require_two_outcomes(g);
  if (n == 0 || k > n) throw InputError("witness_classical_binomial: need n >= 1 and k <= n");
  std::string refusal = classical_clamp_refusal(w, g);
  if (!refusal.empty()) throw DomainError("classical binomial witness refused: " + refusal);
  detail::require_feasible_input(g, g.op(1), w, tol, "witness_classical_binomial");

  const bool diagonal = is_diagonal_game(g, 1e-12);
  std::vector<HermitianOperator> ones, zeros;
  for (std::size_t j = 1; j <= g.rounds(); ++j) {
    const HermitianOperator& rj = g.consistency(j);
    HermitianOperator clamped = diagonal ? detail::clamp_diagonal(dephase(w.block(j)), rj) : detail::clamp_below(w.block(j), rj);
    zeros.push_back(align(rj, clamped.spaces()) - clamped);
    ones.push_back(std::move(clamped));
  }
  DualWitness out = detail::string_witness(g, zeros, ones, n, strings_with_at_least(n, k));
  out.k = k;
  out.construction = "classical-binomial";
  std::ostringstream q;
  q.precision(std::numeric_limits<double>::max_digits10);  // round-trips through stod
  q << ones.front().trace();
  out.provenance["clamped_value"] = q.str();
  return out;
}

inline double binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  return std::exp(std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
                  std::lgamma(static_cast<double>(n - k) + 1));
}

/// sum_{t >= k} C(n,t) p^t (1-p)^{n-t}.
inline double binomial_tail(double p, std::size_t n, std::size_t k) {
  double s = 0;
  for (std::size_t t = k; t <= n; ++t)
    s += binomial_coefficient(n, t) * std::pow(p, static_cast<double>(t)) * std::pow(1 - p, static_cast<double>(n - t));
  return s;
}

/// sum_{t >= k} C(n,t) p^t.
inline double naive_bound(double p, std::size_t n, std::size_t k) {
  double s = 0;
  for (std::size_t t = k; t <= n; ++t) s += binomial_coefficient(n, t) * std::pow(p, static_cast<double>(t));
  return s;
}

/// p^k C(n,k).
inline double snk_bound(double p, std::size_t n, std::size_t k) {
  return std::pow(p, static_cast<double>(k)) * binomial_coefficient(n, k);
}

struct MonotoneCheck {
  bool holds = false;
  double min_eigenvalue = 0;
};

/// True when flipping any 0 to 1 stays inside the set.
inline bool is_monotone(const std::vector<BitString>& strings) {
  std::set<BitString> s(strings.begin(), strings.end());
  for (const auto& b : s)
    for (std::size_t m = 0; m < b.size(); ++m)
      if (b[m] == 0) {
        BitString up = b;
        up[m] = 1;
        if (!s.count(up)) return false;
      }
  return true;
}

/// Compares sum_S B_{s_1} (x) ... (x) B_{s_n} against the same sum over A, with
/// B_0 = A_0 - R and B_1 = A_1 + R, over a monotone set S of strings.
inline MonotoneCheck verify_monotone_inequality(const HermitianOperator& a0, const HermitianOperator& a1,
                                                const HermitianOperator& r, std::size_t n,
                                                const std::vector<BitString>& strings) {
  if (n == 0) throw InputError("verify_monotone_inequality: n must be positive");
  detail::require_same_set(a0.spaces(), a1.spaces(), "verify_monotone_inequality");
  detail::require_same_set(a0.spaces(), r.spaces(), "verify_monotone_inequality");
  for (const auto& s : strings)
    if (s.size() != n) throw InputError("verify_monotone_inequality: string length differs from n");
  if (!is_monotone(strings)) throw InputError("verify_monotone_inequality: index set is not monotone");
  HermitianOperator b0 = a0 - r;
  HermitianOperator b1 = a1 + r;
  const std::pair<const char*, const HermitianOperator*> named[] = {
      {"A0", &a0}, {"A1", &a1}, {"R", &r}, {"A1+R", &b1}, {"A0-R", &b0}};
  for (const auto& [name, op] : named) {
    double lo = min_eigenvalue(*op);
    if (lo < -kDensityTolerance)
      throw DomainError(std::string("verify_monotone_inequality: ") + name + " is not PSD (min eigenvalue " +
                        std::to_string(lo) + ")");
  }
  std::vector<Space> sp;
  for (std::size_t m = 0; m < n; ++m)
    for (const auto& s : a0.spaces().suffixed(GameLayout::copy_suffix(m))) sp.push_back(s);
  SpaceList target(std::move(sp));
  if (target.total_dim() > kMaxDimension) throw InputError("verify_monotone_inequality: dimension cap exceeded");
  HermitianOperator diff = word_sum(b0, b1, strings, target) - word_sum(a0, a1, strings, target);
  MonotoneCheck out;
  out.min_eigenvalue = strings.empty() ? 0.0 : min_eigenvalue(diff);
  out.holds = out.min_eigenvalue >= -1e-9;
  return out;
}

inline MonotoneCheck verify_monotone_inequality(const HermitianOperator& a0, const HermitianOperator& a1,
                                                const HermitianOperator& r, std::size_t n, std::size_t k) {
  if (k > n) throw InputError("verify_monotone_inequality: k exceeds n");
  return verify_monotone_inequality(a0, a1, r, n, strings_with_at_least(n, k));
}

/// Best winning probability over deterministic answers of a diagonal single-round
/// game: each input x is answered with the y maximizing <y,x|P_1|y,x>.
inline double classical_optimum(const OutcomeOperators& g) {
  require_two_outcomes(g);
  if (g.rounds() != 1) throw InputError("classical_optimum: single-round games only");
  if (!is_diagonal_game(g, 1e-12)) throw DomainError("classical_optimum: game is not diagonal");
  const Round& rd = g.layout().round(1);
  const std::size_t dy = rd.outputs.total_dim();
  const std::size_t dx = rd.inputs.total_dim();
  // Full space is Y then X.
  const Matrix p1 = align(g.op(1), concat(rd.outputs, rd.inputs)).matrix();
  double total = 0;
  for (std::size_t x = 0; x < dx; ++x) {
    double best = 0;
    for (std::size_t y = 0; y < dy; ++y) {
      auto idx = static_cast<Eigen::Index>(y * dx + x);
      best = std::max(best, p1(idx, idx).real());
    }
    total += best;
  }
  return total;
}

}  // namespace qhedge
