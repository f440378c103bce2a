#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qhedge/error.hpp"

namespace qhedge::error_reduction {

/// H(x) in bits, with H(0) = H(1) = 0.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw InputError("binary_entropy: argument " + std::to_string(x) + " outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

/// 2^(-H(x)/x).
inline double entropy_threshold(double x) {
  if (!(x > 0.0 && x <= 1.0)) throw InputError("entropy_threshold: argument " + std::to_string(x) + " outside (0,1]");
  return std::exp2(-binary_entropy(x) / x);
}

inline void require_ordering(double alpha, double beta) {
  if (!(beta >= 0.0 && beta < alpha && alpha <= 1.0))
    throw InputError("need 0 <= beta < alpha <= 1, got alpha=" + std::to_string(alpha) + " beta=" + std::to_string(beta));
}

/// beta < 2^(-H(alpha)/alpha) < alpha.
inline bool threshold_condition(double alpha, double beta) {
  require_ordering(alpha, beta);
  const double t = entropy_threshold(alpha);
  return beta < t && t < alpha;
}

/// Chernoff bound on rejecting when each round accepts with probability p and
/// at least c*n acceptances are required: exp(-p n (1 - c/p)^2 / 2).
inline double completeness_error_bound(double p, double c, std::int64_t n) {
  if (!(c > 0.0 && c < p && p <= 1.0)) throw InputError("completeness_error_bound: need 0 < c < p <= 1");
  if (n < 0) throw InputError("completeness_error_bound: n must be non-negative");
  const double lambda = 1.0 - c / p;
  return std::exp(-p * static_cast<double>(n) * lambda * lambda / 2.0);
}

inline double log_binomial(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

/// log2 of min(1, p^k C(n,k)); stays finite where the bound itself underflows.
inline double log2_soundness_error_bound(double p, std::int64_t n, std::int64_t k) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("soundness_error_bound: p outside [0,1]");
  if (n < 0 || k < 0 || k > n) throw InputError("soundness_error_bound: need 0 <= k <= n");
  if (k == 0) return 0.0;
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  const double ln = static_cast<double>(k) * std::log(p) + log_binomial(n, k);
  return std::min(0.0, ln / std::numbers::ln2);
}

inline double soundness_error_bound(double p, std::int64_t n, std::int64_t k) {
  return std::exp2(log2_soundness_error_bound(p, n, k));
}

/// Per-round exponent of the soundness bound at threshold fraction c, in bits:
/// log2(beta^{cn} C(n,cn)) / n -> c lg(beta) + H(c).
inline double soundness_coefficient(double beta, double c) {
  if (beta == 0.0) return -std::numeric_limits<double>::infinity();
  return c * std::log2(beta) + binary_entropy(c);
}

struct ThresholdFraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline constexpr std::int64_t kMaxDenominator = 64;
inline constexpr double kCoefficientMargin = 0.01;

/// Picks c = num/den (den <= 64, c < alpha) with soundness coefficient below
/// -0.01, maximizing the slower of the two per-round decay rates (in nats):
/// alpha (1 - c/alpha)^2 / 2 for completeness and -(c lg beta + H(c)) ln 2 for soundness.
inline ThresholdFraction choose_threshold_fraction(double alpha, double beta) {
  require_ordering(alpha, beta);
  ThresholdFraction best;
  double best_rate = -1;
  for (std::int64_t den = 1; den <= kMaxDenominator; ++den)
    for (std::int64_t num = 1; num < den; ++num) {
      const double c = static_cast<double>(num) / static_cast<double>(den);
      if (!(c < alpha)) continue;
      const double coef = soundness_coefficient(beta, c);
      if (!(coef < -kCoefficientMargin)) continue;
      const double lam = 1.0 - c / alpha;
      const double rate = std::min(alpha * lam * lam / 2.0, -coef * std::log(2.0));
      if (rate > best_rate + 1e-15) {
        best_rate = rate;
        best = {num, den};
      }
    }
  if (best_rate < 0)
    throw DomainError("no threshold fraction with denominator <= 64 makes the soundness coefficient negative");
  return best;
}

struct Plan {
  double alpha = 0;
  double beta = 0;
  double epsilon = 0;
  double threshold = 0;  // 2^(-H(alpha)/alpha)
  ThresholdFraction c;
  double coefficient = 0;  // c lg(beta) + H(c)
  std::int64_t n = 0;
  std::int64_t k = 0;
  double completeness_bound = 1;
  double soundness_bound = 1;
  bool satisfied = false;
};

inline std::int64_t threshold_k(const ThresholdFraction& c, std::int64_t n) { return (c.num * n) / c.den; }

inline bool plan_holds(double alpha, double beta, double epsilon, const ThresholdFraction& c, std::int64_t n) {
  return completeness_error_bound(alpha, c.value(), n) <= epsilon &&
         soundness_error_bound(beta, n, threshold_k(c, n)) <= epsilon;
}

/// Smallest repetition count found by doubling then bisection, re-verified
/// by direct evaluation of both bounds.
inline Plan plan_rounds(double alpha, double beta, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InputError("epsilon must lie in (0, 0.5), got " + std::to_string(epsilon));
  require_ordering(alpha, beta);
  Plan plan;
  plan.alpha = alpha;
  plan.beta = beta;
  plan.epsilon = epsilon;
  plan.threshold = entropy_threshold(alpha);
  if (!threshold_condition(alpha, beta))
    throw DomainError("threshold condition fails: need beta < 2^(-H(alpha)/alpha) < alpha, but 2^(-H(alpha)/alpha) = " +
                      std::to_string(plan.threshold) + " for alpha=" + std::to_string(alpha) +
                      ", beta=" + std::to_string(beta));
  plan.c = choose_threshold_fraction(alpha, beta);
  plan.coefficient = soundness_coefficient(beta, plan.c.value());

  constexpr std::int64_t kLimit = std::int64_t{1} << 40;
  std::int64_t hi = 1;
  while (!plan_holds(alpha, beta, epsilon, plan.c, hi)) {
    hi *= 2;
    if (hi > kLimit) throw NumericalError("plan_rounds: no repetition count below 2^40 reaches the target");
  }
  std::int64_t lo = hi / 2;  // fails (or 0)
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (plan_holds(alpha, beta, epsilon, plan.c, mid))
      hi = mid;
    else
      lo = mid;
  }
  std::int64_t n = hi;
  while (!plan_holds(alpha, beta, epsilon, plan.c, n)) ++n;

  plan.n = n;
  plan.k = threshold_k(plan.c, n);
  plan.completeness_bound = completeness_error_bound(alpha, plan.c.value(), n);
  plan.soundness_bound = soundness_error_bound(beta, n, plan.k);
  plan.satisfied = plan.completeness_bound <= epsilon && plan.soundness_bound <= epsilon;
  return plan;
}

/// Samples (x, 2^(-H(x)/x)) at x_min, x_min + step, ... up to x_max.
inline std::vector<std::pair<double, double>> entropy_curve(double x_min, double x_max, double step) {
  if (!(x_min > 0.0 && x_min <= x_max && x_max <= 1.0)) throw InputError("entropy_curve: need 0 < min <= max <= 1");
  if (!(step > 0.0)) throw InputError("entropy_curve: step must be positive");
  const auto count = static_cast<std::int64_t>(std::floor((x_max - x_min) / step + 1e-9)) + 1;
  if (count > 10'000'000) throw InputError("entropy_curve: too many samples");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    double x = std::min(x_max, x_min + static_cast<double>(i) * step);
    out.emplace_back(x, entropy_threshold(x));
  }
  return out;
}

}  // namespace qhedge::error_reduction
