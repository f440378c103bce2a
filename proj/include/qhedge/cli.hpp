#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qhedge/certificates.hpp"
#include "qhedge/error_reduction.hpp"
#include "qhedge/hedging.hpp"
#include "qhedge/io.hpp"
#include "qhedge/sdp/compile.hpp"

#ifndef QHEDGE_VERSION
#define QHEDGE_VERSION "0.0.0"
#endif

namespace qhedge::cli {

using io::json;

enum ExitCode : int { kOk = 0, kInputError = 1, kDomainNegative = 2, kNumerical = 3 };

struct GlobalOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

struct InputDigest {
  std::string path;
  std::string sha256;
};

struct RunReport {
  std::string command;
  std::vector<InputDigest> inputs;
  json results = json::object();
  std::map<std::string, double> timings_ms;
  std::string toolkit_version = QHEDGE_VERSION;
  int exit_code = kOk;
  std::string summary;  // one human-readable line per notable result
};

inline json to_json(const RunReport& r) {
  json inputs = json::array();
  for (const auto& i : r.inputs) inputs.push_back({{"path", i.path}, {"sha256", i.sha256}});
  return json{{"command", r.command},
              {"toolkit_version", r.toolkit_version},
              {"inputs", inputs},
              {"results", r.results},
              {"timings_ms", r.timings_ms},
              {"exit_code", r.exit_code}};
}

/// Wall-clock phases for RunReport::timings_ms.
class PhaseTimer {
 public:
  explicit PhaseTimer(RunReport& r) : report_(r) {}
  template <class F>
  auto run(const std::string& phase, F f) -> decltype(f()) {
    auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      RunReport& r;
      std::string phase;
      std::chrono::steady_clock::time_point t0;
      ~Stop() {
        r.timings_ms[phase] +=
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
    } stop{report_, phase, t0};
    return f();
  }

 private:
  RunReport& report_;
};

/// Computes a hex digest of a file; supplied by the executable so the library
/// itself has no crypto dependency.
using DigestFn = std::string (*)(const std::string& path);

// ---- objectives

struct ObjectiveSpec {
  enum class Kind { win, value, threshold } kind = Kind::win;
  std::vector<double> values;
  std::size_t n = 1;
  std::size_t k = 1;

  std::string describe() const {
    std::ostringstream s;
    switch (kind) {
      case Kind::win: s << "win"; break;
      case Kind::value:
        s << "value:";
        for (std::size_t i = 0; i < values.size(); ++i) s << (i ? "," : "") << values[i];
        s << " (n=" << n << ")";
        break;
      case Kind::threshold: s << "threshold:" << n << "," << k; break;
    }
    return s.str();
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(what + ": '" + s + "' is not a number");
  }
}

inline std::size_t parse_count(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw InputError(what + ": '" + s + "' is not a non-negative integer");
  }
}

}  // namespace detail

/// "win", "value:v0,v1,..." (with `n` copies) or "threshold:n,k".
inline ObjectiveSpec parse_objective(const std::string& text, std::size_t value_n = 1) {
  ObjectiveSpec o;
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "win" && colon == std::string::npos) return o;
  if (head == "value") {
    o.kind = ObjectiveSpec::Kind::value;
    for (const auto& v : detail::split(tail, ',')) o.values.push_back(detail::parse_double(v, "objective value"));
    if (o.values.empty()) throw InputError("objective 'value:' needs a comma-separated list of values");
    if (value_n == 0) throw InputError("--n must be positive");
    o.n = value_n;
    return o;
  }
  if (head == "threshold") {
    auto parts = detail::split(tail, ',');
    if (parts.size() != 2) throw InputError("objective 'threshold:' expects n,k");
    o.kind = ObjectiveSpec::Kind::threshold;
    o.n = detail::parse_count(parts[0], "threshold n");
    o.k = detail::parse_count(parts[1], "threshold k");
    if (o.n == 0 || o.k > o.n) throw InputError("threshold objective needs n >= 1 and 0 <= k <= n");
    return o;
  }
  throw InputError("unknown objective '" + text + "' (expected win, value:v0,v1,... or threshold:n,k)");
}

/// Layout and objective operator of the strategy SDP an objective describes.
struct CompiledObjective {
  GameLayout layout;
  HermitianOperator objective;
};

inline CompiledObjective build_objective(const OutcomeOperators& g, const ObjectiveSpec& o) {
  switch (o.kind) {
    case ObjectiveSpec::Kind::win:
      require_two_outcomes(g);
      return {g.layout(), g.op(1)};
    case ObjectiveSpec::Kind::value:
      return {g.layout().parallel(o.n), value_objective(g, o.values, o.n)};
    case ObjectiveSpec::Kind::threshold:
      return {g.layout().parallel(o.n), threshold_objective(g, o.n, o.k)};
  }
  throw InputError("unknown objective");
}

/// Solves the strategy SDP and reads off a dual witness shifted to exact feasibility.
struct SolvedProblem {
  sdp::SolveReport report;
  DualWitness witness;
  sdp::FeasibilityReport witness_check;
};

inline SolvedProblem solve_strategy_problem(const CompiledObjective& c, const GlobalOptions& opt) {
  sdp::SdpProblem p = sdp::compile_primal(c.layout, c.objective);
  sdp::SolverOptions so;
  so.tol = opt.tol;
  so.max_iter = opt.max_iter;
  SolvedProblem out{sdp::solve(p, so), {}, {}};
  if (out.report.status == sdp::Status::optimal || out.report.status == sdp::Status::iteration_limit) {
    out.witness = sdp::repair_witness(c.layout, c.objective, sdp::extract_witness(c.layout, p, out.report));
    out.witness_check = sdp::check_dual_feasibility(c.layout, c.objective, out.witness, kWitnessTolerance);
  }
  return out;
}

inline int exit_for(sdp::Status s) {
  switch (s) {
    case sdp::Status::optimal: return kOk;
    case sdp::Status::infeasible: return kDomainNegative;
    default: return kNumerical;
  }
}

inline json solve_summary(const sdp::SolveReport& r) {
  json j = io::to_json(r, false);
  return j;
}

// ---- solve

struct SolveArgs {
  std::string game_file;
  std::string objective = "win";
  std::size_t n = 1;  // copies for value objectives
  std::optional<std::string> witness_out;
};

inline RunReport cmd_solve(const SolveArgs& a, const GlobalOptions& opt, DigestFn digest = nullptr) {
  RunReport rep;
  rep.command = "solve";
  PhaseTimer timer(rep);
  io::GameFile gf = timer.run("parse", [&] { return io::read_game(a.game_file); });
  if (digest) rep.inputs.push_back({a.game_file, digest(a.game_file)});
  ObjectiveSpec o = parse_objective(a.objective, a.n);
  CompiledObjective c = timer.run("compile", [&] { return build_objective(gf.game, o); });
  SolvedProblem s = timer.run("solve", [&] { return solve_strategy_problem(c, opt); });

  rep.results["objective"] = o.describe();
  rep.results["tolerance"] = opt.tol;
  rep.results["solve"] = solve_summary(s.report);
  if (s.report.status == sdp::Status::optimal) {
    rep.results["value"] = s.report.primal_value;
    rep.results["certified_upper_bound"] = io::to_json(s.witness_check);
    if (a.witness_out) {
      DualWitness w = s.witness;
      w.n = o.kind == ObjectiveSpec::Kind::win ? 1 : o.n;
      if (o.kind == ObjectiveSpec::Kind::threshold) w.k = o.k;
      if (o.kind == ObjectiveSpec::Kind::value) w.values = o.values;
      io::write_text(*a.witness_out, io::to_json(w).dump(2) + "\n");
    }
  }
  rep.exit_code = exit_for(s.report.status);
  std::ostringstream sum;
  sum << "status " << sdp::to_string(s.report.status) << ", value " << s.report.primal_value << " (dual "
      << s.report.dual_value << ", gap " << s.report.gap << ")";
  rep.summary = sum.str();
  return rep;
}

// ---- certify

struct CertifyArgs {
  std::string game_file;
  std::optional<std::string> witness_file;
  std::optional<std::string> construction;
  std::size_t n = 2;
  std::optional<std::size_t> k;
  std::vector<double> values;  // average construction; defaults to the win indicator
  std::optional<std::string> witness_out;
};

inline const std::vector<std::string>& construction_names() {
  static const std::vector<std::string> names{"average", "tensor-power", "naive", "snk", "classical-binomial"};
  return names;
}

inline RunReport cmd_certify(const CertifyArgs& a, const GlobalOptions& opt, DigestFn digest = nullptr) {
  if (a.witness_file.has_value() == a.construction.has_value())
    throw InputError("certify needs exactly one of --witness or --construction");
  RunReport rep;
  rep.command = "certify";
  PhaseTimer timer(rep);
  io::GameFile gf = timer.run("parse", [&] { return io::read_game(a.game_file); });
  if (digest) rep.inputs.push_back({a.game_file, digest(a.game_file)});
  const OutcomeOperators& g = gf.game;

  DualWitness w;
  ObjectiveSpec target;
  if (a.witness_file) {
    w = timer.run("parse", [&] { return io::witness_from_json(io::read_json(*a.witness_file), *a.witness_file); });
    if (digest) rep.inputs.push_back({*a.witness_file, digest(*a.witness_file)});
    if (!w.values.empty()) {
      target.kind = ObjectiveSpec::Kind::value;
      target.values = w.values;
      target.n = w.n;
    } else if (w.k) {
      target.kind = ObjectiveSpec::Kind::threshold;
      target.n = w.n;
      target.k = *w.k;
    } else if (w.n != 1) {
      throw InputError(*a.witness_file + ": witness for n > 1 copies must state k or values");
    }
  } else {
    const std::string& name = *a.construction;
    if (std::find(construction_names().begin(), construction_names().end(), name) == construction_names().end())
      throw InputError("unknown construction '" + name + "'");
    if (a.n == 0) throw InputError("--n must be positive");
    target.n = a.n;
    if (name == "average") {
      target.kind = ObjectiveSpec::Kind::value;
      target.values = a.values;
      if (target.values.empty()) {
        require_two_outcomes(g);
        target.values = {0.0, 1.0};
      }
    } else {
      target.kind = ObjectiveSpec::Kind::threshold;
      target.k = name == "tensor-power" ? a.n : a.k.value_or(1);
      if (name == "tensor-power" && a.k && *a.k != a.n) throw InputError("tensor-power witnesses have k = n");
      if (target.k > target.n) throw InputError("--k must not exceed --n");
    }

    // Base witness: the single-round dual, solved and shifted to exact feasibility.
    ObjectiveSpec single;
    if (target.kind == ObjectiveSpec::Kind::value) {
      single.kind = ObjectiveSpec::Kind::value;
      single.values = target.values;
    }
    CompiledObjective base_obj = single.kind == ObjectiveSpec::Kind::value
                                     ? CompiledObjective{g.layout(), weighted_outcomes(g, target.values)}
                                     : build_objective(g, single);
    SolvedProblem base = timer.run("solve", [&] { return solve_strategy_problem(base_obj, opt); });
    if (base.report.status != sdp::Status::optimal)
      throw NumericalError("single-round solve ended with status " + std::string(sdp::to_string(base.report.status)));
    rep.results["base"] = {{"value", base.report.primal_value},
                           {"witness_value", base.witness.value()},
                           {"tolerance", opt.tol}};
    w = timer.run("construct", [&] {
      if (name == "average") return witness_average(base.witness, g, target.values, target.n);
      if (name == "tensor-power") return witness_tensor_power(base.witness, g, target.n);
      if (name == "naive") return witness_naive(base.witness, g, target.n, target.k);
      if (name == "snk") return witness_recursive_snk(base.witness, g, target.n, target.k);
      return witness_classical_binomial(base.witness, g, target.n, target.k);
    });
  }

  CompiledObjective c = timer.run("compile", [&] { return build_objective(g, target); });
  sdp::FeasibilityReport fr = timer.run("certify", [&] {
    return sdp::check_dual_feasibility(c.layout, c.objective, w, kWitnessTolerance);
  });
  rep.results["objective"] = target.describe();
  rep.results["construction"] = w.construction;
  rep.results["feasibility"] = io::to_json(fr);
  rep.results["witness"] = io::to_json(w);
  rep.results["tolerance"] = kWitnessTolerance;
  if (a.witness_out) io::write_text(*a.witness_out, io::to_json(w).dump(2) + "\n");
  rep.exit_code = fr.feasible ? kOk : kDomainNegative;
  std::ostringstream sum;
  sum << w.construction << " witness for " << target.describe() << ": " << (fr.feasible ? "feasible" : "infeasible")
      << ", value " << fr.value;
  rep.summary = sum.str();
  return rep;
}

// ---- hedging demo

inline RunReport cmd_hedging_demo(const GlobalOptions& opt) {
  RunReport rep;
  rep.command = "hedging-demo";
  PhaseTimer timer(rep);
  OutcomeOperators g = timer.run("build", [] { return hedging::game(); });

  auto solve = [&](const ObjectiveSpec& o, const std::string& phase) {
    SolvedProblem s = timer.run(phase, [&] { return solve_strategy_problem(build_objective(g, o), opt); });
    if (s.report.status != sdp::Status::optimal)
      throw NumericalError(phase + ": solver ended with status " + sdp::to_string(s.report.status));
    return s;
  };
  SolvedProblem single = solve(parse_objective("win"), "solve-single");
  SolvedProblem k1 = solve(parse_objective("threshold:2,1"), "solve-two-k1");
  SolvedProblem k2 = solve(parse_objective("threshold:2,2"), "solve-two-k2");

  std::vector<double> probs = timer.run("phase-flip", [&] {
    return outcome_probabilities(parallel_game(g, 2), strategy_from_channel(hedging::phase_flip()));
  });
  const double p = single.report.primal_value;
  const double lose_both = probs[0];
  const double exactly_one = probs[1] + probs[2];

  rep.results["tolerance"] = opt.tol;
  rep.results["single_repetition"] = {{"value", p}, {"expected", hedging::single_round_value()},
                                      {"solve", solve_summary(single.report)}};
  rep.results["two_repetitions_at_least_one"] = {{"value", k1.report.primal_value}, {"solve", solve_summary(k1.report)}};
  rep.results["two_repetitions_both"] = {{"value", k2.report.primal_value},
                                         {"expected", std::pow(hedging::single_round_value(), 2)},
                                         {"solve", solve_summary(k2.report)}};
  rep.results["phase_flip"] = {{"probabilities", {{"lose_both", probs[0]}, {"win_second_only", probs[1]},
                                                  {"win_first_only", probs[2]}, {"win_both", probs[3]}}},
                               {"exactly_one_win", exactly_one},
                               {"tolerance", 1e-12}};
  rep.results["independent_play_at_least_one"] = {{"value", 1.0 - (1.0 - p) * (1.0 - p)},
                                                  {"exact", hedging::independent_tail()},
                                                  {"tolerance", opt.tol}};
  if (lose_both > 1e-12) throw NumericalError("phase-flip strategy loses both rounds with probability " + std::to_string(lose_both));
  std::ostringstream sum;
  sum.precision(10);
  sum << "single repetition " << p << "; two repetitions, at least one win " << k1.report.primal_value
      << " (independent play " << hedging::independent_tail() << "); phase flip wins exactly once with probability "
      << exactly_one;
  rep.summary = sum.str();
  return rep;
}

// ---- error reduction

struct PlanArgs {
  double alpha = 0;
  double beta = 0;
  double epsilon = 0;
};

inline RunReport cmd_plan(const PlanArgs& a) {
  RunReport rep;
  rep.command = "error-reduction";
  PhaseTimer timer(rep);
  error_reduction::Plan plan = timer.run("plan", [&] { return error_reduction::plan_rounds(a.alpha, a.beta, a.epsilon); });
  rep.results["plan"] = io::to_json(plan);
  rep.results["tolerance"] = a.epsilon;
  rep.exit_code = plan.satisfied ? kOk : kNumerical;
  std::ostringstream sum;
  sum << "n = " << plan.n << ", k = " << plan.k << " (c = " << plan.c.num << "/" << plan.c.den
      << "), completeness bound " << plan.completeness_bound << ", soundness bound " << plan.soundness_bound;
  rep.summary = sum.str();
  return rep;
}

// ---- entropy curve

struct CurveArgs {
  double x_min = 0.01;
  double x_max = 1.0;
  double step = 0.01;
};

inline std::string curve_csv(const std::vector<std::pair<double, double>>& pts) {
  std::ostringstream out;
  out.precision(12);
  out << "x,y\n";
  for (const auto& [x, y] : pts) out << x << "," << y << "\n";
  return out.str();
}

inline RunReport cmd_plot_entropy(const CurveArgs& a, std::string& csv) {
  RunReport rep;
  rep.command = "plot-entropy";
  PhaseTimer timer(rep);
  auto pts = timer.run("sample", [&] { return error_reduction::entropy_curve(a.x_min, a.x_max, a.step); });
  csv = curve_csv(pts);
  bool above = true;
  bool monotone = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    above = above && pts[i].second > pts[i].first / 3.0;
    if (i) monotone = monotone && pts[i].second > pts[i - 1].second;
  }
  rep.results["samples"] = pts.size();
  rep.results["above_x_over_3"] = above;
  rep.results["monotone_increasing"] = monotone;
  rep.results["tolerance"] = 0.0;
  rep.summary = std::to_string(pts.size()) + " samples; y > x/3 " + (above ? "everywhere" : "NOT everywhere") +
                "; " + (monotone ? "monotone increasing" : "not monotone");
  return rep;
}

}  // namespace qhedge::cli
