#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qhedge/certificates.hpp"
#include "qhedge/channel.hpp"
#include "qhedge/error_reduction.hpp"
#include "qhedge/game.hpp"
#include "qhedge/sdp/compile.hpp"

namespace qhedge::io {

using json = nlohmann::json;

/// A parsed game file: the outcome operators (already grouped into lose/win
/// when the file names winning outcomes) and, for single-round files, the
/// description it came from.
struct GameFile {
  OutcomeOperators game;
  std::optional<SingleRoundGameSpec> single_round;
  std::optional<std::set<std::size_t>> winning;
  std::size_t raw_outcomes = 0;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) { throw InputError(path + ": " + what); }

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field '" + key + "'");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "number is not finite");
  return v;
}

inline std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  auto v = j.get<long long>();
  if (v < 0) fail(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline Complex complex_entry(const json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) fail(path, "expected a number or an [re, im] pair");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline SpaceList spaces_from(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of [label, dim] pairs");
  std::vector<Space> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    std::string p = path + "[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 2 || !e[0].is_string()) fail(p, "expected a [label, dim] pair");
    std::size_t d = count(e[1], p + "[1]");
    if (d == 0) fail(p, "dimension must be positive");
    out.push_back({e[0].get<std::string>(), d});
  }
  try {
    return SpaceList(std::move(out));
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

inline json spaces_json(const SpaceList& s) {
  json out = json::array();
  for (const auto& e : s) out.push_back(json::array({e.label, e.dim}));
  return out;
}

inline Matrix matrix_from(const json& j, std::size_t rows, std::size_t cols, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a row-major array of entries");
  if (j.size() != rows * cols)
    fail(path, "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(j.size()));
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_entry(j[r * cols + c], path + "[" + std::to_string(r * cols + c) + "]");
  return m;
}

inline json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(complex_json(m(r, c)));
  return out;
}

template <class F>
auto rethrow_at(const std::string& path, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

inline std::vector<std::string> label_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of labels");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "expected a label");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

}  // namespace detail

inline json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": malformed JSON: " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) { return parse_text(read_file(path), path); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot open file for writing");
  out << text;
  if (!out) throw InputError(path + ": write failed");
}

// ---- operators and channels

inline HermitianOperator operator_from_json(const json& j, const std::string& path = "operator") {
  SpaceList s = detail::spaces_from(detail::field(j, "spaces", path), path + ".spaces");
  if (s.total_dim() > kMaxDimension) detail::fail(path, "total dimension exceeds the cap of " + std::to_string(kMaxDimension));
  Matrix m = detail::matrix_from(detail::field(j, "entries", path), s.total_dim(), s.total_dim(), path + ".entries");
  return detail::rethrow_at(path, [&] { return HermitianOperator(s, m); });
}

inline json to_json(const HermitianOperator& a) {
  return json{{"spaces", detail::spaces_json(a.spaces())}, {"entries", detail::matrix_json(a.matrix())}};
}

inline DensityOperator density_from_json(const json& j, const std::string& path) {
  HermitianOperator h = operator_from_json(j, path);
  return detail::rethrow_at(path, [&] { return DensityOperator(h); });
}

inline KrausChannel channel_from_json(const json& j, const std::string& path = "channel") {
  SpaceList in = detail::spaces_from(detail::field(j, "in_spaces", path), path + ".in_spaces");
  SpaceList out = detail::spaces_from(detail::field(j, "out_spaces", path), path + ".out_spaces");
  if (in.total_dim() > kMaxDimension || out.total_dim() > kMaxDimension) detail::fail(path, "dimension cap exceeded");
  const json& ks = detail::field(j, "kraus", path);
  if (!ks.is_array() || ks.empty()) detail::fail(path + ".kraus", "expected a non-empty array of matrices");
  std::vector<Matrix> mats;
  for (std::size_t i = 0; i < ks.size(); ++i)
    mats.push_back(detail::matrix_from(ks[i], out.total_dim(), in.total_dim(), path + ".kraus[" + std::to_string(i) + "]"));
  return detail::rethrow_at(path, [&] { return KrausChannel(in, out, mats); });
}

inline json to_json(const KrausChannel& ch) {
  json ks = json::array();
  for (const auto& k : ch.kraus()) ks.push_back(detail::matrix_json(k));
  return json{{"in_spaces", detail::spaces_json(ch.input_spaces())},
              {"out_spaces", detail::spaces_json(ch.output_spaces())},
              {"kraus", ks}};
}

// ---- games

inline std::set<std::size_t> winning_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) detail::fail(path, "expected a non-empty array of outcome indices");
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.insert(detail::count(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline GameFile game_from_json(const json& j, const std::string& path = "game") {
  const json& type = detail::field(j, "type", path);
  if (!type.is_string()) detail::fail(path + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  std::optional<std::set<std::size_t>> winning;
  if (j.contains("winning")) winning = winning_from(j["winning"], path + ".winning");

  auto finish = [&](OutcomeOperators g, std::optional<SingleRoundGameSpec> spec) {
    const std::size_t raw = g.outcome_count();
    if (winning) {
      for (auto w : *winning)
        if (w >= raw) detail::fail(path + ".winning", "index " + std::to_string(w) + " out of range");
      g = group_outcomes(g, *winning);
    }
    return GameFile{std::move(g), std::move(spec), winning, raw};
  };

  if (t == "single_round") {
    DensityOperator sigma = density_from_json(detail::field(j, "sigma", path), path + ".sigma");
    const json& ms = detail::field(j, "measurement", path);
    if (!ms.is_array() || ms.empty()) detail::fail(path + ".measurement", "expected a non-empty array of operators");
    std::vector<HermitianOperator> q;
    for (std::size_t i = 0; i < ms.size(); ++i)
      q.push_back(operator_from_json(ms[i], path + ".measurement[" + std::to_string(i) + "]"));
    SingleRoundGameSpec spec{sigma, q};
    OutcomeOperators g = detail::rethrow_at(path, [&] { return outcome_operators_single_round(spec); });
    return finish(std::move(g), spec);
  }
  if (t == "operators") {
    std::size_t r = detail::count(detail::field(j, "r", path), path + ".r");
    if (r == 0) detail::fail(path + ".r", "must be positive");
    const json& ps = detail::field(j, "P", path);
    if (!ps.is_array() || ps.empty()) detail::fail(path + ".P", "expected a non-empty array of operators");
    std::vector<HermitianOperator> p;
    for (std::size_t i = 0; i < ps.size(); ++i) p.push_back(operator_from_json(ps[i], path + ".P[" + std::to_string(i) + "]"));
    HermitianOperator rho = operator_from_json(detail::field(j, "rho", path), path + ".rho");
    std::vector<HermitianOperator> rs;
    if (j.contains("R")) {
      const json& rj = j["R"];
      if (!rj.is_array()) detail::fail(path + ".R", "expected an array of operators");
      for (std::size_t i = 0; i < rj.size(); ++i) rs.push_back(operator_from_json(rj[i], path + ".R[" + std::to_string(i) + "]"));
    }
    std::vector<Round> rounds;
    if (j.contains("rounds")) {
      const json& rj = j["rounds"];
      if (!rj.is_array() || rj.size() != r) detail::fail(path + ".rounds", "expected one entry per round");
      const SpaceList& full = p.front().spaces();
      for (std::size_t i = 0; i < r; ++i) {
        std::string rp = path + ".rounds[" + std::to_string(i) + "]";
        auto ins = detail::label_list(detail::field(rj[i], "inputs", rp), rp + ".inputs");
        auto outs = detail::label_list(detail::field(rj[i], "outputs", rp), rp + ".outputs");
        Round rd = detail::rethrow_at(rp, [&] { return Round{full.select(ins), full.select(outs)}; });
        rounds.push_back(std::move(rd));
      }
    } else {
      if (r != 1) detail::fail(path, "games with more than one round need a 'rounds' field naming each round's spaces");
      const SpaceList& full = p.front().spaces();
      SpaceList xs = rho.spaces();
      SpaceList ys = detail::rethrow_at(path + ".P[0]", [&] {
        for (const auto& s : xs)
          if (!full.contains(s.label)) throw InputError("rho space '" + s.label + "' is missing from P");
        return full.without(xs.labels());
      });
      rounds.push_back({xs, ys});
    }
    OutcomeOperators g = detail::rethrow_at(path, [&] {
      return OutcomeOperators(GameLayout(rounds), p, rho, rs);
    });
    return finish(std::move(g), std::nullopt);
  }
  detail::fail(path + ".type", "unknown game type '" + t + "' (expected single_round or operators)");
}

inline GameFile read_game(const std::string& file) { return game_from_json(read_json(file), file); }

inline json to_json(const GameFile& gf) {
  if (gf.single_round) {
    json ms = json::array();
    for (const auto& q : gf.single_round->measurement) ms.push_back(to_json(q));
    json out{{"type", "single_round"}, {"sigma", to_json(gf.single_round->sigma.op())}, {"measurement", ms}};
    if (gf.winning) out["winning"] = *gf.winning;
    return out;
  }
  const auto& g = gf.game;
  json ps = json::array();
  for (const auto& p : g.ops()) ps.push_back(to_json(p));
  json rs = json::array();
  for (std::size_t j = 2; j <= g.rounds(); ++j) rs.push_back(to_json(g.consistency(j)));
  json rounds = json::array();
  for (const auto& r : g.layout().all_rounds()) rounds.push_back({{"inputs", r.inputs.labels()}, {"outputs", r.outputs.labels()}});
  return json{{"type", "operators"}, {"r", g.rounds()}, {"P", ps}, {"rho", to_json(g.rho())}, {"R", rs}, {"rounds", rounds}};
}

/// Plain outcome-operator form of a game, as accepted by game_from_json.
inline json operators_json(const OutcomeOperators& g) {
  return to_json(GameFile{g, std::nullopt, std::nullopt, g.outcome_count()});
}

// ---- witnesses

inline json to_json(const DualWitness& w) {
  json blocks = json::array();
  for (const auto& b : w.y_blocks) blocks.push_back(to_json(b));
  json out{{"construction", w.construction}, {"n", w.n}, {"Y", to_json(w.y)}, {"Y_blocks", blocks}, {"value", w.value()}};
  out["k"] = w.k ? json(*w.k) : json(nullptr);
  if (!w.values.empty()) out["values"] = w.values;
  if (!w.provenance.empty()) out["provenance"] = w.provenance;
  return out;
}

inline DualWitness witness_from_json(const json& j, const std::string& path = "witness") {
  DualWitness w;
  w.y = operator_from_json(detail::field(j, "Y", path), path + ".Y");
  if (j.contains("Y_blocks")) {
    const json& b = j["Y_blocks"];
    if (!b.is_array()) detail::fail(path + ".Y_blocks", "expected an array of operators");
    for (std::size_t i = 0; i < b.size(); ++i)
      w.y_blocks.push_back(operator_from_json(b[i], path + ".Y_blocks[" + std::to_string(i) + "]"));
  }
  w.rounds = w.y_blocks.size() + 1;
  if (j.contains("construction")) {
    if (!j["construction"].is_string()) detail::fail(path + ".construction", "expected a string");
    w.construction = j["construction"].get<std::string>();
  }
  if (j.contains("n")) w.n = detail::count(j["n"], path + ".n");
  if (w.n == 0) detail::fail(path + ".n", "must be positive");
  if (j.contains("k") && !j["k"].is_null()) w.k = detail::count(j["k"], path + ".k");
  if (j.contains("values")) {
    const json& v = j["values"];
    if (!v.is_array()) detail::fail(path + ".values", "expected an array of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) w.values.push_back(detail::number(v[i], path + ".values[" + std::to_string(i) + "]"));
  }
  if (j.contains("provenance") && j["provenance"].is_object())
    for (auto it = j["provenance"].begin(); it != j["provenance"].end(); ++it)
      if (it.value().is_string()) w.provenance[it.key()] = it.value().get<std::string>();
  if (j.contains("value")) {
    double claimed = detail::number(j["value"], path + ".value");
    if (std::abs(claimed - w.value()) > 1e-9 * std::max(1.0, std::abs(claimed)))
      detail::fail(path + ".value", "claimed value " + std::to_string(claimed) + " differs from Tr(Y) = " + std::to_string(w.value()));
  }
  return w;
}

// ---- SDP problems and reports

inline json to_json(const sdp::SdpProblem& p) {
  json blocks = json::array();
  for (const auto& b : p.blocks) blocks.push_back({{"name", b.name}, {"spaces", detail::spaces_json(b.spaces)}});
  json obj = json::array();
  for (const auto& c : p.objective) obj.push_back(to_json(c));
  json cons = json::array();
  for (const auto& c : p.constraints) {
    json terms = json::array();
    for (const auto& t : c.terms) terms.push_back({{"block", t.block}, {"F", to_json(t.coefficient)}});
    cons.push_back({{"rhs", c.rhs}, {"terms", terms}});
  }
  json groups = json::array();
  for (const auto& g : p.groups)
    groups.push_back({{"name", g.name}, {"spaces", detail::spaces_json(g.space)}, {"first", g.first}, {"count", g.count}});
  return json{{"sense", p.sense == sdp::Sense::maximize ? "maximize" : "minimize"},
              {"blocks", blocks},
              {"objective", obj},
              {"offset", p.offset},
              {"constraints", cons},
              {"groups", groups}};
}

inline sdp::SdpProblem problem_from_json(const json& j, const std::string& path = "problem") {
  sdp::SdpProblem p;
  const json& sense = detail::field(j, "sense", path);
  if (sense == "maximize")
    p.sense = sdp::Sense::maximize;
  else if (sense == "minimize")
    p.sense = sdp::Sense::minimize;
  else
    detail::fail(path + ".sense", "expected maximize or minimize");
  const json& blocks = detail::field(j, "blocks", path);
  if (!blocks.is_array()) detail::fail(path + ".blocks", "expected an array");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::string bp = path + ".blocks[" + std::to_string(b) + "]";
    const json& name = detail::field(blocks[b], "name", bp);
    if (!name.is_string()) detail::fail(bp + ".name", "expected a string");
    p.blocks.push_back({name.get<std::string>(), detail::spaces_from(detail::field(blocks[b], "spaces", bp), bp + ".spaces")});
  }
  const json& obj = detail::field(j, "objective", path);
  if (!obj.is_array()) detail::fail(path + ".objective", "expected an array of operators");
  for (std::size_t b = 0; b < obj.size(); ++b)
    p.objective.push_back(operator_from_json(obj[b], path + ".objective[" + std::to_string(b) + "]"));
  if (j.contains("offset")) p.offset = detail::number(j["offset"], path + ".offset");
  const json& cons = detail::field(j, "constraints", path);
  if (!cons.is_array()) detail::fail(path + ".constraints", "expected an array");
  for (std::size_t i = 0; i < cons.size(); ++i) {
    std::string cp = path + ".constraints[" + std::to_string(i) + "]";
    sdp::Constraint c;
    c.rhs = detail::number(detail::field(cons[i], "rhs", cp), cp + ".rhs");
    const json& terms = detail::field(cons[i], "terms", cp);
    if (!terms.is_array()) detail::fail(cp + ".terms", "expected an array");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      std::string tp = cp + ".terms[" + std::to_string(t) + "]";
      c.terms.push_back({detail::count(detail::field(terms[t], "block", tp), tp + ".block"),
                         operator_from_json(detail::field(terms[t], "F", tp), tp + ".F")});
    }
    p.constraints.push_back(std::move(c));
  }
  if (j.contains("groups")) {
    const json& gs = j["groups"];
    if (!gs.is_array()) detail::fail(path + ".groups", "expected an array");
    for (std::size_t i = 0; i < gs.size(); ++i) {
      std::string gp = path + ".groups[" + std::to_string(i) + "]";
      const json& name = detail::field(gs[i], "name", gp);
      if (!name.is_string()) detail::fail(gp + ".name", "expected a string");
      p.groups.push_back({name.get<std::string>(), detail::spaces_from(detail::field(gs[i], "spaces", gp), gp + ".spaces"),
                          detail::count(detail::field(gs[i], "first", gp), gp + ".first"),
                          detail::count(detail::field(gs[i], "count", gp), gp + ".count")});
    }
  }
  detail::rethrow_at(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

inline json to_json(const sdp::SolveReport& r, bool include_solution = true) {
  json out{{"status", sdp::to_string(r.status)},
           {"primal_value", r.primal_value},
           {"dual_value", r.dual_value},
           {"gap", r.gap},
           {"primal_infeasibility", r.primal_infeasibility},
           {"dual_infeasibility", r.dual_infeasibility},
           {"iterations", r.iterations},
           {"tolerance", r.tolerance},
           {"message", r.message}};
  if (include_solution) {
    json blocks = json::array();
    for (const auto& b : r.primal_blocks) blocks.push_back(to_json(b));
    out["primal_blocks"] = blocks;
    out["dual_multipliers"] = r.dual_multipliers;
  }
  return out;
}

inline json to_json(const sdp::FeasibilityReport& r) {
  json cons = json::array();
  for (std::size_t i = 0; i < r.min_eigenvalues.size(); ++i)
    cons.push_back({{"constraint", r.constraint_names[i]}, {"min_eigenvalue", r.min_eigenvalues[i]}});
  return json{{"feasible", r.feasible}, {"value", r.value}, {"tolerance", r.tolerance}, {"constraints", cons}};
}

inline json to_json(const error_reduction::Plan& p) {
  return json{{"alpha", p.alpha},
              {"beta", p.beta},
              {"epsilon", p.epsilon},
              {"threshold", p.threshold},
              {"c", {{"num", p.c.num}, {"den", p.c.den}, {"value", p.c.value()}}},
              {"soundness_coefficient", p.coefficient},
              {"n", p.n},
              {"k", p.k},
              {"completeness_bound", p.completeness_bound},
              {"soundness_bound", p.soundness_bound},
              {"satisfied", p.satisfied}};
}

}  // namespace qhedge::io
