#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qhedge/qhedge.hpp"

namespace qhedge::testing {

using Rng = std::mt19937_64;

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline Matrix random_unitary(Rng& rng, Eigen::Index d) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, d, d));
  return qr.householderQ() * Matrix::Identity(d, d);
}

/// G G^* with G of the given rank: PSD, generically full rank when rank == d.
inline HermitianOperator random_psd(Rng& rng, const SpaceList& s, Eigen::Index rank = -1) {
  auto d = static_cast<Eigen::Index>(s.total_dim());
  Matrix g = random_matrix(rng, d, rank < 0 ? d : rank);
  return HermitianOperator(s, g * g.adjoint());
}

inline DensityOperator random_density(Rng& rng, const SpaceList& s, Eigen::Index rank = -1) {
  HermitianOperator p = random_psd(rng, s, rank);
  return DensityOperator((1.0 / p.trace()) * p);
}

/// Random POVM with t elements: S^{-1/2} G_k S^{-1/2}.
inline std::vector<HermitianOperator> random_povm(Rng& rng, const SpaceList& s, std::size_t t) {
  std::vector<HermitianOperator> g;
  HermitianOperator sum = HermitianOperator::zero(s);
  for (std::size_t k = 0; k < t; ++k) {
    g.push_back(random_psd(rng, s));
    sum += g.back();
  }
  HermitianOperator inv_sqrt = spectral_map(sum, [](double x) { return 1.0 / std::sqrt(x); });
  std::vector<HermitianOperator> out;
  for (const auto& gk : g) {
    Matrix m = inv_sqrt.matrix() * gk.matrix() * inv_sqrt.matrix();
    out.emplace_back(s, 0.5 * (m + m.adjoint()));
  }
  return out;
}

/// Random channel in -> out with `terms` Kraus operators: blocks of an isometry.
/// `terms` is raised when terms * dim(out) < dim(in), since no isometry exists then.
inline KrausChannel random_channel(Rng& rng, const SpaceList& in, const SpaceList& out, std::size_t terms = 2) {
  auto din = static_cast<Eigen::Index>(in.total_dim());
  auto dout = static_cast<Eigen::Index>(out.total_dim());
  terms = std::max<std::size_t>(terms, static_cast<std::size_t>((din + dout - 1) / dout));
  auto big = static_cast<Eigen::Index>(terms) * dout;
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, big, din));
  Matrix v = qr.householderQ() * Matrix::Identity(big, din);
  std::vector<Matrix> ks;
  for (std::size_t k = 0; k < terms; ++k) ks.push_back(v.block(static_cast<Eigen::Index>(k) * dout, 0, dout, din));
  return KrausChannel(in, out, ks);
}

struct Dims {
  std::size_t x = 2, y = 2, z = 2;
};

inline Dims random_dims(Rng& rng, std::size_t max_dim = 3) {
  std::uniform_int_distribution<std::size_t> d(1, max_dim);
  Dims out{d(rng), d(rng), d(rng)};
  if (out.x * out.y == 1) out.y = 2;
  return out;
}

inline SingleRoundGameSpec random_game_spec(Rng& rng, const Dims& d, std::size_t outcomes = 2) {
  SpaceList xz{{"X", d.x}, {"Z", d.z}};
  SpaceList yz{{"Y", d.y}, {"Z", d.z}};
  return SingleRoundGameSpec{random_density(rng, xz), random_povm(rng, yz, outcomes)};
}

/// Classical game: diagonal sigma on X,Z and a measurement of Y,Z that is
/// diagonal in the computational basis (a random win/lose table per (y,z)).
inline SingleRoundGameSpec random_diagonal_game_spec(Rng& rng, const Dims& d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpaceList xz{{"X", d.x}, {"Z", d.z}};
  SpaceList yz{{"Y", d.y}, {"Z", d.z}};
  std::vector<double> p(xz.total_dim());
  double s = 0;
  for (auto& v : p) s += (v = u(rng) + 0.05);
  for (auto& v : p) v /= s;
  std::vector<double> win(yz.total_dim());
  std::vector<double> lose(yz.total_dim());
  for (std::size_t i = 0; i < win.size(); ++i) {
    win[i] = u(rng);
    lose[i] = 1.0 - win[i];
  }
  return SingleRoundGameSpec{DensityOperator(HermitianOperator::diagonal(xz, p)),
                             {HermitianOperator::diagonal(yz, lose), HermitianOperator::diagonal(yz, win)}};
}

/// Random two-round game with an adaptive second question: R_2 = sum_y |y><y| (x) rho (x) tau_y,
/// P_i = S M_i S with S = sqrt(I_{Y2} (x) R_2) and {M_i} a random POVM.
inline OutcomeOperators random_two_round_game(Rng& rng, std::size_t outcomes = 2, std::size_t d = 2) {
  GameLayout layout({Round{SpaceList{{"X1", d}}, SpaceList{{"Y1", d}}}, Round{SpaceList{{"X2", d}}, SpaceList{{"Y2", d}}}});
  DensityOperator rho = random_density(rng, SpaceList{{"X1", d}});
  HermitianOperator r2 = HermitianOperator::zero(layout.consistency_space(2));
  for (std::size_t y = 0; y < d; ++y) {
    std::vector<double> e(d, 0.0);
    e[y] = 1.0;
    HermitianOperator tau = random_density(rng, SpaceList{{"X2", d}}).op();
    r2 += kron(kron(HermitianOperator::diagonal(SpaceList{{"Y1", d}}, e), rho.op()), tau);
  }
  const SpaceList full = layout.full_space();
  HermitianOperator s = spectral_map(embed(r2, full), [](double x) { return std::sqrt(std::max(x, 0.0)); });
  std::vector<HermitianOperator> ops;
  for (const auto& m : random_povm(rng, full, outcomes)) {
    Matrix p = s.matrix() * m.matrix() * s.matrix();
    ops.emplace_back(full, 0.5 * (p + p.adjoint()));
  }
  return OutcomeOperators(layout, ops, rho.op(), {r2});
}

/// Solves the strategy SDP and returns the solver's dual, repaired to be exactly feasible.
inline DualWitness solved_witness(const OutcomeOperators& g, const HermitianOperator& objective, double* value = nullptr) {
  sdp::SdpProblem p = sdp::compile_primal(g, objective);
  sdp::SolveReport r = sdp::solve(p);
  if (r.status != sdp::Status::optimal) throw NumericalError("test solve failed: " + r.message);
  if (value) *value = r.primal_value;
  return sdp::repair_witness(g.layout(), objective, sdp::extract_witness(g.layout(), p, r));
}

/// Best deterministic answer table f: x -> y, found by enumerating all dy^dx tables.
inline double deterministic_enumeration_value(const OutcomeOperators& g) {
  const Round& rd = g.layout().round(1);
  const std::size_t dx = rd.inputs.total_dim();
  const std::size_t dy = rd.outputs.total_dim();
  std::size_t tables = 1;
  for (std::size_t i = 0; i < dx; ++i) tables *= dy;
  double best = 0;
  for (std::size_t t = 0; t < tables; ++t) {
    std::vector<double> diag(dx * dy, 0.0);
    std::size_t rest = t;
    for (std::size_t x = 0; x < dx; ++x) {
      std::size_t y = rest % dy;
      rest /= dy;
      diag[y * dx + x] = 1.0;  // Choi of the classical map x -> f(x), spaces Y then X
    }
    HermitianOperator j = HermitianOperator::diagonal(concat(rd.outputs, rd.inputs), diag);
    best = std::max(best, inner(g.op(1), j));
  }
  return best;
}

/// Upward closure of a few random strings: a random monotone subset of {0,1}^n.
inline std::vector<BitString> random_monotone_set(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> count(1, 3);
  std::bernoulli_distribution bit(0.5);
  std::set<BitString> seeds;
  for (std::size_t i = 0, c = count(rng); i < c; ++i) {
    BitString s(n);
    for (auto& b : s) b = bit(rng) ? 1 : 0;
    seeds.insert(s);
  }
  std::vector<BitString> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    BitString s(n);
    for (std::size_t m = 0; m < n; ++m) s[m] = static_cast<int>((mask >> (n - 1 - m)) & 1U);
    for (const auto& seed : seeds) {
      bool above = true;
      for (std::size_t m = 0; m < n; ++m) above = above && s[m] >= seed[m];
      if (above) {
        out.push_back(s);
        break;
      }
    }
  }
  return out;
}

inline std::string data_file(const std::string& name) { return std::string(QHEDGE_DATA_DIR) + "/" + name; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("qhedge-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace qhedge::testing
