#pragma once

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qhedge/sdp/problem.hpp"

namespace qhedge::sdp {

enum class Status { optimal, infeasible, numerical_failure, iteration_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::numerical_failure: return "numerical-failure";
    case Status::iteration_limit: return "iteration-limit";
  }
  return "unknown";
}

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  bool use_start = true;  // honor SdpProblem::start when present
};

struct SolveReport {
  Status status = Status::numerical_failure;
  double primal_value = 0;
  double dual_value = 0;
  /// |primal - dual| / max(1, |primal|).
  double gap = 0;
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  std::vector<HermitianOperator> primal_blocks;
  std::vector<HermitianOperator> dual_slack;
  std::vector<double> dual_multipliers;
  int iterations = 0;
  double tolerance = 0;
  std::string message;
};

namespace detail {

struct Entry {
  Eigen::Index r, c;
  Complex v;
};

struct SparseTerm {
  std::size_t block;
  std::vector<Entry> entries;
};

using Blocks = std::vector<Matrix>;

/// The problem flattened into per-block matrices and sparse coefficient lists,
/// always in maximize form.
struct Workspace {
  std::vector<Eigen::Index> dims;
  std::vector<std::vector<SparseTerm>> rows;  // per constraint
  Blocks c;
  Eigen::VectorXd b;
  std::size_t total_dim = 0;

  explicit Workspace(const SdpProblem& p) {
    const double sign = p.sense == Sense::maximize ? 1.0 : -1.0;
    for (std::size_t k = 0; k < p.blocks.size(); ++k) {
      dims.push_back(static_cast<Eigen::Index>(p.blocks[k].spaces.total_dim()));
      total_dim += p.blocks[k].spaces.total_dim();
      c.push_back(sign * align(p.objective[k], p.blocks[k].spaces).matrix());
    }
    b.resize(static_cast<Eigen::Index>(p.constraints.size()));
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      b(static_cast<Eigen::Index>(i)) = p.constraints[i].rhs;
      std::vector<SparseTerm> terms;
      for (const auto& t : p.constraints[i].terms) {
        Matrix f = align(t.coefficient, p.blocks[t.block].spaces).matrix();
        SparseTerm st{t.block, {}};
        const double drop = 1e-15 * std::max(1.0, f.cwiseAbs().maxCoeff());
        for (Eigen::Index col = 0; col < f.cols(); ++col)
          for (Eigen::Index row = 0; row < f.rows(); ++row)
            if (std::abs(f(row, col)) > drop) st.entries.push_back({row, col, f(row, col)});
        // Merge terms on the same block.
        auto it = std::find_if(terms.begin(), terms.end(), [&](const SparseTerm& s) { return s.block == t.block; });
        if (it == terms.end())
          terms.push_back(std::move(st));
        else
          it->entries.insert(it->entries.end(), st.entries.begin(), st.entries.end());
      }
      rows.push_back(std::move(terms));
    }
  }

  std::size_t m() const { return rows.size(); }

  /// Re Tr(F_i G) for one block-sparse row and arbitrary (non-Hermitian) blocks G.
  double pair(std::size_t i, const Blocks& g) const {
    double acc = 0;
    for (const auto& t : rows[i])
      for (const auto& e : t.entries) acc += (e.v * g[t.block](e.c, e.r)).real();
    return acc;
  }

  Eigen::VectorXd apply(const Blocks& x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(m()));
    for (std::size_t i = 0; i < m(); ++i) out(static_cast<Eigen::Index>(i)) = pair(i, x);
    return out;
  }

  Blocks adjoint(const Eigen::VectorXd& y) const {
    Blocks out;
    for (auto d : dims) out.push_back(Matrix::Zero(d, d));
    for (std::size_t i = 0; i < m(); ++i) {
      const double yi = y(static_cast<Eigen::Index>(i));
      if (yi == 0.0) continue;
      for (const auto& t : rows[i])
        for (const auto& e : t.entries) out[t.block](e.r, e.c) += yi * e.v;
    }
    return out;
  }
};

inline double inner(const Blocks& a, const Blocks& b) {
  double acc = 0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k].conjugate().cwiseProduct(b[k])).sum().real();
  return acc;
}

inline double frob(const Blocks& a) {
  double acc = 0;
  for (const auto& m : a) acc += m.squaredNorm();
  return std::sqrt(acc);
}

inline Matrix herm(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Largest alpha <= 1/gamma-scaled so that x + alpha dx stays PSD; +inf if unbounded.
inline double max_step(const Matrix& x, const Matrix& dx, bool& ok) {
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) {
    ok = false;
    return 0;
  }
  Matrix linv_dx = llt.matrixL().solve(dx);
  Matrix w = llt.matrixL().solve(linv_dx.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm(w), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    ok = false;
    return 0;
  }
  double lo = es.eigenvalues()(0);
  return lo < 0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

inline double max_step(const Blocks& x, const Blocks& dx, bool& ok) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) a = std::min(a, max_step(x[k], dx[k], ok));
  return a;
}

inline bool inverse_pd(const Matrix& z, Matrix& out) {
  Eigen::LLT<Matrix> llt(z);
  if (llt.info() != Eigen::Success) return false;
  out = llt.solve(Matrix::Identity(z.rows(), z.cols()));
  out = herm(out);
  return true;
}

}  // namespace detail

/// Primal-dual interior-point method (HKM direction, Mehrotra predictor-corrector)
/// over a product of complex Hermitian PSD cones.
///
/// Stops with `optimal` once |p - d| <= tol * max(1, |p|) and both relative
/// residuals ||b - A(X)|| / (1 + ||b||), ||C - A*(y) + Z|| / (1 + ||C||) are <= tol.
inline SolveReport solve(const SdpProblem& p, const SolverOptions& opt = {}) {
  if (!(opt.tol >= 1e-10 && opt.tol <= 1e-2)) throw InputError("tolerance must lie in [1e-10, 1e-2]");
  if (opt.max_iter < 1) throw InputError("iteration cap must be positive");
  p.validate();
  for (const auto& b : p.blocks)
    if (b.spaces.total_dim() > kMaxDimension) throw InputError("block '" + b.name + "' exceeds the dimension cap");

  using namespace detail;
  const Workspace ws(p);
  const auto m = static_cast<Eigen::Index>(ws.m());
  const std::size_t nb = ws.dims.size();
  const double sign = p.sense == Sense::maximize ? 1.0 : -1.0;
  const double bnorm = ws.b.norm();
  const double cnorm = frob(ws.c);

  Blocks x, z;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  bool started = false;
  if (opt.use_start && p.start && p.start->x.size() == nb && p.start->y.size() == static_cast<std::size_t>(m)) {
    x = p.start->x;
    for (Eigen::Index i = 0; i < m; ++i) y(i) = sign * p.start->y[static_cast<std::size_t>(i)];
    Blocks aty = ws.adjoint(y);
    started = true;
    for (std::size_t k = 0; k < nb; ++k) {
      Matrix zk = herm(aty[k] - ws.c[k]);
      Matrix tmp;
      if (x[k].rows() != ws.dims[k] || !inverse_pd(herm(x[k]), tmp) || !inverse_pd(zk, tmp)) {
        started = false;
        break;
      }
      z.push_back(zk);
    }
  }
  if (!started) {
    // Identity-scaled start.
    double xi = std::max(10.0, std::sqrt(static_cast<double>(ws.total_dim)));
    double eta = xi;
    for (std::size_t i = 0; i < ws.m(); ++i) {
      double fn = 0;
      for (const auto& t : ws.rows[i])
        for (const auto& e : t.entries) fn += std::norm(e.v);
      fn = std::sqrt(fn);
      xi = std::max(xi, static_cast<double>(ws.total_dim) * (1.0 + std::abs(ws.b(static_cast<Eigen::Index>(i)))) / (1.0 + fn));
      eta = std::max(eta, fn);
    }
    eta = std::max(eta, cnorm);
    x.clear();
    z.clear();
    y.setZero();
    for (auto d : ws.dims) {
      x.push_back(xi * Matrix::Identity(d, d));
      z.push_back(eta * Matrix::Identity(d, d));
    }
  }

  SolveReport rep;
  rep.tolerance = opt.tol;
  double gamma = 0.9;
  int small_steps = 0;

  auto finish = [&](Status s, std::string msg) {
    rep.status = s;
    rep.message = std::move(msg);
    double pv = inner(ws.c, x);
    double dv = ws.b.dot(y);
    rep.primal_value = sign * pv + p.offset;
    rep.dual_value = sign * dv + p.offset;
    rep.gap = std::abs(pv - dv) / std::max(1.0, std::abs(pv));
    rep.primal_blocks.clear();
    rep.dual_slack.clear();
    for (std::size_t k = 0; k < nb; ++k) {
      rep.primal_blocks.push_back(HermitianOperator::trusted(p.blocks[k].spaces, herm(x[k])));
      rep.dual_slack.push_back(HermitianOperator::trusted(p.blocks[k].spaces, herm(z[k])));
    }
    rep.dual_multipliers.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) rep.dual_multipliers[static_cast<std::size_t>(i)] = sign * y(i);
    return rep;
  };

  for (int iter = 0;; ++iter) {
    rep.iterations = iter;
    Eigen::VectorXd rp = ws.b - ws.apply(x);
    Blocks aty = ws.adjoint(y);
    Blocks rd(nb);
    for (std::size_t k = 0; k < nb; ++k) rd[k] = ws.c[k] - aty[k] + z[k];
    const double pv = inner(ws.c, x);
    const double dv = ws.b.dot(y);
    const double pinf = rp.norm() / (1.0 + bnorm);
    const double dinf = frob(rd) / (1.0 + cnorm);
    const double gap = std::abs(pv - dv) / std::max(1.0, std::abs(pv));
    rep.primal_infeasibility = pinf;
    rep.dual_infeasibility = dinf;
    if (!std::isfinite(pv) || !std::isfinite(dv)) return finish(Status::numerical_failure, "non-finite iterate");
    if (gap <= opt.tol && pinf <= opt.tol && dinf <= opt.tol) return finish(Status::optimal, "converged");

    // Infeasibility certificates: a dual ray (b^T y -> -inf with A*(y) - Z -> 0 after
    // normalization) certifies primal infeasibility; a primal ray certifies dual infeasibility.
    if (dv < -1e8 * std::max(1.0, frob(x)) && frob(rd) / std::abs(dv) < 1e-8)
      return finish(Status::infeasible, "dual ray found: primal constraints are infeasible");
    if (pv > 1e8 * std::max(1.0, y.norm()) && rp.norm() / pv < 1e-8)
      return finish(Status::infeasible, "primal ray found: dual constraints are infeasible");
    if (iter >= opt.max_iter) return finish(Status::iteration_limit, "iteration cap reached");

    const double mu = inner(x, z) / static_cast<double>(ws.total_dim);
    Blocks zinv(nb);
    for (std::size_t k = 0; k < nb; ++k)
      if (!inverse_pd(z[k], zinv[k])) return finish(Status::numerical_failure, "dual slack lost positive definiteness");

    // Schur complement M_ij = Re Tr(F_i X F_j Z^-1).
    Eigen::MatrixXd schur(m, m);
    {
      Blocks g(nb);
      for (std::size_t k = 0; k < nb; ++k) g[k] = Matrix::Zero(ws.dims[k], ws.dims[k]);
      for (Eigen::Index j = 0; j < m; ++j) {
        for (const auto& t : ws.rows[static_cast<std::size_t>(j)]) {
          const Eigen::Index d = ws.dims[t.block];
          Matrix xf = Matrix::Zero(d, d);
          std::vector<char> used(static_cast<std::size_t>(d), 0);
          for (const auto& e : t.entries) {
            xf.col(e.c) += e.v * x[t.block].col(e.r);
            used[static_cast<std::size_t>(e.c)] = 1;
          }
          Matrix& gk = g[t.block];
          gk.setZero();
          for (Eigen::Index c = 0; c < d; ++c)
            if (used[static_cast<std::size_t>(c)]) gk.noalias() += xf.col(c) * zinv[t.block].row(c);
        }
        for (Eigen::Index i = 0; i < m; ++i) {
          double acc = 0;
          for (const auto& t : ws.rows[static_cast<std::size_t>(i)]) {
            bool present = false;
            for (const auto& tj : ws.rows[static_cast<std::size_t>(j)]) present = present || tj.block == t.block;
            if (!present) continue;
            for (const auto& e : t.entries) acc += (e.v * g[t.block](e.c, e.r)).real();
          }
          schur(i, j) = acc;
        }
      }
    }
    schur = 0.5 * (schur + schur.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> chol(schur);
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    bool use_llt = chol.info() == Eigen::Success;
    if (!use_llt) {
      ldlt.compute(schur);
      if (ldlt.info() != Eigen::Success) return finish(Status::numerical_failure, "Schur complement is singular");
    }
    auto solve_schur = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
      return use_llt ? Eigen::VectorXd(chol.solve(r)) : Eigen::VectorXd(ldlt.solve(r));
    };

    // Direction for target sigma*mu with an optional second-order term.
    auto direction = [&](double sigma_mu, const Blocks* corr, Blocks& dx, Eigen::VectorXd& dy, Blocks& dz) {
      Blocks base(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        base[k] = sigma_mu * zinv[k] - x[k] + x[k] * rd[k] * zinv[k];
        if (corr) base[k] -= (*corr)[k];
      }
      Eigen::VectorXd rhs = ws.apply(base) - rp;
      dy = solve_schur(rhs);
      Blocks atdy = ws.adjoint(dy);
      dz.assign(nb, Matrix());
      dx.assign(nb, Matrix());
      for (std::size_t k = 0; k < nb; ++k) {
        dz[k] = herm(atdy[k] - rd[k]);
        Matrix t = sigma_mu * zinv[k] - x[k] - x[k] * dz[k] * zinv[k];
        if (corr) t -= (*corr)[k];
        dx[k] = herm(t);
      }
      return dy.allFinite();
    };

    Blocks dxa, dza;
    Eigen::VectorXd dya;
    if (!direction(0.0, nullptr, dxa, dya, dza)) return finish(Status::numerical_failure, "predictor direction is not finite");
    bool ok = true;
    double ap = std::min(1.0, max_step(x, dxa, ok));
    double ad = std::min(1.0, max_step(z, dza, ok));
    if (!ok) return finish(Status::numerical_failure, "lost positive definiteness");
    Blocks xa(nb), za(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      xa[k] = x[k] + ap * dxa[k];
      za[k] = z[k] + ad * dza[k];
    }
    const double mu_aff = inner(xa, za) / static_cast<double>(ws.total_dim);
    double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    Blocks corr(nb);
    for (std::size_t k = 0; k < nb; ++k) corr[k] = dxa[k] * dza[k] * zinv[k];
    Blocks dx, dz;
    Eigen::VectorXd dy;
    if (!direction(sigma * mu, &corr, dx, dy, dz)) return finish(Status::numerical_failure, "corrector direction is not finite");
    ap = std::min(1.0, gamma * max_step(x, dx, ok));
    ad = std::min(1.0, gamma * max_step(z, dz, ok));
    if (!ok) return finish(Status::numerical_failure, "lost positive definiteness");

    for (std::size_t k = 0; k < nb; ++k) {
      x[k] = herm(x[k] + ap * dx[k]);
      z[k] = herm(z[k] + ad * dz[k]);
    }
    y += ad * dy;
    gamma = 0.9 + 0.09 * std::min(ap, ad);

    small_steps = (std::max(ap, ad) < 1e-8) ? small_steps + 1 : 0;
    if (small_steps >= 5) {
      rep.iterations = iter + 1;
      return finish(Status::numerical_failure, "step length collapsed");
    }
  }
}

}  // namespace qhedge::sdp
