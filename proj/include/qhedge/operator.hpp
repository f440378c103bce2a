#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qhedge/error.hpp"
#include "qhedge/spaces.hpp"

namespace qhedge {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kDensityTolerance = 1e-10;

/// Dense Hermitian matrix over a labeled tensor-product space.
///
/// Construction checks Hermiticity: a drift |A - A^*| up to 1e-12 (relative
/// to the largest entry, floored at 1) is absorbed by symmetrizing; anything
/// larger is rejected.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  HermitianOperator(SpaceList spaces, Matrix m) : spaces_(std::move(spaces)), m_(std::move(m)) {
    check_shape();
    double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    double drift = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (drift > kHermitianTolerance * scale)
      throw InputError("operator on " + describe(spaces_) + " is not Hermitian (drift " +
                       std::to_string(drift) + ")");
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
  }

  /// For results that are Hermitian by construction (sums, tensor products,
  /// index permutations of Hermitian inputs).
  static HermitianOperator trusted(SpaceList spaces, Matrix m) {
    HermitianOperator h;
    h.spaces_ = std::move(spaces);
    h.m_ = std::move(m);
    h.check_shape();
    return h;
  }

  static HermitianOperator identity(const SpaceList& spaces) {
    auto d = static_cast<Eigen::Index>(spaces.total_dim());
    return trusted(spaces, Matrix::Identity(d, d));
  }

  static HermitianOperator zero(const SpaceList& spaces) {
    auto d = static_cast<Eigen::Index>(spaces.total_dim());
    return trusted(spaces, Matrix::Zero(d, d));
  }

  static HermitianOperator diagonal(const SpaceList& spaces, const std::vector<double>& diag) {
    if (diag.size() != spaces.total_dim()) throw InputError("diagonal length does not match dimension");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(diag.size()), static_cast<Eigen::Index>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
    return trusted(spaces, std::move(m));
  }

  /// |v><v| for a (not necessarily normalized) vector.
  static HermitianOperator projector(const SpaceList& spaces, const Eigen::VectorXcd& v) {
    if (static_cast<std::size_t>(v.size()) != spaces.total_dim()) throw InputError("vector length does not match dimension");
    return HermitianOperator(spaces, v * v.adjoint());
  }

  const SpaceList& spaces() const { return spaces_; }
  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double trace() const { return m_.trace().real(); }

  HermitianOperator& operator+=(const HermitianOperator& o);
  HermitianOperator& operator-=(const HermitianOperator& o);
  HermitianOperator& operator*=(double s) {
    m_ *= s;
    return *this;
  }

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }

 private:
  void check_shape() const {
    auto d = spaces_.total_dim();
    if (d > kMaxDimension)
      throw InputError("total dimension " + std::to_string(d) + " exceeds the cap of " + std::to_string(kMaxDimension));
    if (static_cast<std::size_t>(m_.rows()) != d || static_cast<std::size_t>(m_.cols()) != d)
      throw InputError("matrix is " + std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()) +
                       " but spaces " + describe(spaces_) + " need " + std::to_string(d));
  }

  SpaceList spaces_;
  Matrix m_;
};

namespace detail {

/// Map from flat index in `to` order to flat index in `from` order.
inline std::vector<Eigen::Index> permutation_map(const SpaceList& from, const SpaceList& to) {
  const std::size_t m = to.size();
  std::vector<std::size_t> pos(m);
  for (std::size_t k = 0; k < m; ++k) pos[k] = from.index_of(to[k].label);
  // Strides of each factor in the `from` layout (row-major, first factor slowest).
  std::vector<std::size_t> from_stride(from.size(), 1);
  for (std::size_t i = from.size(); i-- > 1;) from_stride[i - 1] = from_stride[i] * from[i].dim;

  const std::size_t total = to.total_dim();
  std::vector<Eigen::Index> map(total);
  std::vector<std::size_t> digit(m, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t old = 0;
    for (std::size_t k = 0; k < m; ++k) old += digit[k] * from_stride[pos[k]];
    map[flat] = static_cast<Eigen::Index>(old);
    for (std::size_t k = m; k-- > 0;) {
      if (++digit[k] < to[k].dim) break;
      digit[k] = 0;
    }
  }
  return map;
}

inline Matrix permute_matrix(const Matrix& a, const std::vector<Eigen::Index>& map) {
  const auto d = static_cast<Eigen::Index>(map.size());
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) out(i, j) = a(map[i], map[j]);
  return out;
}

/// Kronecker product of plain matrices.
inline Matrix kron_matrix(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}

inline void require_same_set(const SpaceList& a, const SpaceList& b, const char* what) {
  if (!a.same_set(b))
    throw InputError(std::string(what) + ": space mismatch " + describe(a) + " vs " + describe(b));
}

}  // namespace detail

/// Reorders tensor factors; `new_order` must be a permutation of the labels.
inline HermitianOperator permute_systems(const HermitianOperator& a, const std::vector<std::string>& new_order) {
  if (new_order.size() != a.spaces().size()) throw InputError("permute_systems: not a permutation of the labels");
  SpaceList target = a.spaces().select(new_order);  // throws on unknown or duplicate labels
  if (target == a.spaces()) return a;
  auto map = detail::permutation_map(a.spaces(), target);
  return HermitianOperator::trusted(std::move(target), detail::permute_matrix(a.matrix(), map));
}

/// Permutes `a` into the factor order of `target` (same label set).
inline HermitianOperator align(const HermitianOperator& a, const SpaceList& target) {
  detail::require_same_set(a.spaces(), target, "align");
  return permute_systems(a, target.labels());
}

inline HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  if (o.spaces_ == spaces_) {
    m_ += o.m_;
  } else {
    m_ += align(o, spaces_).m_;
  }
  return *this;
}

inline HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
  if (o.spaces_ == spaces_) {
    m_ -= o.m_;
  } else {
    m_ -= align(o, spaces_).m_;
  }
  return *this;
}

inline HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
  for (const auto& s : b.spaces())
    if (a.spaces().contains(s.label)) throw InputError("kron: label '" + s.label + "' appears in both factors");
  SpaceList spaces = concat(a.spaces(), b.spaces());
  if (spaces.total_dim() > kMaxDimension)
    throw InputError("kron: result dimension " + std::to_string(spaces.total_dim()) + " exceeds cap");
  return HermitianOperator::trusted(std::move(spaces), detail::kron_matrix(a.matrix(), b.matrix()));
}

/// Tensor product of a list of factors, left to right.
inline HermitianOperator kron_all(const std::vector<HermitianOperator>& factors) {
  if (factors.empty()) throw InputError("kron_all: empty factor list");
  HermitianOperator out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

namespace detail {

/// Partial trace of a general (not necessarily Hermitian) matrix laid out on `spaces`.
inline Matrix partial_trace_matrix(const Matrix& m, const SpaceList& spaces, const std::vector<std::string>& traced) {
  SpaceList keep = spaces.without(traced);
  SpaceList gone = spaces.select(traced);
  auto map = permutation_map(spaces, concat(keep, gone));
  const auto dk = static_cast<Eigen::Index>(keep.total_dim());
  const auto dt = static_cast<Eigen::Index>(gone.total_dim());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index j = 0; j < dk; ++j)
    for (Eigen::Index i = 0; i < dk; ++i) {
      Complex acc = 0;
      for (Eigen::Index t = 0; t < dt; ++t) acc += m(map[i * dt + t], map[j * dt + t]);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace detail

inline HermitianOperator partial_trace(const HermitianOperator& a, const std::vector<std::string>& traced) {
  for (const auto& l : traced) a.spaces().index_of(l);
  if (traced.empty()) return a;
  return HermitianOperator::trusted(a.spaces().without(traced),
                                    detail::partial_trace_matrix(a.matrix(), a.spaces(), traced));
}

/// `a` tensored with the identity on every label of `target` it lacks,
/// returned in `target`'s factor order.
inline HermitianOperator embed(const HermitianOperator& a, const SpaceList& target) {
  for (const auto& s : a.spaces()) {
    if (!target.contains(s.label) || target.dim_of(s.label) != s.dim)
      throw InputError("embed: " + describe(a.spaces()) + " is not part of " + describe(target));
  }
  SpaceList missing = target.without(a.spaces().labels());
  if (missing.empty()) return align(a, target);
  return align(kron(a, HermitianOperator::identity(missing)), target);
}

/// Hilbert-Schmidt inner product <A, B> = Tr(A^* B), real for Hermitian inputs.
inline double inner(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.spaces() == b.spaces()) return (a.matrix().conjugate().cwiseProduct(b.matrix())).sum().real();
  return inner(a, align(b, a.spaces()));
}

/// Renames labels by appending a suffix to each.
inline HermitianOperator relabel(const HermitianOperator& a, const std::string& suffix) {
  return HermitianOperator::trusted(a.spaces().suffixed(suffix), a.matrix());
}

/// Ascending eigenvalues.
inline RealVector eigenvalues(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return es.eigenvalues();
}

inline double min_eigenvalue(const HermitianOperator& a) { return eigenvalues(a)(0); }

inline double max_eigenvalue(const HermitianOperator& a) {
  auto ev = eigenvalues(a);
  return ev(ev.size() - 1);
}

inline bool is_psd(const HermitianOperator& a, double tol = kDensityTolerance) { return min_eigenvalue(a) >= -tol; }

/// Spectral norm.
inline double operator_norm(const HermitianOperator& a) {
  auto ev = eigenvalues(a);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Applies f to the spectrum: U f(D) U^*.
template <class F>
HermitianOperator spectral_map(const HermitianOperator& a, F f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  RealVector mapped = es.eigenvalues().unaryExpr(f);
  const Matrix& u = es.eigenvectors();
  return HermitianOperator(a.spaces(), u * mapped.cast<Complex>().asDiagonal() * u.adjoint());
}

/// Square root of a PSD operator; eigenvalues below -tol are an error.
inline HermitianOperator sqrt_psd(const HermitianOperator& a, double tol = kDensityTolerance) {
  double lo = min_eigenvalue(a);
  if (lo < -tol) throw DomainError("sqrt_psd: eigenvalue " + std::to_string(lo) + " is negative");
  return spectral_map(a, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

/// Zeroes every off-diagonal entry (the completely dephasing channel).
inline HermitianOperator dephase(const HermitianOperator& a) {
  Matrix d = a.matrix().diagonal().real().cast<Complex>().asDiagonal();
  return HermitianOperator::trusted(a.spaces(), std::move(d));
}

inline bool is_diagonal(const HermitianOperator& a, double tol = 1e-12) {
  const Matrix& m = a.matrix();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && std::abs(m(i, j)) > tol) return false;
  return true;
}

/// F(P, Q) = || sqrt(P) sqrt(Q) ||_1, evaluated as Tr sqrt(sqrt(P) Q sqrt(P)).
inline double fidelity(const HermitianOperator& p, const HermitianOperator& q, double tol = kDensityTolerance) {
  detail::require_same_set(p.spaces(), q.spaces(), "fidelity");
  if (min_eigenvalue(p) < -tol || min_eigenvalue(q) < -tol)
    throw DomainError("fidelity: argument has a negative eigenvalue beyond tolerance");
  HermitianOperator sp = sqrt_psd(p, tol);
  Matrix inner_m = sp.matrix() * align(q, p.spaces()).matrix() * sp.matrix();
  HermitianOperator mid(p.spaces(), 0.5 * (inner_m + inner_m.adjoint()));
  auto ev = eigenvalues(mid);
  double f = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) f += std::sqrt(std::max(ev(i), 0.0));
  return f;
}

/// Positive semidefinite operator with unit trace.
class DensityOperator {
 public:
  explicit DensityOperator(HermitianOperator op, double tol = kDensityTolerance) : op_(std::move(op)) {
    double t = op_.trace();
    if (std::abs(t - 1.0) > tol) throw InputError("density operator has trace " + std::to_string(t));
    double lo = min_eigenvalue(op_);
    if (lo < -tol) throw InputError("density operator has eigenvalue " + std::to_string(lo));
  }

  static DensityOperator pure(const SpaceList& spaces, const Eigen::VectorXcd& psi) {
    return DensityOperator(HermitianOperator::projector(spaces, psi / psi.norm()));
  }

  static DensityOperator maximally_mixed(const SpaceList& spaces) {
    return DensityOperator(HermitianOperator::identity(spaces) * (1.0 / static_cast<double>(spaces.total_dim())));
  }

  const HermitianOperator& op() const { return op_; }
  const SpaceList& spaces() const { return op_.spaces(); }
  const Matrix& matrix() const { return op_.matrix(); }
  operator const HermitianOperator&() const { return op_; }

 private:
  HermitianOperator op_;
};

}  // namespace qhedge
