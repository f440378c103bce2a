#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qhedge/operator.hpp"

namespace qhedge {

inline constexpr double kTracePreservingTolerance = 1e-10;

/// Completely positive trace-preserving map in Kraus form,
/// rho -> sum_k K_k rho K_k^*, with each K_k of shape out_dim x in_dim.
class KrausChannel {
 public:
  KrausChannel(SpaceList in, SpaceList out, std::vector<Matrix> kraus)
      : in_(std::move(in)), out_(std::move(out)), kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw InputError("channel needs at least one Kraus operator");
    const auto din = static_cast<Eigen::Index>(in_.total_dim());
    const auto dout = static_cast<Eigen::Index>(out_.total_dim());
    Matrix sum = Matrix::Zero(din, din);
    for (const auto& k : kraus_) {
      if (k.rows() != dout || k.cols() != din)
        throw InputError("Kraus operator is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                         ", expected " + std::to_string(dout) + "x" + std::to_string(din));
      sum += k.adjoint() * k;
    }
    double err = (sum - Matrix::Identity(din, din)).cwiseAbs().maxCoeff();
    if (err > kTracePreservingTolerance)
      throw InputError("Kraus operators are not trace preserving (deviation " + std::to_string(err) + ")");
  }

  static KrausChannel identity(const SpaceList& in, const SpaceList& out) {
    if (in.total_dim() != out.total_dim()) throw InputError("identity channel needs equal dimensions");
    auto d = static_cast<Eigen::Index>(in.total_dim());
    return KrausChannel(in, out, {Matrix::Identity(d, d)});
  }

  static KrausChannel unitary(const SpaceList& in, const SpaceList& out, const Matrix& u) {
    return KrausChannel(in, out, {u});
  }

  /// Measures in the computational basis and forgets the result.
  static KrausChannel dephasing(const SpaceList& in, const SpaceList& out) {
    if (in.total_dim() != out.total_dim()) throw InputError("dephasing channel needs equal dimensions");
    auto d = static_cast<Eigen::Index>(in.total_dim());
    std::vector<Matrix> ks;
    for (Eigen::Index i = 0; i < d; ++i) {
      Matrix k = Matrix::Zero(d, d);
      k(i, i) = 1.0;
      ks.push_back(std::move(k));
    }
    return KrausChannel(in, out, std::move(ks));
  }

  const SpaceList& input_spaces() const { return in_; }
  const SpaceList& output_spaces() const { return out_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

 private:
  SpaceList in_;
  SpaceList out_;
  std::vector<Matrix> kraus_;
};

/// J(Phi) = sum_ij Phi(|i><j|) (x) |i><j| on output (x) input.
inline HermitianOperator choi(const KrausChannel& ch) {
  SpaceList spaces = concat(ch.output_spaces(), ch.input_spaces());
  const auto din = static_cast<Eigen::Index>(ch.input_spaces().total_dim());
  const auto dout = static_cast<Eigen::Index>(ch.output_spaces().total_dim());
  Matrix j = Matrix::Zero(din * dout, din * dout);
  for (const auto& k : ch.kraus()) {
    // |K>> = sum_i K|i> (x) |i>
    Eigen::VectorXcd vec = Eigen::VectorXcd::Zero(din * dout);
    for (Eigen::Index o = 0; o < dout; ++o)
      for (Eigen::Index i = 0; i < din; ++i) vec(o * din + i) = k(o, i);
    j += vec * vec.adjoint();
  }
  return HermitianOperator(std::move(spaces), std::move(j));
}

/// (Phi (x) 1)(rho): the channel acts on `acted` (matched positionally to its
/// input spaces); the result has the output spaces first, then the untouched
/// factors of rho in their original order.
inline DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho,
                                     const std::vector<std::string>& acted) {
  const SpaceList& in = ch.input_spaces();
  if (acted.size() != in.size())
    throw InputError("apply_channel: channel has " + std::to_string(in.size()) + " input spaces, got " +
                     std::to_string(acted.size()) + " labels");
  for (std::size_t i = 0; i < acted.size(); ++i)
    if (rho.spaces().dim_of(acted[i]) != in[i].dim)
      throw InputError("apply_channel: dimension mismatch on '" + acted[i] + "'");

  SpaceList rest = rho.spaces().without(acted);
  for (const auto& s : ch.output_spaces())
    if (rest.contains(s.label)) throw InputError("apply_channel: output label '" + s.label + "' collides");

  std::vector<std::string> order = acted;
  for (const auto& l : rest.labels()) order.push_back(l);
  const Matrix r = permute_systems(rho.op(), order).matrix();

  const auto dr = static_cast<Eigen::Index>(rest.total_dim());
  const auto dout = static_cast<Eigen::Index>(ch.output_spaces().total_dim());
  Matrix out = Matrix::Zero(dout * dr, dout * dr);
  for (const auto& k : ch.kraus()) {
    Matrix big = detail::kron_matrix(k, Matrix::Identity(dr, dr));
    out += big * r * big.adjoint();
  }
  return DensityOperator(HermitianOperator(concat(ch.output_spaces(), rest), std::move(out)));
}

/// Phi_1 (x) Phi_2 acting on the concatenated spaces.
inline KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  std::vector<Matrix> ks;
  for (const auto& x : a.kraus())
    for (const auto& y : b.kraus()) ks.push_back(detail::kron_matrix(x, y));
  return KrausChannel(concat(a.input_spaces(), b.input_spaces()), concat(a.output_spaces(), b.output_spaces()),
                      std::move(ks));
}

}  // namespace qhedge
