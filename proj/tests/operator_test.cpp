#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

namespace qhedge {
namespace {

using testing::random_channel;
using testing::random_density;
using testing::random_psd;
using testing::Rng;

const SpaceList kA{{"A", 2}};
const SpaceList kB{{"B", 3}};

double max_diff(const HermitianOperator& a, const HermitianOperator& b) {
  return (a.matrix() - align(b, a.spaces()).matrix()).cwiseAbs().maxCoeff();
}

TEST(Operator, RejectsNonHermitianAndBadShape) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(HermitianOperator(kA, m), InputError);
  EXPECT_THROW(HermitianOperator(kA, Matrix::Identity(3, 3)), InputError);
  EXPECT_THROW((SpaceList{{"A", 2}, {"A", 2}}), InputError);
  EXPECT_THROW((SpaceList{{"A", 0}}), InputError);
}

TEST(Operator, AbsorbsTinyHermitianDrift) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = Complex(1e-14, 0);
  HermitianOperator a(kA, m);
  EXPECT_EQ(a.matrix(), a.matrix().adjoint());
}

TEST(Operator, DimensionCap) {
  SpaceList big{{"A", 16}, {"B", 17}};
  EXPECT_THROW(HermitianOperator::identity(big), InputError);
}

TEST(Operator, MinEigenvalueExamples) {
  EXPECT_DOUBLE_EQ(min_eigenvalue(HermitianOperator::identity(kA)), 1.0);
  EXPECT_NEAR(min_eigenvalue(HermitianOperator::diagonal(kA, {3.0, -2.0})), -2.0, 1e-15);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_GE(min_eigenvalue(random_psd(rng, kB)), -1e-12);
  EXPECT_TRUE(is_psd(HermitianOperator::diagonal(kA, {1.0, -1e-11})));
  EXPECT_FALSE(is_psd(HermitianOperator::diagonal(kA, {1.0, -1e-9})));
}

TEST(Operator, PartialTraceOfProductFactorizes) {
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    HermitianOperator a = random_psd(rng, kA);
    HermitianOperator b = random_psd(rng, kB);
    HermitianOperator ab = kron(a, b);
    EXPECT_LT(max_diff(partial_trace(ab, {"B"}), b.trace() * a), 1e-12);
    EXPECT_LT(max_diff(partial_trace(ab, {"A"}), a.trace() * b), 1e-12);
  }
}

TEST(Operator, PartialTraceOfMaximallyEntangledState) {
  SpaceList xz{{"X", 2}, {"Z", 2}};
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(4);
  u(0) = u(3) = 1.0 / std::sqrt(2.0);
  HermitianOperator r = partial_trace(HermitianOperator::projector(xz, u), {"X"});
  EXPECT_LT(max_diff(r, 0.5 * HermitianOperator::identity(SpaceList{{"Z", 2}})), 1e-15);
}

TEST(Operator, PartialTraceErrors) {
  EXPECT_THROW(partial_trace(HermitianOperator::identity(kA), {"Q"}), InputError);
}

TEST(Operator, PartialTraceProperties) {
  Rng rng(3);
  SpaceList abc{{"A", 2}, {"B", 3}, {"C", 2}};
  for (int i = 0; i < 20; ++i) {
    HermitianOperator h = random_psd(rng, abc) - random_psd(rng, abc);
    for (const std::vector<std::string>& s : std::vector<std::vector<std::string>>{{"A"}, {"B"}, {"C"}, {"A", "C"}, {"C", "B"}})
      EXPECT_NEAR(partial_trace(h, s).trace(), h.trace(), 1e-12 * std::max(1.0, std::abs(h.trace())));
    HermitianOperator two = partial_trace(partial_trace(h, {"B"}), {"A", "C"});
    HermitianOperator one = partial_trace(h, {"A", "B", "C"});
    EXPECT_NEAR(two.trace(), one.trace(), 1e-11);
    EXPECT_LT(max_diff(partial_trace(partial_trace(h, {"A"}), {"C"}), partial_trace(h, {"C", "A"})), 1e-12);
  }
}

TEST(Operator, PermuteSystems) {
  Rng rng(4);
  HermitianOperator a = random_psd(rng, kA);
  HermitianOperator b = random_psd(rng, kB);
  HermitianOperator ab = kron(a, b);
  EXPECT_EQ(permute_systems(ab, {"A", "B"}).matrix(), ab.matrix());
  HermitianOperator ba = permute_systems(ab, {"B", "A"});
  EXPECT_LT((ba.matrix() - kron(b, a).matrix()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(permute_systems(ba, {"A", "B"}).matrix(), ab.matrix());
  EXPECT_THROW(permute_systems(ab, {"A"}), InputError);
  EXPECT_THROW(permute_systems(ab, {"A", "A"}), InputError);

  SpaceList abc{{"A", 2}, {"B", 3}, {"C", 2}};
  HermitianOperator h = random_psd(rng, abc) - random_psd(rng, abc);
  RealVector e0 = eigenvalues(h);
  RealVector e1 = eigenvalues(permute_systems(h, {"C", "A", "B"}));
  EXPECT_LT((e0 - e1).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Operator, KronMonotonicity) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    HermitianOperator b = random_psd(rng, kA);
    HermitianOperator a = b + random_psd(rng, kA, 1);
    HermitianOperator d = random_psd(rng, kB);
    HermitianOperator c = d + random_psd(rng, kB, 1);
    EXPECT_GE(min_eigenvalue(kron(a, c) - kron(b, d)), -1e-10);
  }
}

TEST(Operator, EmbedAndInner) {
  Rng rng(6);
  HermitianOperator a = random_psd(rng, kA);
  SpaceList ba{{"B", 3}, {"A", 2}};
  HermitianOperator e = embed(a, ba);
  EXPECT_LT(max_diff(e, kron(HermitianOperator::identity(kB), a)), 1e-14);
  EXPECT_NEAR(inner(e, HermitianOperator::identity(ba)), 3 * a.trace(), 1e-12);
  EXPECT_THROW(embed(a, kB), InputError);
}

TEST(Operator, Dephase) {
  HermitianOperator d = HermitianOperator::diagonal(kA, {0.3, 0.7});
  EXPECT_EQ(dephase(d).matrix(), d.matrix());
  Matrix m(2, 2);
  m << 1.0, Complex(0, 1), Complex(0, -1), 1.0;
  EXPECT_LT(max_diff(dephase(HermitianOperator(kA, m)), HermitianOperator::identity(kA)), 1e-15);
  Rng rng(7);
  HermitianOperator r = random_psd(rng, kB);
  HermitianOperator once = dephase(r);
  EXPECT_TRUE(is_diagonal(once));
  EXPECT_EQ(dephase(once).matrix(), once.matrix());
  EXPECT_NEAR(once.trace(), r.trace(), 1e-12);
  EXPECT_GE(min_eigenvalue(once), 0.0);
}

TEST(Operator, FidelityExamples) {
  Rng rng(8);
  DensityOperator rho = random_density(rng, kB);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);

  const double c = std::cos(std::numbers::pi / 8), s = std::sin(std::numbers::pi / 8);
  HermitianOperator q = HermitianOperator::diagonal(kA, {c * c, s * s});
  HermitianOperator r = HermitianOperator::diagonal(kA, {0.5, 0.5});
  double f = fidelity(q, r);
  EXPECT_NEAR(f * f, c * c, 1e-12);

  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(2), e1 = Eigen::VectorXcd::Zero(2);
  e0(0) = e1(1) = 1.0;
  EXPECT_NEAR(fidelity(HermitianOperator::projector(kA, e0), HermitianOperator::projector(kA, e1)), 0.0, 1e-12);
  EXPECT_THROW(fidelity(HermitianOperator::diagonal(kA, {1, -1}), r), DomainError);
}

TEST(Operator, FidelityBoundsSymmetryAndMonotonicity) {
  Rng rng(9);
  SpaceList ab{{"A", 2}, {"B", 3}};
  for (int i = 0; i < 30; ++i) {
    HermitianOperator p = random_psd(rng, ab);
    HermitianOperator q = random_psd(rng, ab);
    double f = fidelity(p, q);
    EXPECT_GE(f, -1e-12);
    EXPECT_LE(f, std::sqrt(p.trace() * q.trace()) + 1e-9);
    EXPECT_NEAR(f, fidelity(q, p), 1e-8);
    EXPECT_GE(fidelity(partial_trace(p, {"B"}), partial_trace(q, {"B"})), f - 1e-8);
  }
}

TEST(Density, Validation) {
  EXPECT_THROW(DensityOperator(HermitianOperator::identity(kA)), InputError);
  EXPECT_THROW(DensityOperator(HermitianOperator::diagonal(kA, {1.5, -0.5})), InputError);
  EXPECT_NEAR(DensityOperator::maximally_mixed(kB).op().trace(), 1.0, 1e-15);
}

TEST(Channel, ChoiOfIdentityAndDephasing) {
  HermitianOperator j = choi(KrausChannel::identity(kA, SpaceList{{"A'", 2}}));
  Matrix expect = Matrix::Zero(4, 4);
  for (int a : {0, 3})
    for (int b : {0, 3}) expect(a, b) = 1.0;
  EXPECT_LT((j.matrix() - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(j.trace(), 2.0, 1e-15);
  HermitianOperator d = choi(KrausChannel::dephasing(kA, SpaceList{{"A'", 2}}));
  EXPECT_LT((d.matrix() - HermitianOperator::diagonal(d.spaces(), {1, 0, 0, 1}).matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Channel, RejectsNonTracePreservingKraus) {
  EXPECT_THROW(KrausChannel(kA, kA, {2.0 * Matrix::Identity(2, 2)}), InputError);
  EXPECT_THROW(KrausChannel(kA, kA, {Matrix::Identity(3, 3)}), InputError);
  EXPECT_THROW(KrausChannel(kA, kA, {}), InputError);
}

TEST(Channel, RandomChoiIsPsdAndTracePreserving) {
  Rng rng(10);
  SpaceList out{{"O", 3}};
  for (int i = 0; i < 100; ++i) {
    KrausChannel ch = random_channel(rng, kA, out, 1 + static_cast<std::size_t>(i % 3));
    HermitianOperator j = choi(ch);
    EXPECT_GE(min_eigenvalue(j), -1e-10);
    EXPECT_LT(max_diff(partial_trace(j, {"O"}), HermitianOperator::identity(kA)), 1e-10);
  }
}

TEST(Channel, ChoiOfTensorProduct) {
  Rng rng(11);
  SpaceList a{{"A", 2}}, ao{{"AO", 2}}, b{{"B", 2}}, bo{{"BO", 3}};
  for (int i = 0; i < 10; ++i) {
    KrausChannel f = random_channel(rng, a, ao), g = random_channel(rng, b, bo);
    HermitianOperator joint = choi(tensor(f, g));
    EXPECT_LT(max_diff(joint, kron(choi(f), choi(g))), 1e-12);
  }
}

TEST(Channel, ApplyChannelExamples) {
  Rng rng(12);
  SpaceList ab{{"A", 2}, {"B", 3}};
  DensityOperator rho = random_density(rng, ab);
  DensityOperator same = apply_channel(KrausChannel::identity(kA, SpaceList{{"A", 2}}), rho, {"A"});
  EXPECT_LT(max_diff(same.op(), rho.op()), 1e-14);
  DensityOperator deph = apply_channel(KrausChannel::dephasing(ab, ab), rho, {"A", "B"});
  EXPECT_LT(max_diff(deph.op(), dephase(rho.op())), 1e-14);
  EXPECT_THROW(apply_channel(KrausChannel::identity(kB, kB), rho, {"A"}), InputError);
}

TEST(Channel, PhaseFlipOnTwoCopyState) {
  // Two copies of u = (|00>+|11>)/sqrt 2 on (X#m, Z#m); flip |00> on X#0 X#1.
  // With v = cos|00> + sin|11> and w = sin|00> - cos|11>, the result has
  // amplitude 1/sqrt 2 on each of v(x)w and w(x)v and nothing on v(x)v.
  SpaceList s{{"X#0", 2}, {"X#1", 2}, {"Z#0", 2}, {"Z#1", 2}};
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(16);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) psi(a * 8 + b * 4 + a * 2 + b) = 0.5;
  DensityOperator out = apply_channel(hedging::phase_flip(), DensityOperator::pure(s, psi), {"X#0", "X#1"});
  SpaceList t{{"Y#0", 2}, {"Y#1", 2}, {"Z#0", 2}, {"Z#1", 2}};
  const double c = hedging::kCos, sn = hedging::kSin;
  const double v[2] = {c, sn}, w[2] = {sn, -c};
  auto product = [&](const double* f, const double* g) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(16);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) x(a * 8 + b * 4 + a * 2 + b) = f[a] * g[b];
    return HermitianOperator::projector(t, x);
  };
  EXPECT_NEAR(std::sqrt(inner(product(v, w), out.op())), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::sqrt(inner(product(w, v), out.op())), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(inner(product(v, v), out.op()), 0.0, 1e-14);
  EXPECT_NEAR(out.op().trace(), 1.0, 1e-14);
}

}  // namespace
}  // namespace qhedge
