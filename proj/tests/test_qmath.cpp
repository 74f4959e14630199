#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cqe/qmath.hpp"
#include "cqe/random.hpp"

using namespace cqe;

namespace {

const ComplexMatrix kSigmaX{{0.0, 1.0}, {1.0, 0.0}};
const ComplexMatrix kSigmaZ{{1.0, 0.0}, {0.0, -1.0}};

double orthonormality_error(const ComplexMatrix& v) {
  const ComplexMatrix g = v.adjoint() * v;
  return g.max_abs_diff(ComplexMatrix::identity(v.dim()));
}

}  // namespace

TEST(EigHermitian, IdentityHasUnitEigenvalues) {
  const auto e = eig_hermitian(ComplexMatrix::identity(2));
  ASSERT_EQ(e.eigenvalues.size(), 2u);
  EXPECT_NEAR(e.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-14);
}

TEST(EigHermitian, PauliXSpectrumAndVectors) {
  const auto e = eig_hermitian(kSigmaX);
  EXPECT_NEAR(e.eigenvalues[0], -1.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-14);
  const double r = 1.0 / std::numbers::sqrt2;
  const CVector minus = e.column(0), plus = e.column(1);
  EXPECT_NEAR(std::abs(inner(minus, CVector{r, -r})), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(inner(plus, CVector{r, r})), 1.0, 1e-12);
}

TEST(EigHermitian, RandomSixBySixReassembles) {
  Rng rng(11);
  const ComplexMatrix m = random_hermitian(6, rng);
  const auto e = eig_hermitian(m);
  // Direct V diag(l) V^dagger without going through reassemble().
  ComplexMatrix d(6);
  for (std::size_t k = 0; k < 6; ++k) d(k, k) = e.eigenvalues[k];
  const ComplexMatrix back = e.eigenvectors * d * e.eigenvectors.adjoint();
  EXPECT_LE(back.max_abs_diff(m), 1e-8);
  EXPECT_LE(orthonormality_error(e.eigenvectors), 1e-8);
  for (std::size_t k = 1; k < 6; ++k) EXPECT_LE(e.eigenvalues[k - 1], e.eigenvalues[k]);
}

TEST(EigHermitian, ReconstructionOverThousandMatrices) {
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> dim(2, 16);
  double worst = 0.0, worst_trace = 0.0, worst_orth = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const ComplexMatrix m = random_hermitian(dim(rng), rng);
    const auto e = eig_hermitian(m);
    worst = std::max(worst, e.reassemble().max_abs_diff(m));
    worst_orth = std::max(worst_orth, orthonormality_error(e.eigenvectors));
    double s = 0.0;
    for (double l : e.eigenvalues) s += l;
    worst_trace = std::max(worst_trace, std::abs(s - std::real(m.trace())));
  }
  EXPECT_LE(worst, 1e-8);
  EXPECT_LE(worst_orth, 1e-8);
  EXPECT_LE(worst_trace, 1e-9);
}

TEST(EigHermitian, DegenerateSpectrumIsDeterministic) {
  Rng rng(5);
  const ComplexMatrix u = random_unitary(4, rng);
  const std::vector<double> vals{0.5, 0.5, -1.0, 2.0};
  const ComplexMatrix m = hermitian_part(u * ComplexMatrix::diagonal(vals) * u.adjoint());
  const auto a = eig_hermitian(m), b = eig_hermitian(m);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors.max_abs_diff(b.eigenvectors), 0.0);
  EXPECT_NEAR(a.eigenvalues[0], -1.0, 1e-10);
  EXPECT_NEAR(a.eigenvalues[3], 2.0, 1e-10);
  EXPECT_LE(a.reassemble().max_abs_diff(m), 1e-10);
}

TEST(EigHermitian, RejectsNonHermitian) {
  const ComplexMatrix m{{1.0, 1.0}, {0.0, 1.0}};
  try {
    eig_hermitian(m);
    FAIL() << "expected NotHermitian";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
}

TEST(EigHermitian, DiagonalAndZeroMatrices) {
  const std::vector<double> vals{3.0, -2.0, 0.0};
  const auto e = eig_hermitian(ComplexMatrix::diagonal(vals));
  EXPECT_DOUBLE_EQ(e.eigenvalues[0], -2.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[1], 0.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[2], 3.0);
  const auto z = eig_hermitian(ComplexMatrix::zero(3));
  for (double l : z.eigenvalues) EXPECT_EQ(l, 0.0);
}

TEST(Fidelity, SelfAndOrthogonal) {
  Rng rng(3);
  const DensityMatrix rho = random_density(3, rng);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);
  const DensityMatrix zero = DensityMatrix::pure(CVector{1.0, 0.0});
  const DensityMatrix one = DensityMatrix::pure(CVector{0.0, 1.0});
  EXPECT_NEAR(fidelity(zero, one), 0.0, 1e-9);
}

TEST(Fidelity, PureStatesMatchOverlap) {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const CVector a = random_ket(2, rng), b = random_ket(2, rng);
    const double f = fidelity(DensityMatrix::pure(a), DensityMatrix::pure(b));
    EXPECT_NEAR(f, std::abs(inner(a, b)), 1e-7);
  }
}

TEST(Fidelity, SymmetricOnRandomPairs) {
  Rng rng(19);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix a = random_density(4, rng), b = random_density(4, rng);
    EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-9);
  }
}

TEST(Fidelity, DimensionMismatchThrows) {
  EXPECT_THROW(fidelity(DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(3)), Error);
}

TEST(TraceNorm, Basics) {
  EXPECT_EQ(trace_norm(ComplexMatrix::zero(3)), 0.0);
  EXPECT_NEAR(trace_norm(kSigmaZ), 2.0, 1e-14);
}

TEST(TraceNorm, WeightedDifferenceOfQubits) {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix a = random_density(2, rng), b = random_density(2, rng);
    const ComplexMatrix diff = a.matrix() * cplx(0.3) - b.matrix() * cplx(0.7);
    // Closed form for 2x2 Hermitian: eigenvalues t/2 +- sqrt(t^2/4 - det).
    const double tr = std::real(diff.trace());
    const double det = std::real(diff(0, 0) * diff(1, 1) - diff(0, 1) * diff(1, 0));
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double expected = std::abs(tr / 2.0 + disc) + std::abs(tr / 2.0 - disc);
    EXPECT_NEAR(trace_norm(diff), expected, 1e-12);
  }
}

TEST(TraceNorm, TriangleInequality) {
  Rng rng(29);
  for (int t = 0; t < 200; ++t) {
    const ComplexMatrix a = random_hermitian(3, rng), b = random_hermitian(3, rng), c = random_hermitian(3, rng);
    EXPECT_LE(trace_norm(a - c), trace_norm(a - b) + trace_norm(b - c) + 1e-9);
  }
}

TEST(IsPsd, Basics) {
  EXPECT_TRUE(is_psd(ComplexMatrix::identity(3), 0.0));
  EXPECT_FALSE(is_psd(kSigmaZ, 1e-9));
  const std::vector<double> tiny{1.0, -5e-10};
  EXPECT_TRUE(is_psd(ComplexMatrix::diagonal(tiny), 1e-9));
  EXPECT_FALSE(is_psd(ComplexMatrix::diagonal(tiny), 1e-10));
}

TEST(DensityMatrix, ValidatesInvariants) {
  EXPECT_NO_THROW(DensityMatrix(ComplexMatrix::identity(2) * cplx(0.5)));
  EXPECT_THROW(DensityMatrix(ComplexMatrix::identity(2)), Error);
  const std::vector<double> neg{1.1, -0.1};
  EXPECT_THROW(DensityMatrix(ComplexMatrix::diagonal(neg)), Error);
  const ComplexMatrix skew{{0.5, 0.1}, {0.0, 0.5}};
  try {
    DensityMatrix d(skew);
    FAIL() << "expected NotHermitian";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
}

TEST(DensityMatrix, NoisyConstructionClipsSmallNegatives) {
  const std::vector<double> noisy{1.0 + 5e-10, -5e-10};
  const DensityMatrix d = DensityMatrix::from_noisy(ComplexMatrix::diagonal(noisy));
  EXPECT_NEAR(std::real(d.matrix()(0, 0)), 1.0, 1e-15);
  EXPECT_EQ(std::real(d.matrix()(1, 1)), 0.0);
  const std::vector<double> bad{1.1, -0.1};
  EXPECT_THROW(DensityMatrix::from_noisy(ComplexMatrix::diagonal(bad)), Error);
}

TEST(ComplexMatrix, KronAndProducts) {
  const ComplexMatrix zx = kron(kSigmaZ, kSigmaX);
  EXPECT_EQ(zx.dim(), 4u);
  EXPECT_EQ(zx(0, 1), cplx(1.0));
  EXPECT_EQ(zx(2, 3), cplx(-1.0));
  EXPECT_NEAR(std::real(trace_of_product(zx, zx)), 4.0, 1e-14);
  EXPECT_THROW(kSigmaX * ComplexMatrix::identity(3), Error);
}
