#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "cqe/minentropy.hpp"
#include "cqe/qrng.hpp"
#include "cqe/random.hpp"

using namespace cqe;

namespace {

FockDiagonalState random_source(std::size_t m_max, Rng& rng) {
  auto p = random_simplex(m_max + 1, rng);
  return FockDiagonalState(p);
}

}  // namespace

TEST(FockDiagonalState, Factories) {
  const auto vac = FockDiagonalState::fock(0);
  EXPECT_EQ(vac.m_max(), 0u);
  const auto poisson = FockDiagonalState::poisson(0.2);
  double tail = 0.0;
  for (std::size_t m = poisson.m_max() + 1; m < 60; ++m) tail += std::exp(-0.2) * std::pow(0.2, m) / std::tgamma(m + 1.0);
  EXPECT_LT(tail, kTailTol);
  EXPECT_NEAR(poisson.mean_photon_number(), 0.2, 1e-10);
  EXPECT_NEAR(FockDiagonalState::thermal(0.5).mean_photon_number(), 0.5, 1e-9);
  EXPECT_THROW(FockDiagonalState({0.5, 0.2}), Error);
  EXPECT_THROW(FockDiagonalState({0.5, 0.5}, 0.1), Error);
  EXPECT_THROW(FockDiagonalState::poisson(-1.0), Error);
}

TEST(ResidueProfile, TrivialSources) {
  const auto vac = residue_profile(FockDiagonalState::fock(0));
  EXPECT_EQ(vac.q(), (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
  const auto one = residue_profile(FockDiagonalState::fock(1));
  EXPECT_EQ(one.q(), (std::vector<double>{0.0, 1.0, 0.0, 0.0}));
  EXPECT_EQ(residue_profile(FockDiagonalState::fock(6))[2], 1.0);
}

TEST(ResidueProfile, PoissonPartialSums) {
  const double mu = 0.2;
  std::vector<double> p(41);
  for (std::size_t m = 0; m <= 40; ++m) p[m] = std::exp(-mu + m * std::log(mu) - std::lgamma(m + 1.0));
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  const auto r = residue_profile(FockDiagonalState(p));
  double s = 0.0;
  for (std::size_t y = 0; y < 4; ++y) {
    double direct = 0.0;
    for (std::size_t m = y; m <= 40; m += 4) direct += p[m];
    EXPECT_NEAR(r[y], direct, 1e-15);
    s += r[y];
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(QrngHmin, ReferenceValues) {
  EXPECT_NEAR(qrng_hmin_per_round(ResidueProfile({1.0, 0.0, 0.0, 0.0})), 2.0, 1e-15);
  EXPECT_NEAR(qrng_hmin_per_round(ResidueProfile({0.25, 0.25, 0.25, 0.25})), 0.0, 1e-15);
  EXPECT_NEAR(qrng_hmin_per_round(ResidueProfile({0.5, 0.5, 0.0, 0.0})), 1.0, 1e-15);
}

TEST(QrngHmin, MatchesReducedStateOracle) {
  Rng rng(301);
  std::uniform_int_distribution<std::size_t> mm(0, 12);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_source(mm(rng), rng);
    const auto res = reduced_state_hmin_oracle_detailed(s, 12);
    EXPECT_TRUE(res.certified);
    EXPECT_NEAR(res.hmin, qrng_hmin_per_round(residue_profile(s)), 1e-9);
  }
  const auto poisson = FockDiagonalState::poisson(0.2);
  ASSERT_LE(poisson.m_max(), 12u);
  EXPECT_NEAR(reduced_state_hmin_oracle(poisson, 12), qrng_hmin_per_round(residue_profile(poisson)), 1e-9);
}

TEST(QrngHmin, OracleRejectsBadTruncation) {
  EXPECT_THROW(reduced_cq_state(FockDiagonalState::fock(3), 17), Error);
  EXPECT_THROW(reduced_cq_state(FockDiagonalState::fock(9), 8), Error);
}

TEST(QrngHmin, DampedStatesAreNoEasierToGuess) {
  Rng rng(303);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_source(1 + t % 6, rng);
    const CQState damped = damped_reduced_state(s, 8);
    const double bound = qrng_hmin_per_round(residue_profile(s));
    const double found = povm_search(damped, 3, 500, static_cast<std::uint64_t>(t));
    EXPECT_GE(min_entropy_from_guess(found), bound - 1e-6);
  }
}

TEST(Heterodyne, UniformBins) {
  for (const auto& s : {FockDiagonalState::fock(0), FockDiagonalState::fock(1), FockDiagonalState::fock(5),
                        FockDiagonalState::thermal(0.5), FockDiagonalState::poisson(2.0)}) {
    const auto bins = heterodyne_bin_probs(s);
    ASSERT_EQ(bins.size(), 4u);
    for (double b : bins) EXPECT_NEAR(b, 0.25, 1e-10);
  }
}

TEST(Heterodyne, ThermalHusimiMonteCarlo) {
  // A thermal state with mean N has Husimi density exp(-|a|^2/(N+1)) / (pi (N+1)):
  // sample it as a complex Gaussian and bin the phase.
  const double mean = 0.5;
  std::mt19937_64 rng(305);
  std::normal_distribution<double> g(0.0, std::sqrt((mean + 1.0) / 2.0));
  std::array<int, 4> counts{};
  const int draws = 400000;
  for (int t = 0; t < draws; ++t) {
    double th = std::atan2(g(rng), g(rng));
    if (th < 0) th += 2.0 * std::numbers::pi;
    ++counts[std::min(3, static_cast<int>(th / (std::numbers::pi / 2.0)))];
  }
  const auto bins = heterodyne_bin_probs(FockDiagonalState::thermal(mean));
  for (int x = 0; x < 4; ++x)
    EXPECT_NEAR(bins[x], static_cast<double>(counts[x]) / draws, 5.0 * std::sqrt(0.1875 / draws));
  // The closed-form density agrees with the Fock expansion.
  const auto thermal = FockDiagonalState::thermal(mean);
  for (double mu : {0.0, 0.3, 1.0, 4.0})
    EXPECT_NEAR(husimi_diagonal(thermal, mu), std::exp(-mu / (mean + 1.0)) / (std::numbers::pi * (mean + 1.0)), 1e-10);
}

TEST(QHat, ReferenceValues) {
  QrngParams p;
  p.n = p.k = 100000;
  p.q_obs = 0.0;
  p.budget = FailureBudget::from_smoothing(1e-10);
  EXPECT_NEAR(q_hat(p), serfling_delta(100000, 100000, 1e-10), 1e-15);
  EXPECT_NEAR(q_hat(p), 0.02146, 1e-5);
  p.q_obs = 0.8;
  EXPECT_EQ(q_hat(p), 0.75);
  auto none = [](std::int64_t, std::int64_t, double) { return 0.0; };
  p.q_obs = 0.1;
  EXPECT_EQ(q_hat(p, none), 0.1);
}

TEST(QrngOutputLength, ChainedTerms) {
  QrngParams p;
  p.n = 1000000;
  p.k = 100000;
  p.q_obs = 0.005;
  p.budget = FailureBudget::from_eps_sec(1e-10);
  EXPECT_DOUBLE_EQ(p.budget.eps_smooth(), 2.5e-11);
  const auto r = qrng_output_length(p);
  const double qh = 0.005 + serfling_delta(1000000, 100000, 2.5e-11);
  const double rhs = 1e6 * (2.0 - quaternary_entropy(qh)) - std::log2(1.0 / 1e-20);
  EXPECT_NEAR(r.e_hat, qh, 1e-15);
  EXPECT_EQ(r.ell, static_cast<std::int64_t>(std::floor(rhs)));
  EXPECT_LE(r.hmin_smooth, 2e6);
}

TEST(QrngOutputLength, AsymptoticAndLimits) {
  EXPECT_NEAR(qrng_asymptotic_rate(0.0), 2.0 - std::log2(3.0), 1e-15);
  EXPECT_NEAR(qrng_asymptotic_rate(0.0), 0.41504, 1e-5);
  EXPECT_NEAR(qrng_asymptotic_rate(0.25), 0.0, 1e-15);
  EXPECT_NEAR(qrng_asymptotic_rate(0.75), 0.0, 1e-15);
  QrngParams p;
  p.n = p.k = 100000000;
  p.q_obs = 0.0;
  EXPECT_NEAR(qrng_output_length(p).rate(), 2.0 - std::log2(3.0), 0.1);
  p.q_obs = 0.74;
  EXPECT_EQ(qrng_output_length(p).ell, 0);
}

TEST(QrngOutputLength, MonotoneInClickFrequency) {
  QrngParams p;
  p.n = 1000000;
  p.k = 100000;
  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (int t = 0; t <= 200; ++t) {
    p.q_obs = t / 200.0;
    const auto r = qrng_output_length(p);
    EXPECT_LE(r.ell, prev);
    EXPECT_LE(r.hmin_smooth, 2.0 * static_cast<double>(p.n));
    prev = r.ell;
  }
}

TEST(SimulateQrng, SymbolsAreUniform) {
  const auto sample = simulate_qrng(QrngSimConfig{200000, 0, 401}, FockDiagonalState::poisson(0.2));
  std::array<double, 4> c{};
  for (auto x : sample.x) {
    ASSERT_LT(x, 4);
    ++c[x];
  }
  double chi2 = 0.0;
  for (double v : c) chi2 += (v - 50000.0) * (v - 50000.0) / 50000.0;
  EXPECT_LT(chi2, 16.27);  // 3 dof, p = 0.001
}

TEST(SimulateQrng, ClickFrequencies) {
  EXPECT_EQ(simulate_qrng(1000, FockDiagonalState::fock(1), 1).click_frequency, 1.0);
  EXPECT_EQ(simulate_qrng(1000, FockDiagonalState::fock(0), 1).click_frequency, 0.0);
  const int n = 200000;
  const auto s = simulate_qrng(QrngSimConfig{0, n, 403}, FockDiagonalState::poisson(0.05));
  const double p = 1.0 - std::exp(-0.05);
  EXPECT_NEAR(s.click_frequency, p, 3.0 * std::sqrt(p * (1 - p) / n));
  EXPECT_NEAR(p, 0.04877, 1e-5);
}

TEST(SimulateQrng, DeterministicGivenSeed) {
  const auto src = FockDiagonalState::thermal(0.3);
  const auto a = simulate_qrng(5000, src, 9), b = simulate_qrng(5000, src, 9);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.clicks, b.clicks);
}

TEST(Toeplitz, ExplicitMatrix) {
  // in = 3, out = 2: rows (s2 s1 s0), (s3 s2 s1).
  ToeplitzSeed seed{{1, 0, 1, 1}};
  EXPECT_EQ(toeplitz_extract({1, 0, 0}, seed, 2), (BitVector{1, 1}));
  EXPECT_EQ(toeplitz_extract({0, 1, 0}, seed, 2), (BitVector{0, 1}));
  EXPECT_EQ(toeplitz_extract({0, 0, 1}, seed, 2), (BitVector{1, 0}));
  EXPECT_TRUE(toeplitz_extract({1, 1, 1}, seed, 0).empty());
  EXPECT_EQ(toeplitz_extract({0, 0, 0}, seed, 2), (BitVector{0, 0}));
  EXPECT_THROW(toeplitz_extract({1, 0, 0}, seed, 3), Error);
}

TEST(Toeplitz, Linearity) {
  std::mt19937_64 rng(405);
  for (int t = 0; t < 200; ++t) {
    const std::size_t in = 1 + rng() % 64, out = 1 + rng() % 32;
    const auto seed = ToeplitzSeed::random(in, out, rng);
    BitVector a(in), b(in), ab(in);
    for (std::size_t j = 0; j < in; ++j) {
      a[j] = rng() & 1U;
      b[j] = rng() & 1U;
      ab[j] = a[j] ^ b[j];
    }
    const auto ya = toeplitz_extract(a, seed, out), yb = toeplitz_extract(b, seed, out);
    const auto yab = toeplitz_extract(ab, seed, out);
    for (std::size_t i = 0; i < out; ++i) ASSERT_EQ(yab[i], ya[i] ^ yb[i]);
  }
}

TEST(Toeplitz, TwoUniversalExhaustive) {
  // Linearity reduces collisions of (a, b) to T(a xor b) = 0, so checking every
  // nonzero difference over every seed covers every distinct pair.
  int worst = 0;
  for (unsigned diff = 1; diff < 256; ++diff) {
    BitVector d(8);
    for (int j = 0; j < 8; ++j) d[j] = (diff >> j) & 1U;
    int zero = 0;
    for (unsigned s = 0; s < 2048; ++s) {
      ToeplitzSeed seed;
      seed.bits.resize(11);
      for (int j = 0; j < 11; ++j) seed.bits[j] = (s >> j) & 1U;
      const auto y = toeplitz_extract(d, seed, 4);
      zero += (y[0] | y[1] | y[2] | y[3]) == 0;
    }
    worst = std::max(worst, zero);
  }
  EXPECT_LE(worst, 2048 / 16);
}

TEST(Bits, PackRoundTrip) {
  std::mt19937_64 rng(407);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 100u}) {
    BitVector b(n);
    for (auto& v : b) v = rng() & 1U;
    EXPECT_EQ(unpack_bits(pack_bits(b), n), b);
  }
  EXPECT_EQ(pack_bits({1, 0, 0, 0, 0, 0, 0, 0, 1}), (std::vector<std::uint8_t>{0x01, 0x01}));
  EXPECT_EQ(symbols_to_bits({1, 2, 3, 0}), (BitVector{1, 0, 0, 1, 1, 1, 0, 0}));
  EXPECT_THROW(unpack_bits({0xff}, 9), Error);
}
