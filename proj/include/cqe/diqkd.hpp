#pragma once

// Device-independent QKD with independent measurements: CHSH operator
// decomposition, winning-frequency to phase-error conversion, finite-key
// length, and a Born-rule CHSH game simulator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "cqe/bounds.hpp"
#include "cqe/error.hpp"
#include "cqe/qmath.hpp"
#include "cqe/report.hpp"

namespace cqe {

inline const double kTsirelsonWinProb = (2.0 + std::numbers::sqrt2) / 4.0;
inline constexpr double kClassicalWinProb = 0.75;

struct MeasurementAngles {
  double alpha = 0.0;
  double beta = 0.0;
};

struct ChshDecomposition {
  double lambda_plus = 0.5;
  double lambda_minus = 0.5;
};

/// Bell-diagonal weights (l00, l10, l01, l11); index i + 2j as in Phi_{i,j}.
struct SingleRoundSpectrum {
  double l00 = 1.0;
  double l10 = 0.0;
  double l01 = 0.0;
  double l11 = 0.0;

  void validate() const {
    for (double v : {l00, l10, l01, l11})
      detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidDistribution, "negative spectrum weight");
    detail::require(std::abs(l00 + l10 + l01 + l11 - 1.0) <= 1e-9, ErrorCode::InvalidDistribution,
                    "spectrum must sum to 1");
  }

  /// Werner-like spectrum (1 - 3q/4, q/4, q/4, q/4).
  static SingleRoundSpectrum depolarized(double q) { return {1.0 - 0.75 * q, 0.25 * q, 0.25 * q, 0.25 * q}; }
};

struct DiqkdParams {
  std::int64_t n = 0;  // key rounds per setting pair; 4n key bits in total
  std::int64_t k = 0;  // test rounds per setting pair
  double omega = 0.0;  // observed CHSH winning frequency
  double leak_ec = 0.0;
  FailureBudget budget = FailureBudget::from_test_and_generation(1e-10, 1e-10, 1e-15);

  void validate() const {
    detail::require(n >= 1 && k >= 1, ErrorCode::Validation, "n and k must be at least 1");
    detail::require(omega >= 0.0 && omega <= 1.0, ErrorCode::Validation, "omega must lie in [0, 1]");
    detail::require(std::isfinite(leak_ec) && leak_ec >= 0.0, ErrorCode::Validation, "leak_ec must be non-negative");
  }
};

/// Lambda_{+-} = (1 +- sqrt(1 - cos^2(2 alpha) sin^2(2 beta))) / 2.
inline ChshDecomposition chsh_decompose(const MeasurementAngles& a) {
  const double c = std::cos(2.0 * a.alpha), s = std::sin(2.0 * a.beta);
  const double root = std::sqrt(std::max(0.0, 1.0 - c * c * s * s));
  return {0.5 * (1.0 + root), 0.5 * (1.0 - root)};
}

namespace pauli {

inline ComplexMatrix I() { return ComplexMatrix::identity(2); }
inline ComplexMatrix X() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix Y() { return ComplexMatrix{{0.0, cplx(0.0, -1.0)}, {cplx(0.0, 1.0), 0.0}}; }
inline ComplexMatrix Z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }

}  // namespace pauli

/// The four dichotomic observables A0, A1, B0, B1 in the x-z plane.
struct ChshObservables {
  ComplexMatrix a0, a1, b0, b1;

  explicit ChshObservables(const MeasurementAngles& ang) {
    const double ca = std::cos(ang.alpha), sa = std::sin(ang.alpha);
    const double cb = std::cos(ang.beta), sb = std::sin(ang.beta);
    a0 = pauli::Z() * cplx(ca) + pauli::X() * cplx(sa);
    a1 = pauli::X() * cplx(ca) + pauli::Z() * cplx(sa);
    b0 = pauli::Z() * cplx(cb) + pauli::X() * cplx(sb);
    b1 = pauli::Z() * cplx(cb) - pauli::X() * cplx(sb);
  }

  const ComplexMatrix& alice(int setting) const { return setting == 0 ? a0 : a1; }
  const ComplexMatrix& bob(int setting) const { return setting == 0 ? b0 : b1; }
};

/// S = (A0 B0 + A0 B1 + A1 B0 - A1 B1) / 4 on two qubits.
inline ComplexMatrix chsh_operator(const MeasurementAngles& ang) {
  const ChshObservables o(ang);
  ComplexMatrix s = kron(o.a0, o.b0) + kron(o.a0, o.b1) + kron(o.a1, o.b0) - kron(o.a1, o.b1);
  return s * cplx(0.25);
}

/// Winning frequency from Bell-measurement frequencies in the frame where
/// S = (sqrt(L+) Z~Z~ + sqrt(L-) X~X~) / 2.
inline double winning_freq(const SingleRoundSpectrum& f, const ChshDecomposition& dec) {
  f.validate();
  const double zz = f.l00 - f.l11 + f.l10 - f.l01;
  const double xx = f.l00 - f.l11 - f.l10 + f.l01;
  const double w = 0.25 * (2.0 + std::sqrt(dec.lambda_plus) * zz + std::sqrt(dec.lambda_minus) * xx);
  return std::clamp(w, 0.0, 1.0);
}

/// Upper bound on the phase-error frequency given a CHSH winning frequency:
/// (1 - sqrt(16 w (w - 1) + 3)) / 2 above the classical value 3/4, and 1/2
/// (no key) at or below it. Values at or above Tsirelson (to 1e-12 in the
/// under-root) map to 0.
inline double phase_error_from_omega(double omega_hat) {
  detail::require_unit_interval(omega_hat, "omega_hat must lie in [0, 1]");
  if (omega_hat <= kClassicalWinProb) return 0.5;
  const double t = 4.0 * omega_hat - 2.0;
  const double under = t * t - 1.0;  // = 16 w (w - 1) + 3
  if (under <= 0.0) return 0.5;
  if (under >= 1.0 - 1e-12) return 0.0;
  return std::clamp(0.5 * (1.0 - std::sqrt(under)), 0.0, 0.5);
}

/// w_hat = w - mu(k, eps_t) - delta(n, k, eps_g), clamped to [0, 1].
template <class Concentration = SerflingChsh>
double omega_hat(const DiqkdParams& p, Concentration conc = {}) {
  p.validate();
  const double mu = chsh_statistical_penalty(p.k, p.budget.eps_t());
  return std::clamp(p.omega - mu - conc(p.n, p.k, p.budget.eps_g()), 0.0, 1.0);
}

/// ell = floor(4n [1 - h(phase(w_hat))] - leak_EC - log2(2 / (eps_sec^2 eps_cor))), at least 0.
template <class Concentration = SerflingChsh>
KeyRateReport diqkd_key_length(const DiqkdParams& p, Concentration conc = {}) {
  const double w_hat = omega_hat(p, conc);
  const double phase = phase_error_from_omega(w_hat);
  const auto& b = p.budget;
  const double raw = 4.0 * static_cast<double>(p.n);
  const double hmin = raw * (1.0 - binary_entropy(phase));
  const double log_term = std::log2(2.0 / (b.eps_sec() * b.eps_sec() * b.eps_cor()));
  const double rhs = hmin - p.leak_ec - log_term;
  const auto ell = static_cast<std::int64_t>(std::clamp(std::floor(rhs), 0.0, raw));
  const double hmin_after_ec = hmin - p.leak_ec - std::log2(2.0 / b.eps_cor());

  KeyRateReport r;
  r.hmin_smooth = hmin;
  r.e_hat = phase;
  r.ell = ell;
  r.delta_sec = secrecy_delta(ell, hmin_after_ec, b.eps_smooth());
  r.raw_bits = 4 * p.n;
  r.terms = {
      {"omega", p.omega},
      {"omega_hat", w_hat},
      {"chsh_penalty", chsh_statistical_penalty(p.k, b.eps_t())},
      {"statistical_deviation", conc(p.n, p.k, b.eps_g())},
      {"phase_error", phase},
      {"binary_entropy_phase", binary_entropy(phase)},
      {"leak_ec", p.leak_ec},
      {"log_term", log_term},
      {"rhs", rhs},
      {"hmin_after_ec", hmin_after_ec},
      {"eps_smooth", b.eps_smooth()},
      {"eps_t", b.eps_t()},
      {"eps_g", b.eps_g()},
      {"eps_sec", b.eps_sec()},
      {"eps_cor", b.eps_cor()},
  };
  return r;
}

/// 1 - log2 (sqrt(l00 + l11) + sqrt(l10 + l01))^2 for one key round.
inline double single_round_hmin(const SingleRoundSpectrum& s) {
  s.validate();
  const double g = std::sqrt(s.l00 + s.l11) + std::sqrt(s.l10 + s.l01);
  return std::clamp(1.0 - std::log2(g * g), 0.0, 1.0);
}

/// Two-qubit state diagonal in the Bell basis of the frame that puts S in
/// the form (sqrt(L+) Z~Z~ + sqrt(L-) X~X~) / 2.
///
/// The frame comes from the singular value decomposition of the x-z
/// correlation matrix T_ab = Tr[S sigma_a sigma_b] / 2 of the assembled
/// operator; Bell states are the joint eigenvectors of Z~Z~ and X~X~.
inline ComplexMatrix bell_diagonal_state(const SingleRoundSpectrum& f, const MeasurementAngles& ang) {
  f.validate();
  const ComplexMatrix s = chsh_operator(ang);
  const std::array<ComplexMatrix, 2> axes{pauli::X(), pauli::Z()};
  double t[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) t[a][b] = 0.5 * std::real(trace_of_product(s, kron(axes[a], axes[b])));

  // Right singular vectors from T^T T.
  const double m00 = t[0][0] * t[0][0] + t[1][0] * t[1][0];
  const double m01 = t[0][0] * t[0][1] + t[1][0] * t[1][1];
  const double m11 = t[0][1] * t[0][1] + t[1][1] * t[1][1];
  const EigDecomposition e = eig_hermitian(ComplexMatrix{{m00, m01}, {m01, m11}});
  std::array<std::array<double, 2>, 2> v{}, u{};
  for (int k = 0; k < 2; ++k) {
    const int col = 1 - k;  // largest singular value first
    v[k] = {e.eigenvectors(0, col).real(), e.eigenvectors(1, col).real()};
  }
  for (int k = 0; k < 2; ++k) {
    const double sv = std::sqrt(std::max(0.0, e.eigenvalues[1 - k]));
    const double tv0 = t[0][0] * v[k][0] + t[0][1] * v[k][1];
    const double tv1 = t[1][0] * v[k][0] + t[1][1] * v[k][1];
    if (sv > 1e-12) {
      u[k] = {tv0 / sv, tv1 / sv};
    } else {
      u[k] = {-u[0][1], u[0][0]};
    }
  }
  auto axis = [&](const std::array<double, 2>& w) { return axes[0] * cplx(w[0]) + axes[1] * cplx(w[1]); };
  const ComplexMatrix zz = kron(axis(u[0]), axis(v[0]));
  const ComplexMatrix xx = kron(axis(u[1]), axis(v[1]));

  // Joint eigenvalues (zz, xx) -> zz + 2 xx: (+,+)=3, (+,-)=-1, (-,+)=1, (-,-)=-3.
  const EigDecomposition joint = eig_hermitian(hermitian_part(zz + xx * cplx(2.0)));
  const std::array<double, 4> weight_by_rank{f.l11, f.l10, f.l01, f.l00};
  return hermitian_part(joint.reassemble([&](double l) {
    const int rank = static_cast<int>(std::lround((l + 3.0) / 2.0));
    return weight_by_rank[static_cast<std::size_t>(std::clamp(rank, 0, 3))];
  }));
}

struct ChshSimConfig {
  std::int64_t n_rounds = 0;    // test rounds
  std::int64_t key_rounds = 0;  // optional key rounds, both sides measuring A0
  SingleRoundSpectrum spectrum;
  MeasurementAngles angles;
  std::uint64_t seed = 0;
};

struct ChshObservation {
  std::int64_t rounds = 0;
  std::int64_t wins = 0;
  double omega = 0.0;
  std::array<std::int64_t, 4> rounds_by_setting{};  // index 2 kappa_a + kappa_b
  std::array<std::int64_t, 4> wins_by_setting{};
  std::int64_t key_rounds = 0;
  std::int64_t key_errors = 0;
  double qber = 0.0;
};

/// Outcome distribution P(x, y), index 2x + y, for A (x) B on rho; bit 1 is
/// eigenvalue +1.
inline std::array<double, 4> joint_outcome_probs(const ComplexMatrix& rho, const ComplexMatrix& a,
                                                 const ComplexMatrix& b) {
  std::array<double, 4> p{};
  const ComplexMatrix id = ComplexMatrix::identity(2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const ComplexMatrix pa = (id + a * cplx(x == 1 ? 1.0 : -1.0)) * cplx(0.5);
      const ComplexMatrix pb = (id + b * cplx(y == 1 ? 1.0 : -1.0)) * cplx(0.5);
      p[2 * x + y] = std::max(0.0, std::real(trace_of_product(kron(pa, pb), rho)));
    }
  const double s = p[0] + p[1] + p[2] + p[3];
  for (double& v : p) v /= s;
  return p;
}

/// CHSH rounds on i.i.d. Bell-diagonal pairs; a round is won when
/// x xor y = kappa_a kappa_b.
inline ChshObservation simulate_chsh(const ChshSimConfig& cfg) {
  detail::require(cfg.n_rounds >= 4, ErrorCode::Validation, "simulate_chsh needs at least 4 rounds");
  detail::require(cfg.key_rounds >= 0, ErrorCode::Validation, "key_rounds must be non-negative");
  const ComplexMatrix rho = bell_diagonal_state(cfg.spectrum, cfg.angles);
  const ChshObservables obs(cfg.angles);

  std::array<std::array<double, 4>, 4> dist{};
  for (int ka = 0; ka < 2; ++ka)
    for (int kb = 0; kb < 2; ++kb) dist[2 * ka + kb] = joint_outcome_probs(rho, obs.alice(ka), obs.bob(kb));
  const std::array<double, 4> key_dist = joint_outcome_probs(rho, obs.a0, obs.a0);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> setting(0, 3);
  auto draw = [&](const std::array<double, 4>& p) {
    const double r = u(rng);
    double acc = 0.0;
    for (int o = 0; o < 3; ++o) {
      acc += p[o];
      if (r < acc) return o;
    }
    return 3;
  };

  ChshObservation out;
  out.rounds = cfg.n_rounds;
  for (std::int64_t t = 0; t < cfg.n_rounds; ++t) {
    const int sidx = setting(rng);
    const int o = draw(dist[sidx]);
    const int x = o >> 1, y = o & 1;
    const int ka = sidx >> 1, kb = sidx & 1;
    const bool win = (x ^ y) == (ka & kb);
    ++out.rounds_by_setting[sidx];
    if (win) {
      ++out.wins_by_setting[sidx];
      ++out.wins;
    }
  }
  out.omega = static_cast<double>(out.wins) / static_cast<double>(out.rounds);
  out.key_rounds = cfg.key_rounds;
  for (std::int64_t t = 0; t < cfg.key_rounds; ++t) {
    const int o = draw(key_dist);
    out.key_errors += (o >> 1) != (o & 1);
  }
  out.qber = cfg.key_rounds > 0 ? static_cast<double>(out.key_errors) / static_cast<double>(cfg.key_rounds) : 0.0;
  return out;
}

}  // namespace cqe
