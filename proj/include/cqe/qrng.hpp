#pragma once

// Source-independent heterodyne QRNG: truncated Fock-diagonal sources,
// residue-class entropy accounting, finite-size output length, a sampling
// simulator and a Toeplitz extractor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "cqe/bounds.hpp"
#include "cqe/error.hpp"
#include "cqe/minentropy.hpp"
#include "cqe/qmath.hpp"
#include "cqe/report.hpp"

namespace cqe {

inline constexpr double kTailTol = 1e-12;
inline constexpr std::size_t kQrngBins = 4;
inline constexpr double kMaxClickEstimate = 0.75;
inline constexpr double kEntropyPeakClick = 0.25;

using BitVector = std::vector<std::uint8_t>;

/// Photon-number distribution p_m, m = 0..m_max, with declared mean energy L.
class FockDiagonalState {
 public:
  FockDiagonalState(std::vector<double> probs, double energy_bound) : p_(std::move(probs)), energy_(energy_bound) {
    detail::require(!p_.empty(), ErrorCode::InvalidState, "empty photon-number distribution");
    double s = 0.0, mean = 0.0;
    for (std::size_t m = 0; m < p_.size(); ++m) {
      detail::require(std::isfinite(p_[m]) && p_[m] >= 0.0, ErrorCode::InvalidState, "negative photon-number weight");
      s += p_[m];
      mean += static_cast<double>(m) * p_[m];
    }
    detail::require(std::abs(s - 1.0) <= kDistributionTol, ErrorCode::InvalidState,
                    "photon-number distribution must sum to 1");
    for (double& v : p_) v /= s;
    mean /= s;
    detail::require(std::isfinite(energy_) && mean <= energy_ + 1e-12, ErrorCode::InvalidState,
                    "mean photon number exceeds the energy bound");
  }

  /// Energy bound set to the actual mean photon number.
  explicit FockDiagonalState(std::vector<double> probs) : FockDiagonalState(probs, mean_of(probs)) {}

  /// Phase-randomized coherent state, p_m = e^{-mu} mu^m / m!.
  static FockDiagonalState poisson(double mu) {
    detail::require(std::isfinite(mu) && mu >= 0.0, ErrorCode::InvalidState, "mu must be non-negative");
    return truncated([mu](std::size_t m) {
      if (mu == 0.0) return m == 0 ? 1.0 : 0.0;
      const double md = static_cast<double>(m);
      return std::exp(-mu + md * std::log(mu) - std::lgamma(md + 1.0));
    }, mu);
  }

  /// Thermal state, p_m = nbar^m / (1 + nbar)^{m+1}.
  static FockDiagonalState thermal(double mean) {
    detail::require(std::isfinite(mean) && mean >= 0.0, ErrorCode::InvalidState, "mean must be non-negative");
    return truncated([mean](std::size_t m) {
      return std::pow(mean / (1.0 + mean), static_cast<double>(m)) / (1.0 + mean);
    }, mean);
  }

  static FockDiagonalState fock(std::size_t m) {
    std::vector<double> p(m + 1, 0.0);
    p[m] = 1.0;
    return FockDiagonalState(std::move(p), static_cast<double>(m));
  }

  std::size_t m_max() const noexcept { return p_.size() - 1; }
  const std::vector<double>& probs() const noexcept { return p_; }
  double energy_bound() const noexcept { return energy_; }
  double mean_photon_number() const { return mean_of(p_); }

 private:
  static double mean_of(const std::vector<double>& p) {
    double mean = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) mean += static_cast<double>(m) * p[m];
    return mean;
  }

  // Keeps terms until the remaining tail mass drops below kTailTol, then renormalizes.
  template <class F>
  static FockDiagonalState truncated(F&& pmf, double energy) {
    std::vector<double> p;
    double s = 0.0;
    for (std::size_t m = 0; m < 100000; ++m) {
      p.push_back(pmf(m));
      s += p.back();
      if (1.0 - s < kTailTol && static_cast<double>(m) > energy) break;
    }
    for (double& v : p) v /= s;
    const double mean = mean_of(p);
    return FockDiagonalState(std::move(p), std::max(energy, mean));
  }

  std::vector<double> p_;
  double energy_;
};

/// q_y = sum_m p_{bins m + y}.
class ResidueProfile {
 public:
  explicit ResidueProfile(std::vector<double> q) : q_(std::move(q)) {
    detail::require(q_.size() >= 2, ErrorCode::InvalidDistribution, "residue profile needs at least 2 bins");
    double s = 0.0;
    for (double v : q_) {
      detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidDistribution, "negative residue weight");
      s += v;
    }
    detail::require(std::abs(s - 1.0) <= kDistributionTol, ErrorCode::InvalidDistribution,
                    "residue profile must sum to 1");
  }

  std::size_t bins() const noexcept { return q_.size(); }
  const std::vector<double>& q() const noexcept { return q_; }
  double operator[](std::size_t y) const noexcept { return q_[y]; }

 private:
  std::vector<double> q_;
};

inline ResidueProfile residue_profile(const FockDiagonalState& s, std::size_t bins = kQrngBins) {
  detail::require(bins >= 2, ErrorCode::InvalidState, "at least 2 phase bins are required");
  std::vector<double> q(bins, 0.0);
  for (std::size_t m = 0; m < s.probs().size(); ++m) q[m % bins] += s.probs()[m];
  double total = 0.0;
  for (double v : q) total += v;
  for (double& v : q) v /= total;
  return ResidueProfile(std::move(q));
}

/// log2(bins) - log2 (sum_y sqrt(q_y))^2, in [0, log2 bins].
inline double qrng_hmin_per_round(const ResidueProfile& r) {
  std::vector<double> roots;
  roots.reserve(r.bins());
  for (double v : r.q()) roots.push_back(std::sqrt(v));
  std::sort(roots.begin(), roots.end());
  double acc = 0.0;
  for (double v : roots) acc += v;
  const double top = std::log2(static_cast<double>(r.bins()));
  return std::clamp(top - 2.0 * std::log2(acc), 0.0, top);
}

/// Husimi function Q(alpha) = (1/pi) sum_m p_m e^{-|alpha|^2} |alpha|^{2m} / m!
/// of a Fock-diagonal state at |alpha|^2 = mu (independent of the phase).
inline double husimi_diagonal(const FockDiagonalState& s, double mu) {
  double acc = 0.0;
  for (std::size_t m = 0; m < s.probs().size(); ++m) {
    if (s.probs()[m] == 0.0) continue;
    const double md = static_cast<double>(m);
    const double log_term = (m == 0 ? 0.0 : md * std::log(mu)) - mu - std::lgamma(md + 1.0);
    acc += s.probs()[m] * std::exp(log_term);
  }
  return acc / std::numbers::pi;
}

/// Heterodyne outcome probabilities for the four phase quadrants, by
/// integrating the Husimi function over each quadrant (d^2 alpha = dmu dtheta / 2).
///
/// Composite 5-point Gauss-Legendre in mu on unit panels and the midpoint
/// rule in theta; every bin must come out as 1/4 within 1e-10.
inline std::vector<double> heterodyne_bin_probs(const FockDiagonalState& s) {
  static constexpr double kNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                       0.9061798459386640};
  static constexpr double kWeights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                         0.4786286704993665, 0.2369268850561891};
  const double m_max = static_cast<double>(s.m_max());
  const double upper = std::ceil(m_max + 60.0 + 12.0 * std::sqrt(m_max + 1.0));
  const int theta_steps = 16;
  std::vector<double> out(kQrngBins, 0.0);
  for (std::size_t x = 0; x < kQrngBins; ++x) {
    const double lo = static_cast<double>(x) * std::numbers::pi / 2.0;
    const double dtheta = std::numbers::pi / 2.0 / theta_steps;
    double total = 0.0;
    for (int t = 0; t < theta_steps; ++t) {
      [[maybe_unused]] const double theta = lo + (t + 0.5) * dtheta;
      double radial = 0.0;
      for (double a = 0.0; a < upper; a += 1.0)
        for (int g = 0; g < 5; ++g) radial += 0.5 * kWeights[g] * husimi_diagonal(s, a + 0.5 + 0.5 * kNodes[g]);
      total += 0.5 * radial * dtheta;
    }
    out[x] = total;
  }
  for (double v : out)
    if (std::abs(v - 0.25) > 1e-10) throw Error(ErrorCode::NoConvergence, "heterodyne bin integral inaccurate");
  return out;
}

struct QrngParams {
  std::int64_t n = 0;  // generation rounds
  std::int64_t k = 0;  // test rounds
  double q_obs = 0.0;  // click frequency Q
  FailureBudget budget = FailureBudget::from_eps_sec(1e-10);

  void validate() const {
    detail::require(n >= 1 && k >= 1, ErrorCode::Validation, "n and k must be at least 1");
    detail::require(std::isfinite(q_obs) && q_obs >= 0.0 && q_obs <= 1.0, ErrorCode::Validation,
                    "q_obs must lie in [0, 1]");
  }
};

/// Q_hat = Q + serfling_delta(n, k, eps), clamped to [0, 3/4].
template <class Concentration = Serfling>
double q_hat(const QrngParams& p, Concentration conc = {}) {
  p.validate();
  return std::clamp(p.q_obs + conc(p.n, p.k, p.budget.eps_smooth()), 0.0, kMaxClickEstimate);
}

/// H(Q) held at its maximum 2 once Q passes 1/4.
inline double capped_quaternary_entropy(double q) {
  return quaternary_entropy(std::clamp(q, 0.0, kEntropyPeakClick));
}

/// Per-round rate 2 - H(Q) without finite-size corrections.
inline double qrng_asymptotic_rate(double q) {
  return 2.0 - capped_quaternary_entropy(std::clamp(q, 0.0, kMaxClickEstimate));
}

/// ell = floor(n [2 - H(Q_hat)] - log2(1 / eps_sec^2)), at least 0.
template <class Concentration = Serfling>
KeyRateReport qrng_output_length(const QrngParams& p, Concentration conc = {}) {
  const double qh = q_hat(p, conc);
  const auto& b = p.budget;
  const double n = static_cast<double>(p.n);
  const double hmin = n * (2.0 - capped_quaternary_entropy(qh));
  const double log_term = -2.0 * std::log2(b.eps_sec());
  const double rhs = hmin - log_term;
  const auto ell = static_cast<std::int64_t>(std::clamp(std::floor(rhs), 0.0, 2.0 * n));

  KeyRateReport r;
  r.hmin_smooth = hmin;
  r.e_hat = qh;
  r.ell = ell;
  r.delta_sec = secrecy_delta(ell, hmin, b.eps_smooth());
  r.raw_bits = p.n;
  r.terms = {
      {"q_obs", p.q_obs},
      {"statistical_deviation", conc(p.n, p.k, b.eps_smooth())},
      {"quaternary_entropy_q_hat", capped_quaternary_entropy(qh)},
      {"log_term", log_term},
      {"rhs", rhs},
      {"eps_smooth", b.eps_smooth()},
      {"eps_sec", b.eps_sec()},
  };
  return r;
}

struct QrngSimConfig {
  std::int64_t generation_rounds = 0;
  std::int64_t test_rounds = 0;
  std::uint64_t seed = 0;
};

struct QrngSample {
  std::vector<std::uint8_t> x;  // symbols in {0, 1, 2, 3}
  std::int64_t clicks = 0;
  std::int64_t test_rounds = 0;
  double click_frequency = 0.0;
};

/// Generation rounds draw m from the source and a uniform heterodyne phase
/// binned into quadrants; test rounds click iff m >= 1.
inline QrngSample simulate_qrng(const QrngSimConfig& cfg, const FockDiagonalState& source) {
  detail::require(cfg.generation_rounds >= 0 && cfg.test_rounds >= 0, ErrorCode::Validation,
                  "round counts must be non-negative");
  std::mt19937_64 rng(cfg.seed);
  std::discrete_distribution<std::size_t> photons(source.probs().begin(), source.probs().end());
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  QrngSample out;
  out.x.reserve(static_cast<std::size_t>(cfg.generation_rounds));
  for (std::int64_t t = 0; t < cfg.generation_rounds; ++t) {
    (void)photons(rng);
    const double theta = phase(rng);
    const auto bin = static_cast<std::uint8_t>(std::min(3.0, std::floor(theta / (std::numbers::pi / 2.0))));
    out.x.push_back(bin);
  }
  out.test_rounds = cfg.test_rounds;
  for (std::int64_t t = 0; t < cfg.test_rounds; ++t) out.clicks += photons(rng) >= 1;
  out.click_frequency =
      cfg.test_rounds > 0 ? static_cast<double>(out.clicks) / static_cast<double>(cfg.test_rounds) : 0.0;
  return out;
}

/// n_rounds of each kind.
inline QrngSample simulate_qrng(std::int64_t n_rounds, const FockDiagonalState& source, std::uint64_t seed) {
  return simulate_qrng(QrngSimConfig{n_rounds, n_rounds, seed}, source);
}

/// Seed bits s_0 .. s_{in + out - 2}; T_{i,j} = s_{i - j + in - 1}.
struct ToeplitzSeed {
  BitVector bits;

  static ToeplitzSeed random(std::size_t input_len, std::size_t output_len, std::mt19937_64& rng) {
    detail::require(input_len >= 1, ErrorCode::SeedLengthMismatch, "input length must be positive");
    ToeplitzSeed s;
    s.bits.resize(input_len + output_len - 1);
    for (auto& b : s.bits) b = static_cast<std::uint8_t>(rng() & 1U);
    return s;
  }
};

inline BitVector toeplitz_extract(const BitVector& raw, const ToeplitzSeed& seed, std::size_t out_len) {
  if (out_len == 0) return {};
  detail::require(!raw.empty() && seed.bits.size() == raw.size() + out_len - 1, ErrorCode::SeedLengthMismatch,
                  "Toeplitz seed length must equal input length + output length - 1");
  const std::size_t in = raw.size();
  BitVector out(out_len, 0);
  for (std::size_t i = 0; i < out_len; ++i) {
    std::uint8_t acc = 0;
    for (std::size_t j = 0; j < in; ++j) acc ^= static_cast<std::uint8_t>(seed.bits[i + in - 1 - j] & raw[j] & 1U);
    out[i] = acc;
  }
  return out;
}

/// Bit i of byte j is bit 8j + i.
inline std::vector<std::uint8_t> pack_bits(const BitVector& bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t t = 0; t < bits.size(); ++t)
    if (bits[t] & 1U) bytes[t / 8] |= static_cast<std::uint8_t>(1U << (t % 8));
  return bytes;
}

inline BitVector unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t n_bits) {
  detail::require(n_bits <= 8 * bytes.size(), ErrorCode::OutOfRange, "not enough bytes for the requested bits");
  BitVector bits(n_bits);
  for (std::size_t t = 0; t < n_bits; ++t) bits[t] = static_cast<std::uint8_t>((bytes[t / 8] >> (t % 8)) & 1U);
  return bits;
}

/// Two raw bits per symbol, low bit first.
inline BitVector symbols_to_bits(const std::vector<std::uint8_t>& x) {
  BitVector bits;
  bits.reserve(2 * x.size());
  for (auto s : x) {
    bits.push_back(s & 1U);
    bits.push_back((s >> 1) & 1U);
  }
  return bits;
}

inline constexpr std::size_t kMaxOracleTrunc = 16;

/// Pure conditional states sum_{m <= trunc} sqrt(p_m) e^{-i m x pi/2} |e_m>
/// for uniform x in {0..3}, from the truncated and renormalized source.
inline CQState reduced_cq_state(const FockDiagonalState& s, std::size_t trunc) {
  if (trunc > kMaxOracleTrunc) throw Error(ErrorCode::DimTooLarge, "trunc must not exceed 16");
  detail::require(s.m_max() <= trunc, ErrorCode::InvalidState, "source support exceeds the truncation");
  const std::size_t dim = trunc + 1;
  std::vector<DensityMatrix> states;
  for (std::size_t x = 0; x < kQrngBins; ++x) {
    CVector ket(dim);
    for (std::size_t m = 0; m <= s.m_max(); ++m)
      ket[m] = std::sqrt(s.probs()[m]) * root_of_unity(kQrngBins, -static_cast<long long>(m * x));
    states.push_back(DensityMatrix::pure(ket));
  }
  return CQState(std::vector<double>(kQrngBins, 0.25), std::move(states));
}

/// Projective measurement onto 1/2 sum_y omega^{-xy} |f_y>, with |f_y> the
/// normalized residue-class components; the complement goes to outcome 0.
inline Povm reduced_state_povm(const FockDiagonalState& s, std::size_t trunc) {
  const std::size_t dim = trunc + 1;
  const ResidueProfile r = residue_profile(s);
  std::vector<CVector> f(kQrngBins, CVector(dim));
  for (std::size_t y = 0; y < kQrngBins; ++y) {
    if (r[y] > 0.0) {
      for (std::size_t m = y; m <= s.m_max(); m += kQrngBins) f[y][m] = std::sqrt(s.probs()[m] / r[y]);
    } else {
      f[y][y] = 1.0;
    }
  }
  std::vector<ComplexMatrix> elements;
  ComplexMatrix covered(dim);
  for (std::size_t x = 0; x < kQrngBins; ++x) {
    CVector v(dim);
    for (std::size_t y = 0; y < kQrngBins; ++y)
      for (std::size_t m = 0; m < dim; ++m) v[m] += 0.5 * root_of_unity(kQrngBins, -static_cast<long long>(x * y)) * f[y][m];
    elements.push_back(ComplexMatrix::projector(v));
    covered += elements.back();
  }
  elements[0] += ComplexMatrix::identity(dim) - covered;
  return Povm(std::move(elements));
}

struct ReducedStateResult {
  double hmin = 0.0;
  double guess_prob = 0.0;
  bool certified = false;
};

/// Exact min-entropy of the explicitly built reduced CQ state.
inline ReducedStateResult reduced_state_hmin_oracle_detailed(const FockDiagonalState& s, std::size_t trunc) {
  const CQState state = reduced_cq_state(s, trunc);
  const Povm povm = reduced_state_povm(s, trunc);
  ReducedStateResult out;
  out.guess_prob = guess_prob(state, povm);
  out.hmin = min_entropy_from_guess(out.guess_prob);
  out.certified = dual_certificate(state, povm, 1e-8);
  return out;
}

inline double reduced_state_hmin_oracle(const FockDiagonalState& s, std::size_t trunc) {
  return reduced_state_hmin_oracle_detailed(s, trunc).hmin;
}

/// Conditional states with the quadrant-integration damping
/// Omega_{mm'} = Gamma((m+m')/2 + 1) / sqrt(m! m'!) on the off-diagonal.
inline CQState damped_reduced_state(const FockDiagonalState& s, std::size_t trunc) {
  if (trunc > kMaxOracleTrunc) throw Error(ErrorCode::DimTooLarge, "trunc must not exceed 16");
  detail::require(s.m_max() <= trunc, ErrorCode::InvalidState, "source support exceeds the truncation");
  const std::size_t dim = trunc + 1;
  std::vector<DensityMatrix> states;
  for (std::size_t x = 0; x < kQrngBins; ++x) {
    ComplexMatrix rho(dim);
    for (std::size_t m = 0; m <= s.m_max(); ++m)
      for (std::size_t mp = 0; mp <= s.m_max(); ++mp) {
        const double a = static_cast<double>(m), b = static_cast<double>(mp);
        const double omega = std::exp(std::lgamma((a + b) / 2.0 + 1.0) - 0.5 * (std::lgamma(a + 1.0) + std::lgamma(b + 1.0)));
        const long long shift = -static_cast<long long>(x) * (static_cast<long long>(m) - static_cast<long long>(mp));
        rho(m, mp) = std::sqrt(s.probs()[m] * s.probs()[mp]) * omega * root_of_unity(kQrngBins, shift);
      }
    states.push_back(DensityMatrix::from_noisy(hermitian_part(rho)));
  }
  return CQState(std::vector<double>(kQrngBins, 0.25), std::move(states));
}

}  // namespace cqe
