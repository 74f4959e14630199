#pragma once

// Entanglement-based BB84: finite-key length, exact small-n Bell-spectrum
// entropies, and a depolarizing-channel Monte Carlo simulator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "cqe/bounds.hpp"
#include "cqe/error.hpp"
#include "cqe/report.hpp"

namespace cqe {

inline constexpr double kDefaultReconciliationEfficiency = 1.16;

struct Bb84Params {
  std::int64_t n = 0;  // key bits (X basis)
  std::int64_t k = 0;  // test bits per basis
  double e_x = 0.0;
  double e_z = 0.0;
  double leak_ec = 0.0;
  FailureBudget budget = FailureBudget::from_eps_sec(1e-9, 1e-15);

  void validate() const {
    detail::require(n >= 1 && k >= 1, ErrorCode::Validation, "n and k must be at least 1");
    detail::require(e_x >= 0.0 && e_x <= 0.5, ErrorCode::Validation, "e_x must lie in [0, 1/2]");
    detail::require(e_z >= 0.0 && e_z <= 0.5, ErrorCode::Validation, "e_z must lie in [0, 1/2]");
    detail::require(std::isfinite(leak_ec) && leak_ec >= 0.0, ErrorCode::Validation, "leak_ec must be non-negative");
  }
};

/// leak_EC = f n h(e_x), the usual reconciliation-cost model.
inline double bb84_default_leak(std::int64_t n, double e_x, double efficiency = kDefaultReconciliationEfficiency) {
  return efficiency * static_cast<double>(n) * binary_entropy(e_x);
}

/// Upper estimate of the phase-error rate on the key bits, clamped to [0, 1/2].
template <class Concentration = Serfling>
double bb84_e_hat(const Bb84Params& p, Concentration conc = {}) {
  p.validate();
  return std::clamp(p.e_z + conc(p.n, p.k, p.budget.eps_smooth()), 0.0, 0.5);
}

/// ell = floor(n [1 - h(e_hat)] - leak_EC - log2(2 / (eps_sec^2 eps_cor))), at least 0.
template <class Concentration = Serfling>
KeyRateReport bb84_key_length(const Bb84Params& p, Concentration conc = {}) {
  const double e_hat = bb84_e_hat(p, conc);
  const auto& b = p.budget;
  const double n = static_cast<double>(p.n);
  const double hmin = n * (1.0 - binary_entropy(e_hat));
  const double log_term = std::log2(2.0 / (b.eps_sec() * b.eps_sec() * b.eps_cor()));
  const double rhs = hmin - p.leak_ec - log_term;
  const auto ell = static_cast<std::int64_t>(std::clamp(std::floor(rhs), 0.0, n));
  // Smooth min-entropy seen by the extractor after error-correction leakage.
  const double hmin_after_ec = hmin - p.leak_ec - std::log2(2.0 / b.eps_cor());

  KeyRateReport r;
  r.hmin_smooth = hmin;
  r.e_hat = e_hat;
  r.ell = ell;
  r.delta_sec = secrecy_delta(ell, hmin_after_ec, b.eps_smooth());
  r.raw_bits = p.n;
  r.terms = {
      {"statistical_deviation", conc(p.n, p.k, b.eps_smooth())},
      {"binary_entropy_e_hat", binary_entropy(e_hat)},
      {"leak_ec", p.leak_ec},
      {"log_term", log_term},
      {"rhs", rhs},
      {"hmin_after_ec", hmin_after_ec},
      {"eps_smooth", b.eps_smooth()},
      {"eps_sec", b.eps_sec()},
      {"eps_cor", b.eps_cor()},
  };
  return r;
}

/// Bell-diagonal spectrum of n EPR pairs.
///
/// Weight lambda_{i,j} for n-bit strings i (Z-type Pauli pattern, flips X
/// outcomes) and j (X-type pattern, flips Z outcomes). Bit t of the integer
/// index is the t-th pair. Storage is dense, index i * 2^n + j.
class BellSpectrum {
 public:
  static constexpr std::size_t kMaxPairs = 6;

  BellSpectrum(std::size_t n_pairs, std::vector<double> weights) : n_(n_pairs), w_(std::move(weights)) {
    if (n_ == 0 || n_ > kMaxPairs) throw Error(ErrorCode::DimTooLarge, "BellSpectrum supports 1..6 pairs");
    detail::require(w_.size() == (std::size_t{1} << (2 * n_)), ErrorCode::InvalidDistribution,
                    "BellSpectrum needs 4^n weights");
    double s = 0.0;
    for (double x : w_) {
      detail::require(std::isfinite(x) && x >= 0.0, ErrorCode::InvalidDistribution, "negative Bell weight");
      s += x;
    }
    detail::require(std::abs(s - 1.0) <= 1e-9, ErrorCode::InvalidDistribution, "Bell weights must sum to 1");
  }

  /// n independent pairs with the same single-pair spectrum (l00, l10, l01, l11).
  static BellSpectrum product(std::size_t n_pairs, const std::array<double, 4>& single) {
    const std::size_t dim = std::size_t{1} << n_pairs;
    std::vector<double> w(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        double v = 1.0;
        for (std::size_t t = 0; t < n_pairs; ++t) v *= single[((i >> t) & 1U) + 2 * ((j >> t) & 1U)];
        w[i * dim + j] = v;
      }
    return BellSpectrum(n_pairs, std::move(w));
  }

  std::size_t n_pairs() const noexcept { return n_; }
  std::size_t strings() const noexcept { return std::size_t{1} << n_; }
  double weight(std::size_t i, std::size_t j) const noexcept { return w_[i * strings() + j]; }
  const std::vector<double>& weights() const noexcept { return w_; }

  /// lambda_i = sum_j lambda_{i,j}
  std::vector<double> marginal() const {
    std::vector<double> m(strings());
    for (std::size_t i = 0; i < strings(); ++i)
      for (std::size_t j = 0; j < strings(); ++j) m[i] += weight(i, j);
    return m;
  }

 private:
  std::size_t n_;
  std::vector<double> w_;
};

/// Exact H_min(X|E) after Alice measures every pair in the X basis:
/// n - log2 sum_j (sum_i sqrt(lambda_{i,j}))^2.
inline double bell_measure_x_hmin(const BellSpectrum& s) {
  double total = 0.0;
  for (std::size_t j = 0; j < s.strings(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < s.strings(); ++i) col += std::sqrt(s.weight(i, j));
    total += col * col;
  }
  return static_cast<double>(s.n_pairs()) - std::log2(total);
}

/// Lower bound n - log2 (sum_i sqrt(lambda_i))^2 using only the marginal over i.
inline double marginalize_spectrum(const BellSpectrum& s) {
  double acc = 0.0;
  for (double l : s.marginal()) acc += std::sqrt(l);
  return static_cast<double>(s.n_pairs()) - std::log2(acc * acc);
}

struct Bb84SimConfig {
  std::int64_t n_pairs = 0;
  double depol = 0.0;
  std::uint64_t seed = 0;
  double x_basis_prob = 0.5;  // each party picks X with this probability
};

struct Bb84Observation {
  std::int64_t pairs = 0;
  std::int64_t x_matched = 0;  // n + k
  std::int64_t z_matched = 0;  // k
  std::int64_t n = 0;          // key bits left after disclosing k X-basis bits
  std::int64_t k = 0;
  std::int64_t x_test_errors = 0;
  std::int64_t z_errors = 0;
  std::int64_t key_phase_errors = 0;  // Z-basis errors the key pairs would have shown
  double e_x = 0.0;
  double e_z = 0.0;
  double key_phase_error_rate = 0.0;
};

/// Depolarized EPR pairs with Pauli spectrum (1 - 3q/4, q/4, q/4, q/4),
/// random basis choices, sifting, and random disclosure of k X-basis bits.
inline Bb84Observation simulate_bb84(const Bb84SimConfig& cfg) {
  detail::require(cfg.n_pairs >= 1, ErrorCode::Validation, "n_pairs must be positive");
  detail::require(cfg.depol >= 0.0 && cfg.depol <= 1.0, ErrorCode::Validation, "depol must lie in [0, 1]");
  detail::require(cfg.x_basis_prob > 0.0 && cfg.x_basis_prob < 1.0, ErrorCode::Validation,
                  "x_basis_prob must lie in (0, 1)");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double q4 = cfg.depol / 4.0;

  struct Pair {
    bool x_err;
    bool z_err;
  };
  std::vector<Pair> x_pairs;
  Bb84Observation obs;
  obs.pairs = cfg.n_pairs;
  for (std::int64_t t = 0; t < cfg.n_pairs; ++t) {
    // Pauli index: 0 = I, 1 = sigma_z, 2 = sigma_x, 3 = sigma_y.
    const double r = u(rng);
    int pauli = 0;
    if (r >= 1.0 - 3.0 * q4) pauli = 1 + std::min(2, static_cast<int>((r - (1.0 - 3.0 * q4)) / q4));
    const bool x_err = pauli == 1 || pauli == 3;
    const bool z_err = pauli == 2 || pauli == 3;
    const bool alice_x = u(rng) < cfg.x_basis_prob;
    const bool bob_x = u(rng) < cfg.x_basis_prob;
    if (alice_x != bob_x) continue;
    if (alice_x) {
      x_pairs.push_back({x_err, z_err});
    } else {
      ++obs.z_matched;
      obs.z_errors += z_err;
    }
  }
  obs.x_matched = static_cast<std::int64_t>(x_pairs.size());
  obs.k = obs.z_matched;
  const auto k_disclosed = std::min<std::int64_t>(obs.k, obs.x_matched);
  // Partial Fisher-Yates: the first k_disclosed entries become the X test sample.
  for (std::int64_t t = 0; t < k_disclosed; ++t) {
    std::uniform_int_distribution<std::int64_t> pick(t, obs.x_matched - 1);
    std::swap(x_pairs[static_cast<std::size_t>(t)], x_pairs[static_cast<std::size_t>(pick(rng))]);
    obs.x_test_errors += x_pairs[static_cast<std::size_t>(t)].x_err;
  }
  for (auto t = static_cast<std::size_t>(k_disclosed); t < x_pairs.size(); ++t)
    obs.key_phase_errors += x_pairs[t].z_err;
  obs.n = obs.x_matched - k_disclosed;
  obs.e_x = k_disclosed > 0 ? static_cast<double>(obs.x_test_errors) / static_cast<double>(k_disclosed) : 0.0;
  obs.e_z = obs.k > 0 ? static_cast<double>(obs.z_errors) / static_cast<double>(obs.k) : 0.0;
  obs.key_phase_error_rate =
      obs.n > 0 ? static_cast<double>(obs.key_phase_errors) / static_cast<double>(obs.n) : 0.0;
  return obs;
}

}  // namespace cqe
