#pragma once

// Entropies, binomial-sum bounds, sampling-without-replacement estimates and
// leftover-hash secrecy accounting. All logarithms are base 2 unless a
// function says otherwise; 0 log 0 = 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "cqe/error.hpp"

namespace cqe {

/// Failure probabilities of one protocol run.
///
/// eps_smooth is the smoothing parameter; eps_sec is always 4 * eps_smooth.
/// The DI-QKD split satisfies eps_t + eps_g = eps_smooth.
class FailureBudget {
 public:
  /// eps_smooth = eps_sec / 4, split evenly between testing and generation.
  static FailureBudget from_eps_sec(double eps_sec, double eps_cor = 1e-15) {
    return FailureBudget(eps_sec / 4.0, eps_cor, eps_sec / 8.0, eps_sec / 8.0);
  }

  static FailureBudget from_smoothing(double eps_smooth, double eps_cor = 1e-15) {
    return FailureBudget(eps_smooth, eps_cor, eps_smooth / 2.0, eps_smooth / 2.0);
  }

  /// Smoothing parameter eps_t + eps_g.
  static FailureBudget from_test_and_generation(double eps_t, double eps_g, double eps_cor = 1e-15) {
    return FailureBudget(eps_t + eps_g, eps_cor, eps_t, eps_g);
  }

  double eps_smooth() const noexcept { return eps_; }
  double eps_sec() const noexcept { return 4.0 * eps_; }
  double eps_cor() const noexcept { return eps_cor_; }
  double eps_t() const noexcept { return eps_t_; }
  double eps_g() const noexcept { return eps_g_; }

 private:
  FailureBudget(double eps, double eps_cor, double eps_t, double eps_g)
      : eps_(eps), eps_cor_(eps_cor), eps_t_(eps_t), eps_g_(eps_g) {
    auto unit = [](double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; };
    detail::require(unit(eps_) && unit(4.0 * eps_), ErrorCode::OutOfRange, "eps_sec must lie in (0, 1)");
    detail::require(unit(eps_cor_), ErrorCode::OutOfRange, "eps_cor must lie in (0, 1)");
    detail::require(unit(eps_t_) && unit(eps_g_), ErrorCode::OutOfRange, "eps_t and eps_g must lie in (0, 1)");
  }

  double eps_;
  double eps_cor_;
  double eps_t_;
  double eps_g_;
};

namespace detail {

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

inline void require_unit_interval(double x, const char* what) {
  require(std::isfinite(x) && x >= 0.0 && x <= 1.0, ErrorCode::OutOfRange, what);
}

}  // namespace detail

/// h(x) = -x log x - (1-x) log(1-x)
inline double binary_entropy(double x) {
  detail::require_unit_interval(x, "binary_entropy argument must lie in [0, 1]");
  return 0.0 - (detail::xlog2x(x) + detail::xlog2x(1.0 - x));
}

/// Shannon entropy of (q, (1-q)/3, (1-q)/3, (1-q)/3).
inline double quaternary_entropy(double q) {
  detail::require_unit_interval(q, "quaternary_entropy argument must lie in [0, 1]");
  const double rest = 1.0 - q;
  return 0.0 - (detail::xlog2x(q) + (rest > 0.0 ? rest * std::log2(rest / 3.0) : 0.0));
}

/// log2 sum_{w=0}^{floor(n frac)} C(n, w).
///
/// Exact 128-bit integer accumulation for n <= 64, log-sum-exp over lgamma
/// terms above that.
inline double binomial_tail_log(std::int64_t n, double frac) {
  detail::require(n >= 1, ErrorCode::OutOfRange, "binomial_tail_log needs n >= 1");
  detail::require_unit_interval(frac, "binomial_tail_log fraction must lie in [0, 1]");
  const auto top = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * frac + 1e-9));
  const std::int64_t wmax = std::min(top, n);

  if (n <= 64) {
    __extension__ typedef unsigned __int128 u128;
    u128 term = 1, total = 1;
    for (std::int64_t w = 1; w <= wmax; ++w) {
      term = term * static_cast<u128>(n - w + 1) / static_cast<u128>(w);
      total += term;
    }
    const auto hi = static_cast<std::uint64_t>(total >> 64);
    const auto lo = static_cast<std::uint64_t>(total);
    const long double v = static_cast<long double>(hi) * 18446744073709551616.0L + static_cast<long double>(lo);
    return static_cast<double>(std::log2(v));
  }

  const double nn = static_cast<double>(n);
  auto ln_choose = [&](std::int64_t w) {
    const double ww = static_cast<double>(w);
    return std::lgamma(nn + 1.0) - std::lgamma(ww + 1.0) - std::lgamma(nn - ww + 1.0);
  };
  // Terms increase up to n/2, so the last term dominates when wmax <= n/2.
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t w = 0; w <= wmax; ++w) peak = std::max(peak, ln_choose(w));
  double acc = 0.0;
  for (std::int64_t w = 0; w <= wmax; ++w) acc += std::exp(ln_choose(w) - peak);
  return (peak + std::log(acc)) / std::numbers::ln2;
}

/// Serfling-type deviation for sampling k test bits out of n + k:
/// sqrt((n+k)(k+1) / (n k^2) ln(1/eps)).
inline double serfling_delta(std::int64_t n, std::int64_t k, double eps) {
  detail::require(n >= 1 && k >= 1, ErrorCode::OutOfRange, "serfling_delta needs n, k >= 1");
  detail::require(eps > 0.0 && eps <= 1.0, ErrorCode::OutOfRange, "serfling_delta needs 0 < eps <= 1");
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return std::sqrt((nn + kk) * (kk + 1.0) / (nn * kk * kk) * std::log(1.0 / eps));
}

/// CHSH-round variant: sqrt((n+k)(4k+1) / (16 n k^2) ln(1/eps_g)).
inline double serfling_delta_diqkd(std::int64_t n, std::int64_t k, double eps_g) {
  detail::require(n >= 1 && k >= 1, ErrorCode::OutOfRange, "serfling_delta_diqkd needs n, k >= 1");
  detail::require(eps_g > 0.0 && eps_g <= 1.0, ErrorCode::OutOfRange, "serfling_delta_diqkd needs 0 < eps_g <= 1");
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return std::sqrt((nn + kk) * (4.0 * kk + 1.0) / (16.0 * nn * kk * kk) * std::log(1.0 / eps_g));
}

/// Default concentration inequality for sampling without replacement.
struct Serfling {
  double operator()(std::int64_t n, std::int64_t k, double eps) const { return serfling_delta(n, k, eps); }
};

/// Serfling bound as used for the CHSH test rounds (k per setting pair).
struct SerflingChsh {
  double operator()(std::int64_t n, std::int64_t k, double eps) const { return serfling_delta_diqkd(n, k, eps); }
};

/// mu = sqrt((2/k) ln(sqrt(6)/eps_t)), from 6 exp(-mu^2 k) = eps_t^2.
///
/// Defined for 0 < eps_t <= sqrt(6); the penalty vanishes at the upper end.
inline double chsh_statistical_penalty(std::int64_t k, double eps_t) {
  detail::require(k >= 1, ErrorCode::OutOfRange, "chsh_statistical_penalty needs k >= 1");
  const double sqrt6 = std::sqrt(6.0);
  detail::require(eps_t > 0.0 && eps_t <= sqrt6, ErrorCode::OutOfRange, "chsh_statistical_penalty needs 0 < eps_t <= sqrt(6)");
  return std::sqrt(2.0 / static_cast<double>(k) * std::max(0.0, std::log(sqrt6 / eps_t)));
}

/// 2 exp(-2 mu^2 N) + 4 exp(-nu^2 N)
inline double ch_composition_failure(double mu, double nu, std::int64_t n_rounds) {
  detail::require(mu >= 0.0 && nu >= 0.0, ErrorCode::OutOfRange, "mu and nu must be non-negative");
  detail::require(n_rounds >= 1, ErrorCode::OutOfRange, "n_rounds must be positive");
  const double n = static_cast<double>(n_rounds);
  return 2.0 * std::exp(-2.0 * mu * mu * n) + 4.0 * std::exp(-nu * nu * n);
}

/// Leftover-hash secrecy 2 eps + (1/2) sqrt(2^(ell - H)), with H the smooth
/// min-entropy available to the extractor after error correction.
inline double secrecy_delta(std::int64_t ell, double hmin_eps, double eps_smooth) {
  return 2.0 * eps_smooth + 0.5 * std::exp2(0.5 * (static_cast<double>(ell) - hmin_eps));
}

}  // namespace cqe
