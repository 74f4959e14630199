#pragma once

// Min-entropy of classical-quantum states.
//
// A CQ state sum_x p_x |x><x| (x) tau_x is reduced to a uniform canonical
// state whose adversary reduced state has spectrum lambda_y. For that
// canonical state the guessing probability is exactly (sum_y sqrt(lambda_y))^2 / d
// and the Fourier-basis measurement attains it. The reduction never increases
// the min-entropy, so the canonical value is a lower bound for the original.
//
// helstrom, dual_certificate and povm_search are independent discrimination
// oracles used to check the bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "cqe/error.hpp"
#include "cqe/qmath.hpp"
#include "cqe/random.hpp"

namespace cqe {

inline constexpr double kDistributionTol = 1e-9;
inline constexpr double kPovmPsdTol = 1e-9;
inline constexpr double kPovmCompletenessTol = 1e-8;

/// Classical distribution p_x paired with adversary states tau_x.
class CQState {
 public:
  CQState(std::vector<double> probs, std::vector<DensityMatrix> cond_states)
      : probs_(std::move(probs)), states_(std::move(cond_states)) {
    detail::require(!probs_.empty(), ErrorCode::InvalidDistribution, "empty alphabet");
    detail::require(probs_.size() == states_.size(), ErrorCode::DimMismatch,
                    "one conditional state per symbol is required");
    double s = 0.0;
    for (double p : probs_) {
      detail::require(std::isfinite(p) && p >= 0.0, ErrorCode::InvalidDistribution, "negative probability");
      s += p;
    }
    detail::require(std::abs(s - 1.0) <= kDistributionTol, ErrorCode::InvalidDistribution,
                    "probabilities must sum to 1");
    for (const auto& t : states_)
      detail::require(t.dim() == states_.front().dim(), ErrorCode::DimMismatch,
                      "conditional states have different dimensions");
  }

  std::size_t alphabet_size() const noexcept { return probs_.size(); }
  std::size_t adversary_dim() const noexcept { return states_.front().dim(); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<DensityMatrix>& cond_states() const noexcept { return states_; }

  /// p_x tau_x
  ComplexMatrix weighted(std::size_t x) const { return states_[x].matrix() * cplx(probs_[x]); }

 private:
  std::vector<double> probs_;
  std::vector<DensityMatrix> states_;
};

/// Spectrum lambda_y of the adversary's state in the canonical uniform CQ state.
class EigProfile {
 public:
  explicit EigProfile(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
    detail::require(!lambdas_.empty(), ErrorCode::InvalidProfile, "empty profile");
    double s = 0.0;
    for (double l : lambdas_) {
      detail::require(std::isfinite(l) && l >= 0.0, ErrorCode::InvalidProfile, "negative eigenvalue weight");
      s += l;
    }
    detail::require(std::abs(s - 1.0) <= kDistributionTol, ErrorCode::InvalidProfile, "profile must sum to 1");
  }

  std::size_t size() const noexcept { return lambdas_.size(); }
  const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  double operator[](std::size_t i) const noexcept { return lambdas_[i]; }

 private:
  std::vector<double> lambdas_;
};

class Povm {
 public:
  /// Validates positivity (1e-9) and completeness (1e-8, max entry).
  explicit Povm(std::vector<ComplexMatrix> elements) : elements_(std::move(elements)) {
    detail::require(!elements_.empty(), ErrorCode::InvalidPovm, "POVM has no elements");
    const std::size_t dim = elements_.front().dim();
    ComplexMatrix sum(dim);
    for (const auto& m : elements_) {
      detail::require(m.dim() == dim, ErrorCode::InvalidPovm, "POVM elements have different dimensions");
      detail::require(m.is_hermitian(1e-9), ErrorCode::InvalidPovm, "POVM element is not Hermitian");
      detail::require(is_psd(hermitian_part(m), kPovmPsdTol), ErrorCode::InvalidPovm, "POVM element is not PSD");
      sum += m;
    }
    detail::require(sum.max_abs_diff(ComplexMatrix::identity(dim)) <= kPovmCompletenessTol, ErrorCode::InvalidPovm,
                    "POVM elements do not sum to identity");
  }

  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t dim() const noexcept { return elements_.front().dim(); }
  const std::vector<ComplexMatrix>& elements() const noexcept { return elements_; }
  const ComplexMatrix& operator[](std::size_t i) const noexcept { return elements_[i]; }

 private:
  std::vector<ComplexMatrix> elements_;
};

/// omega^k with omega = exp(2 pi i / d).
inline cplx root_of_unity(std::size_t d, long long k) {
  const long long dd = static_cast<long long>(d);
  const long long r = ((k % dd) + dd) % dd;
  const double phi = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(d);
  return std::polar(1.0, phi);
}

/// Canonical profile of an arbitrary CQ state.
///
/// Each tau_x = sum_j mu_j |v_j><v_j| is purified as sum_j sqrt(mu_j) |v_j>|j>
/// (eigenvectors from eig_hermitian, reference space of the same dimension),
/// then lambda_y = || d^{-1/2} sum_z omega^{-yz} sqrt(p_z) |psi_z> ||^2.
inline EigProfile uniformize(const CQState& state) {
  const std::size_t d = state.alphabet_size();
  const std::size_t dim = state.adversary_dim();

  std::vector<CVector> psi;
  psi.reserve(d);
  for (const auto& tau : state.cond_states()) {
    const EigDecomposition e = eig_hermitian(tau.matrix());
    CVector v(dim * dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double mu = std::max(e.eigenvalues[j], 0.0);
      if (mu == 0.0) continue;
      const double amp = std::sqrt(mu);
      for (std::size_t r = 0; r < dim; ++r) v[r * dim + j] = amp * e.eigenvectors(r, j);
    }
    psi.push_back(std::move(v));
  }

  std::vector<double> lambdas(d);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  CVector acc(dim * dim);
  for (std::size_t y = 0; y < d; ++y) {
    std::fill(acc.begin(), acc.end(), cplx{});
    for (std::size_t z = 0; z < d; ++z) {
      const cplx coeff = root_of_unity(d, -static_cast<long long>(y * z)) * std::sqrt(state.probs()[z]) * inv_sqrt_d;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += coeff * psi[z][i];
    }
    lambdas[y] = norm2(acc);
  }
  // Sum is 1 up to rounding (Parseval); remove the residue.
  double s = 0.0;
  for (double l : lambdas) s += l;
  for (double& l : lambdas) l /= s;
  return EigProfile(std::move(lambdas));
}

/// Pure canonical state |Psi_x> = sum_y omega^{xy} sqrt(lambda_y) |e_y>.
inline CVector canonical_ket(const EigProfile& profile, std::size_t x) {
  const std::size_t d = profile.size();
  CVector psi(d);
  for (std::size_t y = 0; y < d; ++y)
    psi[y] = root_of_unity(d, static_cast<long long>(x * y)) * std::sqrt(profile[y]);
  return psi;
}

/// rho_XE = (1/d) sum_x |x><x| (x) |Psi_x><Psi_x| in the standard basis {|e_y>}.
inline CQState build_uniform_cq(const EigProfile& profile) {
  const std::size_t d = profile.size();
  std::vector<DensityMatrix> states;
  states.reserve(d);
  for (std::size_t x = 0; x < d; ++x) states.push_back(DensityMatrix::pure(canonical_ket(profile, x)));
  return CQState(std::vector<double>(d, 1.0 / static_cast<double>(d)), std::move(states));
}

/// (sum_y sqrt(lambda_y))^2 / d, the exact guessing probability of the canonical state.
///
/// Entries are summed in sorted order so the value is invariant under
/// permutations of the profile.
inline double canonical_guess_prob(const EigProfile& profile) {
  std::vector<double> l = profile.lambdas();
  std::sort(l.begin(), l.end());
  double s = 0.0;
  for (double x : l) s += std::sqrt(x);
  return std::min(1.0, s * s / static_cast<double>(l.size()));
}

/// log2 d - log2 (sum_y sqrt(lambda_y))^2, in bits, clamped to [0, log2 d].
inline double min_entropy_lb(const EigProfile& profile) {
  const double d = static_cast<double>(profile.size());
  const double h = -std::log2(canonical_guess_prob(profile));
  return std::clamp(h, 0.0, std::log2(d));
}

/// Fourier-basis measurement M_x = P{ d^{-1/2} sum_y omega^{xy} |e_y> }.
inline Povm optimal_povm(const EigProfile& profile) {
  const std::size_t d = profile.size();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<ComplexMatrix> elems;
  elems.reserve(d);
  for (std::size_t x = 0; x < d; ++x) {
    CVector f(d);
    for (std::size_t y = 0; y < d; ++y) f[y] = root_of_unity(d, static_cast<long long>(x * y)) * inv_sqrt_d;
    elems.push_back(ComplexMatrix::projector(f));
  }
  return Povm(std::move(elems));
}

namespace detail {

inline void check_compatible(const CQState& state, const Povm& povm) {
  require(povm.dim() == state.adversary_dim(), ErrorCode::DimMismatch, "POVM acts on a different dimension");
  require(povm.size() == state.alphabet_size(), ErrorCode::DimMismatch, "POVM outcome count differs from alphabet");
}

inline double raw_guess_prob(const CQState& state, const std::vector<ComplexMatrix>& elements) {
  double p = 0.0;
  for (std::size_t x = 0; x < state.alphabet_size(); ++x)
    p += state.probs()[x] * std::real(trace_of_product(elements[x], state.cond_states()[x].matrix()));
  return p;
}

}  // namespace detail

/// sum_x p_x Tr[M_x tau_x] for a fixed measurement.
inline double guess_prob(const CQState& state, const Povm& povm) {
  detail::check_compatible(state, povm);
  return std::clamp(detail::raw_guess_prob(state, povm.elements()), 0.0, 1.0);
}

/// Exact optimum for two hypotheses: (1 + ||p0 tau0 - p1 tau1||_1) / 2.
inline double helstrom(const CQState& state) {
  if (state.alphabet_size() != 2) throw Error(ErrorCode::NotBinary, "helstrom needs exactly two hypotheses");
  const ComplexMatrix diff = hermitian_part(state.weighted(0) - state.weighted(1));
  return std::clamp(0.5 * (1.0 + trace_norm(diff)), 0.0, 1.0);
}

/// Projectors onto the positive / non-positive parts of p0 tau0 - p1 tau1.
inline Povm helstrom_povm(const CQState& state) {
  if (state.alphabet_size() != 2) throw Error(ErrorCode::NotBinary, "helstrom needs exactly two hypotheses");
  const EigDecomposition e = eig_hermitian(hermitian_part(state.weighted(0) - state.weighted(1)));
  ComplexMatrix m0 = e.reassemble([](double l) { return l > 0.0 ? 1.0 : 0.0; });
  ComplexMatrix m1 = ComplexMatrix::identity(state.adversary_dim()) - m0;
  return Povm({std::move(m0), std::move(m1)});
}

/// Optimality certificate for minimum-error discrimination:
/// Y = sum_x p_x tau_x M_x must be Hermitian and Y - p_x tau_x PSD for all x.
inline bool dual_certificate(const CQState& state, const Povm& povm, double tol) {
  detail::check_compatible(state, povm);
  ComplexMatrix y(state.adversary_dim());
  for (std::size_t x = 0; x < state.alphabet_size(); ++x) y += state.weighted(x) * povm[x];
  if (y.hermiticity_error() > tol) return false;
  const ComplexMatrix yh = hermitian_part(y);
  for (std::size_t x = 0; x < state.alphabet_size(); ++x)
    if (!is_psd(hermitian_part(yh - state.weighted(x)), tol)) return false;
  return true;
}

struct PovmSearchOptions {
  std::size_t restarts = 8;
  std::size_t iters = 2000;
  std::uint64_t seed = 0;
  double tolerance = 1e-12;  // stop once one refinement step gains less than this
};

struct PovmSearchResult {
  double guess_prob = 0.0;
  Povm povm;
};

namespace detail {

// M_x <- L^+ rho_x M_x rho_x L^+, L = (sum_x rho_x M_x rho_x)^{1/2}; the kernel
// of L is handed to the most likely symbol so completeness is kept.
inline std::vector<ComplexMatrix> refine_step(const std::vector<ComplexMatrix>& weighted,
                                              const std::vector<ComplexMatrix>& elems, std::size_t fallback) {
  const std::size_t dim = weighted.front().dim();
  ComplexMatrix l2(dim);
  std::vector<ComplexMatrix> sandwiches;
  sandwiches.reserve(elems.size());
  for (std::size_t x = 0; x < elems.size(); ++x) {
    sandwiches.push_back(hermitian_part(weighted[x] * elems[x] * weighted[x]));
    l2 += sandwiches.back();
  }
  const EigDecomposition e = eig_hermitian(hermitian_part(l2));
  const double cutoff = 1e-14 * std::max(e.eigenvalues.back(), 1e-300);
  const ComplexMatrix l_pinv = e.reassemble([&](double l) { return l > cutoff ? 1.0 / std::sqrt(l) : 0.0; });
  const ComplexMatrix kernel = e.reassemble([&](double l) { return l > cutoff ? 0.0 : 1.0; });

  std::vector<ComplexMatrix> out;
  out.reserve(elems.size());
  for (std::size_t x = 0; x < elems.size(); ++x) out.push_back(hermitian_part(l_pinv * sandwiches[x] * l_pinv));
  out[fallback] += kernel;
  return out;
}

inline std::vector<ComplexMatrix> pretty_good_measurement(const std::vector<ComplexMatrix>& weighted,
                                                          std::size_t fallback) {
  const std::size_t dim = weighted.front().dim();
  ComplexMatrix s(dim);
  for (const auto& w : weighted) s += w;
  const EigDecomposition e = eig_hermitian(hermitian_part(s));
  const double cutoff = 1e-14 * std::max(e.eigenvalues.back(), 1e-300);
  const ComplexMatrix s_pinv = e.reassemble([&](double l) { return l > cutoff ? 1.0 / std::sqrt(l) : 0.0; });
  std::vector<ComplexMatrix> out;
  for (const auto& w : weighted) out.push_back(hermitian_part(s_pinv * w * s_pinv));
  out[fallback] += e.reassemble([&](double l) { return l > cutoff ? 0.0 : 1.0; });
  return out;
}

}  // namespace detail

/// Heuristic maximizer of the guessing probability over measurements.
///
/// Starting points are the pretty-good measurement and, per restart, a
/// seeded Haar-random orthonormal basis whose vectors are assigned to the
/// symbol with the largest p_x <u|tau_x|u>. Each start is refined by the
/// fixed-point iteration of refine_step. Every iterate is a valid POVM, so
/// the best value seen is a certified lower bound on the optimum.
inline PovmSearchResult povm_search_detailed(const CQState& state, const PovmSearchOptions& opt = {}) {
  const std::size_t d = state.alphabet_size();
  const std::size_t dim = state.adversary_dim();
  if (d > 8 || dim > 16) throw Error(ErrorCode::DimTooLarge, "povm_search supports d <= 8 and dimension <= 16");

  std::vector<ComplexMatrix> weighted;
  for (std::size_t x = 0; x < d; ++x) weighted.push_back(state.weighted(x));
  const std::size_t fallback =
      static_cast<std::size_t>(std::max_element(state.probs().begin(), state.probs().end()) - state.probs().begin());

  // Guessing the most likely symbol without looking is always available.
  std::vector<ComplexMatrix> best(d, ComplexMatrix(dim));
  best[fallback] = ComplexMatrix::identity(dim);
  double best_p = detail::raw_guess_prob(state, best);

  auto refine = [&](std::vector<ComplexMatrix> elems) {
    // Blend with the trivial measurement so no outcome starts at zero.
    for (auto& m : elems) m = m * cplx(0.9) + ComplexMatrix::identity(dim) * cplx(0.1 / static_cast<double>(d));
    double prev = detail::raw_guess_prob(state, elems);
    for (std::size_t it = 0; it < opt.iters; ++it) {
      if (prev > best_p) {
        best_p = prev;
        best = elems;
      }
      elems = detail::refine_step(weighted, elems, fallback);
      const double cur = detail::raw_guess_prob(state, elems);
      if (std::abs(cur - prev) < opt.tolerance) {
        prev = cur;
        break;
      }
      prev = cur;
    }
    if (prev > best_p) {
      best_p = prev;
      best = elems;
    }
  };

  refine(detail::pretty_good_measurement(weighted, fallback));
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    Rng rng(opt.seed + r);
    const ComplexMatrix u = random_unitary(dim, rng);
    std::vector<ComplexMatrix> elems(d, ComplexMatrix(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      CVector col(dim);
      for (std::size_t i = 0; i < dim; ++i) col[i] = u(i, k);
      std::size_t arg = 0;
      double top = -1.0;
      for (std::size_t x = 0; x < d; ++x) {
        const double v = std::real(inner(col, weighted[x] * std::span<const cplx>(col)));
        if (v > top) {
          top = v;
          arg = x;
        }
      }
      elems[arg] += ComplexMatrix::projector(col);
    }
    refine(std::move(elems));
  }

  // Re-symmetrize against drift before validation.
  ComplexMatrix sum(dim);
  for (auto& m : best) {
    m = hermitian_part(m);
    sum += m;
  }
  best[fallback] += ComplexMatrix::identity(dim) - sum;
  Povm povm(std::move(best));
  return {std::clamp(detail::raw_guess_prob(state, povm.elements()), 0.0, 1.0), std::move(povm)};
}

inline double povm_search(const CQState& state, std::size_t restarts, std::size_t iters, std::uint64_t seed = 0) {
  return povm_search_detailed(state, {restarts, iters, seed}).guess_prob;
}

/// Convert a guessing probability to min-entropy in bits.
inline double min_entropy_from_guess(double p_guess) { return -std::log2(p_guess); }

}  // namespace cqe
