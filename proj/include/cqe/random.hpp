#pragma once

// Seeded random objects: kets, unitaries, density matrices, simplex points.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cqe/qmath.hpp"

namespace cqe {

using Rng = std::mt19937_64;

inline CVector random_ket(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g;
  CVector v(dim);
  for (auto& z : v) z = {g(rng), g(rng)};
  const double n = std::sqrt(norm2(v));
  for (auto& z : v) z /= n;
  return v;
}

/// Unitary from Gram-Schmidt on a complex Gaussian matrix (Haar distributed).
inline ComplexMatrix random_unitary(std::size_t dim, Rng& rng) {
  std::vector<CVector> cols;
  cols.reserve(dim);
  while (cols.size() < dim) {
    CVector v = random_ket(dim, rng);
    for (const auto& u : cols) {
      const cplx proj = inner(u, v);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * u[i];
    }
    const double n = std::sqrt(norm2(v));
    if (n < 1e-8) continue;
    for (auto& z : v) z /= n;
    cols.push_back(std::move(v));
  }
  ComplexMatrix u(dim);
  for (std::size_t c = 0; c < dim; ++c)
    for (std::size_t r = 0; r < dim; ++r) u(r, c) = cols[c][r];
  return u;
}

/// Ginibre-distributed mixed state G G^dagger / Tr, with G of the given rank.
inline DensityMatrix random_density(std::size_t dim, Rng& rng, std::size_t rank = 0) {
  if (rank == 0 || rank > dim) rank = dim;
  ComplexMatrix m(dim);
  for (std::size_t k = 0; k < rank; ++k) {
    const CVector v = random_ket(dim, rng);
    m += ComplexMatrix::projector(v);
  }
  m *= cplx(1.0 / std::real(m.trace()));
  return DensityMatrix::from_noisy(hermitian_part(m));
}

inline ComplexMatrix random_hermitian(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    m(r, r) = g(rng);
    for (std::size_t c = r + 1; c < dim; ++c) {
      m(r, c) = {g(rng), g(rng)};
      m(c, r) = std::conj(m(r, c));
    }
  }
  return m;
}

/// Uniform point on the probability simplex (flat Dirichlet).
inline std::vector<double> random_simplex(std::size_t d, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(d);
  double s = 0.0;
  for (auto& x : p) s += (x = e(rng));
  for (auto& x : p) x /= s;
  return p;
}

}  // namespace cqe
