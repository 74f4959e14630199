#pragma once

// Dense complex linear algebra at small dimension.
//
// Everything here is a pure function of its inputs. Matrices are square,
// row-major and owned by value.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "cqe/error.hpp"

namespace cqe {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kDensityEigTol = 1e-9;
inline constexpr double kTraceTol = 1e-9;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  explicit ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {
    detail::require(dim >= 1, ErrorCode::DimMismatch, "matrix dimension must be at least 1");
  }

  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
      : ComplexMatrix(rows.size()) {
    std::size_t r = 0;
    for (const auto& row : rows) {
      detail::require(row.size() == dim_, ErrorCode::DimMismatch, "matrix must be square");
      std::size_t c = 0;
      for (const auto& v : row) (*this)(r, c++) = v;
      ++r;
    }
  }

  static ComplexMatrix zero(std::size_t dim) { return ComplexMatrix(dim); }

  static ComplexMatrix identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> values) {
    ComplexMatrix m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  /// |u><v|
  static ComplexMatrix outer(std::span<const cplx> u, std::span<const cplx> v) {
    detail::require(u.size() == v.size(), ErrorCode::DimMismatch, "outer product of unequal vectors");
    ComplexMatrix m(u.size());
    for (std::size_t r = 0; r < u.size(); ++r)
      for (std::size_t c = 0; c < v.size(); ++c) m(r, c) = u[r] * std::conj(v[c]);
    return m;
  }

  static ComplexMatrix projector(std::span<const cplx> v) { return outer(v, v); }

  std::size_t dim() const noexcept { return dim_; }

  cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * dim_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * dim_ + c]; }

  std::span<const cplx> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) m(c, r) = std::conj((*this)(r, c));
    return m;
  }

  cplx trace() const noexcept {
    cplx t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  /// max_{rc} |A_rc - conj(A_cr)|
  double hermiticity_error() const noexcept {
    double err = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = r; c < dim_; ++c)
        err = std::max(err, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    return err;
  }

  bool is_hermitian(double tol = kHermitianTol) const noexcept { return hermiticity_error() <= tol; }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) noexcept {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    a.check_same(b);
    const std::size_t n = a.dim_;
    ComplexMatrix m(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < n; ++k) {
        const cplx ark = a(r, k);
        if (ark == cplx{}) continue;
        for (std::size_t c = 0; c < n; ++c) m(r, c) += ark * b(k, c);
      }
    return m;
  }

  friend CVector operator*(const ComplexMatrix& a, std::span<const cplx> v) {
    detail::require(v.size() == a.dim_, ErrorCode::DimMismatch, "matrix-vector dimension mismatch");
    CVector out(a.dim_);
    for (std::size_t r = 0; r < a.dim_; ++r)
      for (std::size_t c = 0; c < a.dim_; ++c) out[r] += a(r, c) * v[c];
    return out;
  }

  double max_abs_diff(const ComplexMatrix& o) const {
    check_same(o);
    double m = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - o.data_[i]));
    return m;
  }

  /// Kronecker product a (x) b.
  friend ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t n = a.dim_ * b.dim_;
    ComplexMatrix m(n);
    for (std::size_t ar = 0; ar < a.dim_; ++ar)
      for (std::size_t ac = 0; ac < a.dim_; ++ac)
        for (std::size_t br = 0; br < b.dim_; ++br)
          for (std::size_t bc = 0; bc < b.dim_; ++bc)
            m(ar * b.dim_ + br, ac * b.dim_ + bc) = a(ar, ac) * b(br, bc);
    return m;
  }

 private:
  void check_same(const ComplexMatrix& o) const {
    detail::require(dim_ == o.dim_, ErrorCode::DimMismatch, "matrix dimensions differ");
  }

  std::size_t dim_ = 0;
  std::vector<cplx> data_;
};

/// Tr[a b] without forming the product.
inline cplx trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require(a.dim() == b.dim(), ErrorCode::DimMismatch, "matrix dimensions differ");
  cplx t = 0.0;
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (std::size_t k = 0; k < a.dim(); ++k) t += a(r, k) * b(k, r);
  return t;
}

inline cplx inner(std::span<const cplx> u, std::span<const cplx> v) {
  detail::require(u.size() == v.size(), ErrorCode::DimMismatch, "inner product of unequal vectors");
  cplx s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

inline double norm2(std::span<const cplx> v) { return std::real(inner(v, v)); }

inline CVector kron(std::span<const cplx> a, std::span<const cplx> b) {
  CVector out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return out;
}

struct EigDecomposition {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // column k belongs to eigenvalues[k]

  CVector column(std::size_t k) const {
    CVector v(eigenvectors.dim());
    for (std::size_t r = 0; r < v.size(); ++r) v[r] = eigenvectors(r, k);
    return v;
  }

  /// V diag(f(lambda)) V^dagger
  template <class F>
  ComplexMatrix reassemble(F&& f) const {
    const std::size_t n = eigenvectors.dim();
    ComplexMatrix m(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double w = f(eigenvalues[k]);
      if (w == 0.0) continue;
      for (std::size_t r = 0; r < n; ++r) {
        const cplx vr = eigenvectors(r, k) * w;
        for (std::size_t c = 0; c < n; ++c) m(r, c) += vr * std::conj(eigenvectors(c, k));
      }
    }
    return m;
  }

  ComplexMatrix reassemble() const {
    return reassemble([](double x) { return x; });
  }
};

namespace detail {

// Rotate one column so its largest-magnitude entry (first one on ties) is
// real and positive. Removes the arbitrary phase of eigenvectors.
inline void fix_phase(ComplexMatrix& v, std::size_t col) {
  const std::size_t n = v.dim();
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double a = std::abs(v(r, col));
    if (a > best_abs + 1e-12) {
      best_abs = a;
      best = r;
    }
  }
  if (best_abs <= 0.0) return;
  const cplx phase = std::conj(v(best, col)) / best_abs;
  for (std::size_t r = 0; r < n; ++r) v(r, col) *= phase;
}

inline bool lex_less(const ComplexMatrix& v, std::size_t a, std::size_t b) {
  for (std::size_t r = 0; r < v.dim(); ++r) {
    const cplx x = v(r, a), y = v(r, b);
    if (x.real() != y.real()) return x.real() < y.real();
    if (x.imag() != y.imag()) return x.imag() < y.imag();
  }
  return false;
}

}  // namespace detail

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first strips the phase of the pivot a_pq with a diagonal
/// unitary, then applies the classic real Jacobi rotation. Eigenvalues come
/// back ascending; eigenvector phases are fixed so the largest component is
/// real positive, and exact ties are ordered lexicographically on the
/// eigenvector entries.
inline EigDecomposition eig_hermitian(const ComplexMatrix& m) {
  detail::require(m.dim() >= 1, ErrorCode::DimMismatch, "empty matrix");
  detail::require(m.all_finite(), ErrorCode::NotHermitian, "matrix has non-finite entries");
  if (!m.is_hermitian()) throw Error(ErrorCode::NotHermitian, "eig_hermitian requires a Hermitian matrix");

  const std::size_t n = m.dim();
  ComplexMatrix a = m;
  // Exact Hermitian symmetrization so rounding does not leak in.
  for (std::size_t r = 0; r < n; ++r) {
    a(r, r) = a(r, r).real();
    for (std::size_t c = r + 1; c < n; ++c) {
      const cplx avg = 0.5 * (a(r, c) + std::conj(a(c, r)));
      a(r, c) = avg;
      a(c, r) = std::conj(avg);
    }
  }
  ComplexMatrix v = ComplexMatrix::identity(n);

  double scale = 0.0;
  for (const auto& z : a.data()) scale += std::norm(z);
  scale = std::sqrt(scale);

  const std::size_t max_sweeps = 100 * n * n;
  bool converged = (n == 1) || scale == 0.0;
  for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(2.0 * off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx b = a(p, q);
        const double absb = std::abs(b);
        if (absb <= 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Rotation would be below working precision.
        if (absb < 1e-18 * (std::abs(app) + std::abs(aqq)) ) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const cplx e = b / absb;
        const double theta = (aqq - app) / (2.0 * absb);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const cplx ce = std::conj(e);

        // A <- A V with V_pp = c, V_pq = s, V_qp = -s conj(e), V_qq = c conj(e)
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * ce * akq;
          a(k, q) = s * akp + c * ce * akq;
        }
        // A <- V^dagger A
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * e * aqk;
          a(q, k) = s * apk + c * e * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * ce * vkq;
          v(k, q) = s * vkp + c * ce * vkq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "Jacobi sweep budget exhausted");

  for (std::size_t k = 0; k < n; ++k) detail::fix_phase(v, k);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double lx = a(x, x).real(), ly = a(y, y).real();
    if (lx != ly) return lx < ly;
    return detail::lex_less(v, x, y);
  });

  EigDecomposition out{std::vector<double>(n), ComplexMatrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
  }
  return out;
}

inline std::vector<double> eigenvalues_hermitian(const ComplexMatrix& m) { return eig_hermitian(m).eigenvalues; }

/// Sum of absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const ComplexMatrix& m) {
  if (!m.is_hermitian()) throw Error(ErrorCode::NotHermitian, "trace_norm requires a Hermitian matrix");
  double s = 0.0;
  for (double l : eigenvalues_hermitian(m)) s += std::abs(l);
  return s;
}

inline bool is_psd(const ComplexMatrix& m, double tol) {
  if (!m.is_hermitian()) throw Error(ErrorCode::NotHermitian, "is_psd requires a Hermitian matrix");
  return eigenvalues_hermitian(m).front() >= -tol;
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues are treated as zero.
inline ComplexMatrix sqrt_psd(const ComplexMatrix& m) {
  return eig_hermitian(m).reassemble([](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

/// Hermitian part (A + A^dagger)/2; used to scrub rounding asymmetry.
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) * cplx(0.5); }

class DensityMatrix {
 public:
  /// Validates the density-operator invariants; throws InvalidState otherwise.
  explicit DensityMatrix(ComplexMatrix m) : mat_(std::move(m)) {
    detail::require(mat_.dim() >= 1 && mat_.all_finite(), ErrorCode::InvalidState, "density matrix has bad entries");
    if (!mat_.is_hermitian()) throw Error(ErrorCode::NotHermitian, "density matrix must be Hermitian");
    detail::require(std::abs(mat_.trace() - cplx(1.0)) <= kTraceTol, ErrorCode::InvalidState,
                    "density matrix trace differs from 1");
    detail::require(eigenvalues_hermitian(mat_).front() >= -kDensityEigTol, ErrorCode::InvalidState,
                    "density matrix has a negative eigenvalue");
  }

  /// Builds from noisy data: eigenvalues in [-1e-9, 0) are clamped to zero
  /// and the spectrum renormalized; anything more negative is rejected.
  static DensityMatrix from_noisy(const ComplexMatrix& m) {
    if (!m.is_hermitian()) throw Error(ErrorCode::NotHermitian, "density matrix must be Hermitian");
    EigDecomposition e = eig_hermitian(m);
    double total = 0.0;
    for (double& l : e.eigenvalues) {
      if (l < -kDensityEigTol) throw Error(ErrorCode::InvalidState, "eigenvalue below clipping tolerance");
      if (l < 0.0) l = 0.0;
      total += l;
    }
    detail::require(total > 0.0, ErrorCode::InvalidState, "density matrix has zero trace");
    for (double& l : e.eigenvalues) l /= total;
    return DensityMatrix(hermitian_part(e.reassemble()));
  }

  static DensityMatrix pure(std::span<const cplx> ket) {
    const double nrm = norm2(ket);
    detail::require(nrm > 0.0, ErrorCode::InvalidState, "zero ket");
    ComplexMatrix p = ComplexMatrix::projector(ket);
    p *= cplx(1.0 / nrm);
    return DensityMatrix(std::move(p));
  }

  static DensityMatrix maximally_mixed(std::size_t dim) {
    return DensityMatrix(ComplexMatrix::identity(dim) * cplx(1.0 / static_cast<double>(dim)));
  }

  std::size_t dim() const noexcept { return mat_.dim(); }
  const ComplexMatrix& matrix() const noexcept { return mat_; }
  operator const ComplexMatrix&() const noexcept { return mat_; }

 private:
  ComplexMatrix mat_;
};

/// Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a)), clamped to [0, 1].
inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  detail::require(a.dim() == b.dim(), ErrorCode::DimMismatch, "fidelity of states with different dimension");
  const ComplexMatrix sa = sqrt_psd(a.matrix());
  const ComplexMatrix inner_m = hermitian_part(sa * b.matrix() * sa);
  double f = 0.0;
  for (double l : eigenvalues_hermitian(inner_m)) f += l > 0.0 ? std::sqrt(l) : 0.0;
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace cqe
