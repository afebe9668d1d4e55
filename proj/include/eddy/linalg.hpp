#pragma once

// Dense real linear algebra: row-major matrices, packed symmetric storage,
// Cholesky factorization with triangular solves, a cyclic Jacobi eigensolver
// and partial-pivoting LU.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "eddy/errors.hpp"

namespace eddy {

using Vector = std::vector<double>;

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {
inline std::size_t packed_index(std::size_t i, std::size_t j) noexcept { return i * (i + 1) / 2 + j; }
}  // namespace detail

/// Symmetric matrix holding only its lower triangle, so A = Aᵀ by
/// construction. Dimension zero is allowed and denotes an empty operator.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0) {}

  /// Takes the lower triangle of a square matrix.
  static SymMatrix from_lower(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("SymMatrix needs a square matrix");
    SymMatrix s(m.rows());
    for (std::size_t i = 0; i < s.n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) s.lower(i, j) = m(i, j);
    return s;
  }

  static SymMatrix identity(std::size_t n) {
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) s.lower(i, i) = 1.0;
    return s;
  }

  static SymMatrix diagonal(std::span<const double> d) {
    SymMatrix s(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) s.lower(i, i) = d[i];
    return s;
  }

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    assert(i < n_);
    return data_[detail::packed_index(i, j)];
  }

  /// Mutable access; requires i >= j.
  double& lower(std::size_t i, std::size_t j) {
    assert(i >= j && i < n_);
    return data_[detail::packed_index(i, j)];
  }

  std::span<const double> lower_row(std::size_t i) const {
    return {data_.data() + detail::packed_index(i, 0), i + 1};
  }

  Matrix to_dense() const {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = data_[detail::packed_index(i, j)];
    return m;
  }

  SymMatrix& operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  const std::vector<double>& packed() const noexcept { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Lower-triangular factor with a strictly positive diagonal.
class LowerTriangular {
 public:
  LowerTriangular() = default;
  explicit LowerTriangular(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0) {}

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (j > i) return 0.0;
    return data_[detail::packed_index(i, j)];
  }
  double& at(std::size_t i, std::size_t j) {
    assert(i >= j && i < n_);
    return data_[detail::packed_index(i, j)];
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + detail::packed_index(i, 0), i + 1};
  }

  Matrix to_dense() const {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) m(i, j) = data_[detail::packed_index(i, j)];
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Small helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) s += m.data()[i] * m.data()[i];
  return std::sqrt(s);
}

inline double frobenius_norm(const SymMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) s += (i == j ? 1.0 : 2.0) * m(i, j) * m(i, j);
  return std::sqrt(s);
}

inline Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matrix-vector product: column count differs");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

inline Vector multiply(const SymMatrix& a, std::span<const double> x) {
  const std::size_t n = a.size();
  if (n != x.size()) throw DimensionMismatch("symmetric matrix-vector product: size differs");
  Vector y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = a.lower_row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      s += row[j] * x[j];
      y[j] += row[j] * x[i];
    }
    y[i] += s + row[i] * x[i];
  }
  return y;
}

/// yᵀ = xᵀ A, i.e. Aᵀ x.
inline Vector multiply_transposed(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionMismatch("transposed product: row count differs");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * xi;
  }
  return y;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

/// Aᵀ B without forming the transpose.
inline Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionMismatch("transposed matrix product: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Cholesky

/// A = C Cᵀ. Throws NotPositiveDefinite at the first pivot that is not
/// strictly positive.
inline LowerTriangular cholesky(const SymMatrix& a) {
  const std::size_t n = a.size();
  LowerTriangular c(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto ai = a.lower_row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      auto ci = c.row(i);
      auto cj = c.row(j);
      double s = ai[j];
      for (std::size_t k = 0; k < j; ++k) s -= ci[k] * cj[k];
      if (i == j) {
        if (!(s > 0.0)) throw NotPositiveDefinite(i, s);
        c.at(i, i) = std::sqrt(s);
      } else {
        c.at(i, j) = s / cj[j];
      }
    }
  }
  return c;
}

/// Solves C y = b in place.
inline void forward_substitute(const LowerTriangular& c, std::span<double> b) {
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto ci = c.row(i);
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= ci[k] * b[k];
    b[i] = s / ci[i];
  }
}

/// Solves Cᵀ x = y in place (row-oriented sweep over the packed rows of C).
inline void backward_substitute(const LowerTriangular& c, std::span<double> y) {
  const std::size_t n = c.size();
  for (std::size_t i = n; i-- > 0;) {
    auto ci = c.row(i);
    const double xi = y[i] / ci[i];
    y[i] = xi;
    for (std::size_t k = 0; k < i; ++k) y[k] -= ci[k] * xi;
  }
}

inline void solve_cholesky_in_place(const LowerTriangular& c, std::span<double> b) {
  if (b.size() != c.size()) throw DimensionMismatch("Cholesky solve: right-hand side length differs");
  forward_substitute(c, b);
  backward_substitute(c, b);
}

inline Vector solve_cholesky(const LowerTriangular& c, std::span<const double> b) {
  Vector x(b.begin(), b.end());
  solve_cholesky_in_place(c, x);
  return x;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver

struct SymEigen {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, vectors(:, k) pairs with values[k]
  int sweeps = 0;
};

struct JacobiOptions {
  double tolerance = 1e-14;  // off-diagonal Frobenius norm relative to ‖A‖_F
  int max_sweeps = 50;
};

/// Cyclic Jacobi rotations. Eigenvalues are returned in descending order,
/// ties resolved by the original diagonal position.
inline SymEigen sym_eig(const SymMatrix& input, JacobiOptions opts = {}) {
  const std::size_t n = input.size();
  SymEigen out;
  Matrix a = input.to_dense();
  Matrix vt = Matrix::identity(n);  // row k holds eigenvector k

  const double scale = frobenius_norm(a);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  bool converged = (n <= 1) || scale == 0.0;
  int sweep = 0;
  while (!converged) {
    if (off_norm() <= opts.tolerance * scale) {
      converged = true;
      break;
    }
    if (sweep == opts.max_sweeps) break;
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      auto rp = a.row(p);
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = rp[q];
        if (apq == 0.0) continue;
        auto rq = a.row(q);
        const double app = rp[p];
        const double aqq = rq[q];
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          rp[q] = 0.0;
          rq[p] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = rp[k];
          const double akq = rq[k];
          rp[k] = c * akp - s * akq;
          rq[k] = s * akp + c * akq;
        }
        rp[p] = app - t * apq;
        rq[q] = aqq + t * apq;
        rp[q] = 0.0;
        rq[p] = 0.0;
        // Column p is mirrored once after the q loop; column q is needed now.
        for (std::size_t k = 0; k < n; ++k)
          if (k != p && k != q) a(k, q) = rq[k];
        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
      for (std::size_t k = 0; k < n; ++k)
        if (k != p) a(k, p) = rp[k];
    }
  }
  if (!converged) throw NoConvergence("Jacobi eigensolver exceeded " + std::to_string(opts.max_sweeps) + " sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    auto v = vt.row(order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v[i];
  }
  out.sweeps = sweep;
  return out;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting (general square systems)

inline Vector lu_solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw DimensionMismatch("LU solve: system is not square or rhs length differs");
  double scale = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a.data()[i]));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    if (best == 0.0 || best <= 1e-300 * scale)
      throw SingularSystem("LU solve: zero pivot in column " + std::to_string(k));
    if (piv != k) {
      auto rk = a.row(k);
      auto rp = a.row(piv);
      std::swap_ranges(rk.begin(), rk.end(), rp.begin());
      std::swap(b[k], b[piv]);
    }
    auto rk = a.row(k);
    const double inv = 1.0 / rk[k];
    for (std::size_t i = k + 1; i < n; ++i) {
      auto ri = a.row(i);
      const double f = ri[k] * inv;
      if (f == 0.0) continue;
      ri[k] = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= f * rk[j];
      b[i] -= f * b[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    auto ri = a.row(i);
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= ri[j] * b[j];
    b[i] = s / ri[i];
  }
  return b;
}

}  // namespace eddy
