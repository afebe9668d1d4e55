#pragma once

// Generalized eigenproblem L v = τ R v for the internal dynamics. Columns of V
// are R-orthonormal, so VᵀRV = I and VᵀLV = diag(τ), and every mode decays
// independently with time constant τ_n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "eddy/errors.hpp"
#include "eddy/linalg.hpp"
#include "eddy/parallel.hpp"
#include "eddy/reduction.hpp"

namespace eddy {

struct ModalBasis {
  Matrix vectors;     // V, column n is mode n
  Vector tau;         // time constants (s), descending
  Vector inductance;  // L_n = v_nᵀ L v_n
  Vector resistance;  // R_n = v_nᵀ R v_n
  Matrix projector;   // Vᵀ R, maps internal currents to modal amplitudes

  std::size_t size() const { return tau.size(); }
};

namespace detail {

/// Exact power of two near the mean diagonal, so R/s is an exact rescaling.
inline double power_of_two_scale(const SymMatrix& r) {
  double mean = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) mean += r(i, i);
  mean /= static_cast<double>(r.size());
  int e = 0;
  std::frexp(mean, &e);
  return std::ldexp(1.0, e - 1);  // mean / s in [1, 2)
}

/// Makes the largest-magnitude entry positive. Entries within a relative
/// 1e-8 of the maximum count as ties, resolved by the lowest index, so that
/// rounding cannot flip the sign of symmetric modes.
inline void normalize_sign(Matrix& v, std::size_t col) {
  double best = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i) best = std::max(best, std::abs(v(i, col)));
  std::size_t arg = 0;
  while (arg < v.rows() && std::abs(v(arg, col)) < best * (1.0 - 1e-8)) ++arg;
  if (arg < v.rows() && v(arg, col) < 0.0)
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, col) = -v(i, col);
}

inline double quadratic_form(const SymMatrix& a, std::span<const double> x) { return dot(x, multiply(a, x)); }

}  // namespace detail

/// Solves L v = τ R v via the Cholesky factor of R and a symmetric Jacobi
/// eigensolve of G⁻¹ L G⁻ᵀ. Each column's largest-magnitude entry is positive.
inline ModalBasis generalized_eig(const SymMatrix& l, const SymMatrix& r, JacobiOptions opts = {}) {
  const std::size_t n = r.size();
  if (l.size() != n) throw DimensionMismatch("L and R must have the same size");
  ModalBasis mb;
  if (n == 0) return mb;

  const double s = detail::power_of_two_scale(r);
  SymMatrix rs = r;
  rs *= 1.0 / s;
  const LowerTriangular g = cholesky(rs);
  cholesky(l);  // L must be positive definite too

  // X = G⁻¹ L, built column by column (columns of L are its rows).
  Matrix xt(n, n);  // row j = column j of X
  parallel_for(n, [&](std::size_t j) {
    auto row = xt.row(j);
    for (std::size_t i = 0; i < n; ++i) row[i] = l(j, i);
    forward_substitute(g, row);
  });
  // B = G⁻¹ Xᵀ; column i of B needs column i of Xᵀ, i.e. row i of X.
  const Matrix x = xt.transposed();
  Matrix bt(n, n);
  parallel_for(n, [&](std::size_t i) {
    auto row = bt.row(i);
    auto src = x.row(i);
    std::copy(src.begin(), src.end(), row.begin());
    forward_substitute(g, row);
  });
  SymMatrix b(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) b.lower(i, j) = 0.5 * (bt(i, j) + bt(j, i));

  const SymEigen eig = sym_eig(b, opts);

  mb.vectors = Matrix(n, n);
  mb.tau.resize(n);
  const double root_s = std::sqrt(s);
  Matrix vt(n, n);  // row k = mode k
  parallel_for(n, [&](std::size_t k) {
    auto row = vt.row(k);
    for (std::size_t i = 0; i < n; ++i) row[i] = eig.vectors(i, k);
    backward_substitute(g, row);
    for (auto& v : row) v /= root_s;
  });
  for (std::size_t k = 0; k < n; ++k) {
    mb.tau[k] = eig.values[k] / s;
    for (std::size_t i = 0; i < n; ++i) mb.vectors(i, k) = vt(k, i);
    detail::normalize_sign(mb.vectors, k);
  }
  for (std::size_t k = 0; k < n; ++k)
    if (!(mb.tau[k] > 0.0)) throw NotPositiveDefinite(k, mb.tau[k]);

  mb.inductance.resize(n);
  mb.resistance.resize(n);
  mb.projector = Matrix(n, n);
  parallel_for(n, [&](std::size_t k) {
    const Vector v = mb.vectors.column(k);
    const Vector rv = multiply(r, v);
    mb.resistance[k] = dot(v, rv);
    mb.inductance[k] = detail::quadratic_form(l, v);
    std::copy(rv.begin(), rv.end(), mb.projector.row(k).begin());
  });
  return mb;
}

/// Modal amplitudes a = Vᵀ R I.
inline Vector to_modal(const ModalBasis& mb, std::span<const double> internal) {
  return multiply(mb.projector, internal);
}

/// Internal currents I = V a.
inline Vector from_modal(const ModalBasis& mb, std::span<const double> amplitudes) {
  return multiply(mb.vectors, amplitudes);
}

/// Drive coupling matrices projected onto the modes.
struct ModalDrive {
  Matrix resistance;  // Vᵀ R_D
  Matrix inductance;  // Vᵀ L_D
  Matrix coils;       // Vᵀ M₀
};

inline ModalDrive project_drive(const ModalBasis& mb, const ReducedModel& rm) {
  if (mb.size() != rm.n_internal()) throw DimensionMismatch("modal basis does not match the reduced model");
  return {multiply_transposed(mb.vectors, rm.drive_resistance), multiply_transposed(mb.vectors, rm.drive_inductance),
          multiply_transposed(mb.vectors, rm.coil_mutual)};
}

/// Vᵀ(−Δt R_D i_D − (L_D + Δtθ R_D) δi_D − M₀ δi₀): the drive part of the
/// θ-method right-hand side in modal coordinates.
inline Vector modal_forcing(const ModalBasis& mb, const ReducedModel& rm, std::span<const double> i_d,
                            std::span<const double> di_d, std::span<const double> di0, double dt, double theta) {
  const std::size_t n = rm.n_internal();
  if (mb.size() != n) throw DimensionMismatch("modal basis does not match the reduced model");
  if (i_d.size() != rm.n_ports() || di_d.size() != rm.n_ports() || di0.size() != rm.n_coils())
    throw DimensionMismatch("drive vectors have the wrong length");
  Vector rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double f = 0.0;
    for (std::size_t p = 0; p < rm.n_ports(); ++p)
      f -= dt * rm.drive_resistance(i, p) * i_d[p] +
           (rm.drive_inductance(i, p) + dt * theta * rm.drive_resistance(i, p)) * di_d[p];
    for (std::size_t c = 0; c < rm.n_coils(); ++c) f -= rm.coil_mutual(i, c) * di0[c];
    rhs[i] = f;
  }
  return multiply_transposed(mb.vectors, rhs);
}

/// Time constant of the slowest mode by power iteration on R⁻¹L; avoids a
/// full eigensolve where only the settle time is needed.
inline double dominant_time_constant(const SymMatrix& l, const SymMatrix& r, int iterations = 500,
                                     double tolerance = 1e-12) {
  const std::size_t n = r.size();
  if (n == 0) return 0.0;
  const LowerTriangular c = cholesky(r);
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  double tau = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = multiply(l, x);
    const double num = dot(x, y);
    solve_cholesky_in_place(c, y);
    const double den = detail::quadratic_form(r, x);
    const double next = num / den;
    const double nrm = norm2(y);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / nrm;
    if (it > 0 && std::abs(next - tau) <= tolerance * next) return next;
    tau = next;
  }
  return tau;
}

}  // namespace eddy
