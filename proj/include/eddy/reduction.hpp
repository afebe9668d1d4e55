#pragma once

// Splits basis coordinates into internal (no electrode flux) currents and the
// electrode lift, and projects the dynamics onto the internal subspace:
//
//   R_i I_i + L_i I_i' = −R_D i_D − L_D i_D' − M₀ i₀'
//
// with R_i = Kᵀ R_X K, L_i = Kᵀ L_X K, R_D = Kᵀ R_X Eᵀ (EEᵀ)⁻¹ and
// L_D = Kᵀ L_X Eᵀ (EEᵀ)⁻¹ + Kᵀ M_port.

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <vector>

#include "eddy/current_basis.hpp"
#include "eddy/errors.hpp"
#include "eddy/inductance.hpp"
#include "eddy/linalg.hpp"

namespace eddy {

struct ReducedModel {
  SymMatrix resistance;      // R_i, N₀ × N₀ (Ω)
  SymMatrix inductance;      // L_i, N₀ × N₀ (H)
  Matrix drive_resistance;   // R_D, N₀ × ports (Ω)
  Matrix drive_inductance;   // L_D, N₀ × ports (H)
  Matrix coil_mutual;        // M₀, N₀ × free coils (H)
  Matrix lift;               // Eᵀ(EEᵀ)⁻¹, N_X × ports
  std::vector<SparseColumn> kernel;  // K, N_X × N₀
  std::size_t n_coordinates = 0;     // N_X

  std::size_t n_internal() const { return resistance.size(); }
  std::size_t n_ports() const { return drive_resistance.cols(); }
  std::size_t n_coils() const { return coil_mutual.cols(); }

  /// Basis coordinates K·I_i + lift·i_D.
  Vector coordinates(std::span<const double> internal, std::span<const double> port_currents) const {
    if (internal.size() != n_internal() || port_currents.size() != n_ports())
      throw DimensionMismatch("state or port current vector has the wrong length");
    Vector x = multiply(lift, port_currents);
    if (x.empty()) x.assign(n_coordinates, 0.0);
    for (std::size_t j = 0; j < kernel.size(); ++j)
      for (const auto& e : kernel[j]) x[e.index] += e.sign * internal[j];
    return x;
  }
};

namespace detail {

inline LowerTriangular electrode_gram_factor(const IntMatrix& e) {
  SymMatrix g(e.rows);
  for (std::size_t i = 0; i < e.rows; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      std::int64_t s = 0;
      for (std::size_t c = 0; c < e.cols; ++c) s += e(i, c) * e(j, c);
      g.lower(i, j) = static_cast<double>(s);
    }
  try {
    return cholesky(g);
  } catch (const NotPositiveDefinite&) {
    throw RankDeficient("electrode incidence matrix is rank deficient");
  }
}

}  // namespace detail

/// Eᵀ(EEᵀ)⁻¹, one column per port.
inline Matrix electrode_lift(const IntMatrix& e) {
  const auto gram = detail::electrode_gram_factor(e);
  Matrix lift(e.cols, e.rows);
  for (std::size_t k = 0; k < e.rows; ++k) {
    Vector unit(e.rows, 0.0);
    unit[k] = 1.0;
    const Vector y = solve_cholesky(gram, unit);
    for (std::size_t c = 0; c < e.cols; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < e.rows; ++r) s += static_cast<double>(e(r, c)) * y[r];
      lift(c, k) = s;
    }
  }
  return lift;
}

/// Minimum-norm coordinates carrying the prescribed port currents.
inline Vector lift_electrode_currents(const IntMatrix& e, std::span<const double> port_currents) {
  if (port_currents.size() != e.rows) throw DimensionMismatch("one current per port expected");
  return multiply(electrode_lift(e), port_currents);
}

/// Integer null-space basis of E by fraction-free Gauss–Jordan elimination.
inline std::vector<SparseColumn> integer_kernel(const IntMatrix& e) {
  IntMatrix m = e;
  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  auto reduce_row = [&](std::size_t r) {
    std::int64_t g = 0;
    for (std::size_t c = 0; c < m.cols; ++c) g = std::gcd(g, m(r, c));
    if (g > 1)
      for (std::size_t c = 0; c < m.cols; ++c) m(r, c) /= g;
  };
  for (std::size_t c = 0; c < m.cols && row < m.rows; ++c) {
    std::size_t piv = row;
    while (piv < m.rows && m(piv, c) == 0) ++piv;
    if (piv == m.rows) continue;
    if (piv != row)
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(piv, j), m(row, j));
    const std::int64_t p = m(row, c);
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == row || m(i, c) == 0) continue;
      const std::int64_t f = m(i, c);
      for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = p * m(i, j) - f * m(row, j);
      reduce_row(i);
    }
    pivot_col.push_back(c);
    ++row;
  }
  std::vector<bool> is_pivot(m.cols, false);
  for (auto c : pivot_col) is_pivot[c] = true;

  std::vector<SparseColumn> kernel;
  for (std::size_t f = 0; f < m.cols; ++f) {
    if (is_pivot[f]) continue;
    std::int64_t scale = 1;
    for (std::size_t r = 0; r < pivot_col.size(); ++r)
      if (m(r, f) != 0) scale = std::lcm(scale, std::abs(m(r, pivot_col[r])));
    std::vector<std::int64_t> v(m.cols, 0);
    v[f] = scale;
    for (std::size_t r = 0; r < pivot_col.size(); ++r)
      if (m(r, f) != 0) v[pivot_col[r]] = -m(r, f) * (scale / m(r, pivot_col[r]));
    std::int64_t g = 0;
    for (auto x : v) g = std::gcd(g, x);
    SparseColumn col;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0) col.push_back({i, static_cast<int>(v[i] / g)});
    kernel.push_back(std::move(col));
  }
  return kernel;
}

/// R_X = Wᵀ R_b W and L_X = Wᵀ L_b W, exploiting the sparsity of W.
struct CoordinateMatrices {
  SymMatrix resistance;
  SymMatrix inductance;
};

inline CoordinateMatrices coordinate_matrices(const BranchMatrices& bm, const CurrentBasis& basis) {
  const std::size_t nx = basis.size();
  const std::size_t nb = basis.n_branches;
  if (bm.resistance.size() != nb) throw DimensionMismatch("branch matrices do not match the basis");
  CoordinateMatrices out{SymMatrix(nx), SymMatrix(nx)};

  // Column lists per branch for R_X, which only couples columns sharing a branch.
  std::vector<std::vector<SignedEntry>> by_branch(nb);
  for (std::size_t j = 0; j < nx; ++j)
    for (const auto& e : basis.columns[j]) by_branch[e.index].push_back({j, e.sign});
  for (std::size_t b = 0; b < nb; ++b)
    for (const auto& p : by_branch[b])
      for (const auto& q : by_branch[b])
        if (q.index <= p.index) out.resistance.lower(p.index, q.index) += bm.resistance[b] * p.sign * q.sign;

  // T = L_b W stored transposed (row j = column j of T), then L_X = Wᵀ T.
  const Matrix lb = bm.inductance.to_dense();
  Matrix tt(nx, nb);
  parallel_for(nx, [&](std::size_t j) {
    auto row = tt.row(j);
    for (const auto& e : basis.columns[j]) {
      auto l = lb.row(e.index);
      for (std::size_t b = 0; b < nb; ++b) row[b] += e.sign * l[b];
    }
  });
  parallel_for(nx, [&](std::size_t i) {
    for (std::size_t j = 0; j <= i; ++j) {
      auto t = tt.row(j);
      double s = 0.0;
      for (const auto& e : basis.columns[i]) s += e.sign * t[e.index];
      out.inductance.lower(i, j) = s;
    }
  });
  return out;
}

/// General projection from coordinate-space matrices. `kernel` must span
/// ker(E); E·K = 0 is checked exactly.
inline ReducedModel project_coordinates(const SymMatrix& r_x, const SymMatrix& l_x, const IntMatrix& e,
                                        std::vector<SparseColumn> kernel, const Matrix& port_mutual = {},
                                        const Matrix& free_mutual = {}) {
  const std::size_t nx = r_x.size();
  if (l_x.size() != nx || (e.rows > 0 && e.cols != nx)) throw DimensionMismatch("R_X, L_X and E sizes disagree");
  const std::size_t ports = e.rows;
  const std::size_t n0 = kernel.size();
  if (n0 + ports != nx) throw RankDeficient("kernel dimension does not equal N_X − (N_e − 1)");
  for (const auto& col : kernel)
    for (std::size_t r = 0; r < ports; ++r) {
      std::int64_t s = 0;
      for (const auto& k : col) s += e(r, k.index) * k.sign;
      if (s != 0) throw ValidationError("kernel column is not in ker(E)");
    }

  ReducedModel rm;
  rm.n_coordinates = nx;
  rm.kernel = std::move(kernel);
  rm.lift = ports > 0 ? electrode_lift(e) : Matrix(nx, 0);

  // Tᵀ = (M K)ᵀ: row j holds M·K_j.
  auto project = [&](const SymMatrix& m, SymMatrix& inner, Matrix& drive) {
    const Matrix dense = m.to_dense();
    Matrix tt(n0, nx);
    parallel_for(n0, [&](std::size_t j) {
      auto row = tt.row(j);
      for (const auto& k : rm.kernel[j]) {
        auto mrow = dense.row(k.index);
        for (std::size_t c = 0; c < nx; ++c) row[c] += k.sign * mrow[c];
      }
    });
    inner = SymMatrix(n0);
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (const auto& k : rm.kernel[i]) s += k.sign * tt(j, k.index);
        inner.lower(i, j) = s;
      }
    drive = Matrix(n0, ports);
    for (std::size_t i = 0; i < n0; ++i) {
      auto row = tt.row(i);
      for (std::size_t p = 0; p < ports; ++p) {
        double s = 0.0;
        for (std::size_t c = 0; c < nx; ++c) s += row[c] * rm.lift(c, p);
        drive(i, p) = s;
      }
    }
  };
  project(r_x, rm.resistance, rm.drive_resistance);
  project(l_x, rm.inductance, rm.drive_inductance);

  auto kt_times = [&](const Matrix& m) {
    Matrix out(n0, m.cols());
    for (std::size_t i = 0; i < n0; ++i)
      for (const auto& k : rm.kernel[i])
        for (std::size_t c = 0; c < m.cols(); ++c) out(i, c) += k.sign * m(k.index, c);
    return out;
  };
  if (!port_mutual.empty()) {
    if (port_mutual.rows() != nx || port_mutual.cols() != ports) throw DimensionMismatch("port mutual matrix has the wrong shape");
    const Matrix md = kt_times(port_mutual);
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t p = 0; p < ports; ++p) rm.drive_inductance(i, p) += md(i, p);
  }
  if (free_mutual.rows() == nx && free_mutual.cols() > 0)
    rm.coil_mutual = kt_times(free_mutual);
  else if (!free_mutual.empty())
    throw DimensionMismatch("coil mutual matrix has the wrong shape");
  else
    rm.coil_mutual = Matrix(n0, 0);
  return rm;
}

/// Cycle columns of W already span ker(E), so K selects them.
inline std::vector<SparseColumn> cycle_selector(const CurrentBasis& basis) {
  std::vector<SparseColumn> k(basis.n_cycles);
  for (std::size_t j = 0; j < basis.n_cycles; ++j) k[j] = {{j, 1}};
  return k;
}

inline ReducedModel project_model(const BranchMatrices& bm, const CurrentBasis& basis, const IncidenceE& e,
                                  const SourceMutuals& mutuals = {}) {
  const auto coords = coordinate_matrices(bm, basis);
  return project_coordinates(coords.resistance, coords.inductance, e.reduced, cycle_selector(basis), mutuals.port,
                             mutuals.free);
}

}  // namespace eddy
