#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. None of them call the routines they check.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "eddy/current_basis.hpp"
#include "eddy/geometry.hpp"
#include "eddy/linalg.hpp"

namespace eddy::oracle {

/// Composite midpoint rule for the Neumann double integral of two parallel,
/// aligned segments, Richardson-extrapolated from n and 2n cells.
inline double parallel_midpoint(double len, double sep, int n) {
  auto midpoint = [&](int m) {
    const double h = len / m;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x = (i + 0.5) * h;
      for (int j = 0; j < m; ++j) {
        const double y = (j + 0.5) * h;
        s += 1.0 / std::hypot(x - y, sep);
      }
    }
    return 1e-7 * s * h * h;
  };
  const double coarse = midpoint(n);
  const double fine = midpoint(2 * n);
  return fine + (fine - coarse) / 3.0;
}

/// Closed form for two aligned parallel filaments of equal length l at distance d.
inline double parallel_closed_form(double l, double d) {
  const double mu0 = 4e-7 * std::numbers::pi;
  return mu0 * l / (2 * std::numbers::pi) *
         (std::log(l / d + std::sqrt(1 + l * l / (d * d))) - std::sqrt(1 + d * d / (l * l)) + d / l);
}

/// Self inductance from the offset kernel 1/sqrt(|x−x'|² + r²): inner
/// integral in closed form, outer by composite Simpson on a graded grid.
inline double regularized_self(double l, double r, int n = 200000) {
  auto inner = [&](double x) { return std::asinh((l - x) / r) + std::asinh(x / r); };
  auto map = [&](double u) { return l * (3 * u * u - 2 * u * u * u); };
  auto jac = [&](double u) { return l * (6 * u - 6 * u * u); };
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u0 = static_cast<double>(i) / n, u1 = static_cast<double>(i + 1) / n, um = 0.5 * (u0 + u1);
    s += (u1 - u0) / 6.0 * (inner(map(u0)) * jac(u0) + 4.0 * inner(map(um)) * jac(um) + inner(map(u1)) * jac(u1));
  }
  return 1e-7 * s;
}

/// Field of a closed polyline carrying 1 A, midpoint rule with `pieces`
/// pieces per side.
inline Vec3 polyline_field(const std::vector<Vec3>& closed, Vec3 probe, int pieces) {
  Vec3 b{};
  for (std::size_t s = 0; s + 1 < closed.size(); ++s) {
    const Vec3 dl = (1.0 / pieces) * (closed[s + 1] - closed[s]);
    for (int k = 0; k < pieces; ++k) {
      const Vec3 x = closed[s] + (k + 0.5) * dl;
      const Vec3 r = probe - x;
      b += (1e-7 / std::pow(norm(r), 3)) * cross(dl, r);
    }
  }
  return b;
}

/// Minimum-norm solution of E x = b via modified Gram–Schmidt QR of Eᵀ.
inline Vector min_norm(const IntMatrix& e, const Vector& b) {
  const std::size_t m = e.rows, n = e.cols;
  std::vector<Vector> q(m, Vector(n));
  std::vector<std::vector<double>> r(m, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t c = 0; c < n; ++c) q[k][c] = static_cast<double>(e(k, c));
    for (std::size_t j = 0; j < k; ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < n; ++c) d += q[j][c] * q[k][c];
      r[j][k] = d;
      for (std::size_t c = 0; c < n; ++c) q[k][c] -= d * q[j][c];
    }
    double nn = 0.0;
    for (double v : q[k]) nn += v * v;
    r[k][k] = std::sqrt(nn);
    for (auto& v : q[k]) v /= r[k][k];
  }
  // Rᵀ y = b, then x = Q y.
  Vector y(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= r[j][i] * y[j];
    y[i] = s / r[i][i];
  }
  Vector x(n, 0.0);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t c = 0; c < n; ++c) x[c] += y[k] * q[k][c];
  return x;
}

/// Eigenvalues of a symmetric 2×2 [[a, b], [b, c]] from λ² − tr λ + det = 0,
/// descending.
inline std::array<double, 2> eig2(double a, double b, double c) {
  const double tr = a + c, det = a * c - b * b;
  const double disc = std::sqrt(tr * tr - 4 * det);
  return {(tr + disc) / 2, (tr - disc) / 2};
}

}  // namespace eddy::oracle
