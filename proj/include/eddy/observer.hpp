#pragma once

// Linear map from the circuit state to probe field components:
//   y = internal·I_i + ports·i_D + coils·i₀
// Branch currents are W(K I_i + lift i_D), so each column is the Biot–Savart
// field of one unit state coordinate. Built once and shared by TD and FD.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "eddy/current_basis.hpp"
#include "eddy/errors.hpp"
#include "eddy/geometry.hpp"
#include "eddy/inductance.hpp"
#include "eddy/linalg.hpp"
#include "eddy/reduction.hpp"

namespace eddy {

struct ProbeObserver {
  std::vector<Vec3> probes;
  std::size_t components = 3;  // rows per probe: 3 for (Bx, By, Bz), 1 for B_φ
  Matrix internal;             // rows × N₀
  Matrix ports;                // rows × ports
  Matrix coils;                // rows × free coils

  std::size_t rows() const { return internal.rows(); }

  Vector observe(std::span<const double> i_int, std::span<const double> i_ports, std::span<const double> i_coils) const {
    Vector y = multiply(internal, i_int);
    if (y.empty()) y.assign(rows(), 0.0);
    if (ports.cols() > 0) {
      const Vector yp = multiply(ports, i_ports);
      for (std::size_t r = 0; r < y.size(); ++r) y[r] += yp[r];
    }
    if (coils.cols() > 0) {
      const Vector yc = multiply(coils, i_coils);
      for (std::size_t r = 0; r < y.size(); ++r) y[r] += yc[r];
    }
    return y;
  }
};

inline ProbeObserver make_probe_observer(const LoopNetwork& net, const CurrentBasis& basis, const ReducedModel& rm,
                                         std::span<const Vec3> probes) {
  if (rm.n_coordinates != basis.size()) throw DimensionMismatch("reduced model does not match the current basis");
  const Matrix gb = probe_field_matrix(net, probes);
  const Matrix gs = source_field_matrix(net, probes);
  const std::size_t rows = gb.rows();
  const std::size_t nx = basis.size();

  // Field per unit basis coordinate, stored transposed (row j = coordinate j).
  Matrix gw(nx, rows);
  for (std::size_t j = 0; j < nx; ++j)
    for (const auto& e : basis.columns[j])
      for (std::size_t r = 0; r < rows; ++r) gw(j, r) += e.sign * gb(r, e.index);

  ProbeObserver obs;
  obs.probes.assign(probes.begin(), probes.end());
  obs.internal = Matrix(rows, rm.n_internal());
  for (std::size_t i = 0; i < rm.n_internal(); ++i)
    for (const auto& k : rm.kernel[i])
      for (std::size_t r = 0; r < rows; ++r) obs.internal(r, i) += k.sign * gw(k.index, r);

  obs.ports = Matrix(rows, rm.n_ports());
  for (std::size_t p = 0; p < rm.n_ports(); ++p)
    for (std::size_t j = 0; j < nx; ++j) {
      const double w = rm.lift(j, p);
      if (w == 0.0) continue;
      for (std::size_t r = 0; r < rows; ++r) obs.ports(r, p) += w * gw(j, r);
    }

  obs.coils = Matrix(rows, net.free_source_count());
  std::size_t free_index = 0;
  for (std::size_t s = 0; s < net.sources.size(); ++s) {
    const bool is_free = net.sources[s].binding == SourceBinding::free;
    for (std::size_t r = 0; r < rows; ++r) {
      if (is_free)
        obs.coils(r, free_index) = gs(r, s);
      else
        obs.ports(r, net.sources[s].port) += gs(r, s);
    }
    if (is_free) ++free_index;
  }
  return obs;
}

/// Keeps only the azimuthal component B·(−sin φ, cos φ, 0) at each probe.
inline ProbeObserver azimuthal(const ProbeObserver& full) {
  if (full.components != 3) throw ValidationError("azimuthal projection needs a three-component observer");
  ProbeObserver out;
  out.probes = full.probes;
  out.components = 1;
  const std::size_t np = full.probes.size();
  auto project = [&](const Matrix& m) {
    Matrix o(np, m.cols());
    for (std::size_t p = 0; p < np; ++p) {
      const double phi = std::atan2(full.probes[p].y, full.probes[p].x);
      const double sx = -std::sin(phi);
      const double sy = std::cos(phi);
      for (std::size_t c = 0; c < m.cols(); ++c) o(p, c) = sx * m(3 * p, c) + sy * m(3 * p + 1, c);
    }
    return o;
  };
  out.internal = project(full.internal);
  out.ports = project(full.ports);
  out.coils = project(full.coils);
  return out;
}

}  // namespace eddy
