#pragma once

// Setup and per-step cost of TD1, TD2 and FD as the grid grows.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "eddy/frequency.hpp"
#include "eddy/modal.hpp"
#include "eddy/ndt.hpp"
#include "eddy/transient.hpp"

namespace eddy {

/// Tube grid with about `target` internal currents, N₀ = (n_axial − 1)·n_circ + 1.
/// Cells keep a roughly square aspect, and the wall is thin (0.5 mm) so every
/// segment stays several equivalent radii long and L_b stays positive definite.
inline TubeGeometry bench_geometry(std::size_t target) {
  if (target < 4) throw ValidationError("bench size must be at least 4");
  TubeGeometry g;
  g.wall_thickness = 5e-4;
  const double cells = static_cast<double>(target - 1);
  // Square cells: n_circ / (n_axial − 1) ≈ 2πR / L.
  const double aspect = 2.0 * std::numbers::pi * g.radius / g.length;
  g.n_circumferential = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(std::sqrt(cells * aspect))));
  g.n_axial = 1 + std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cells / static_cast<double>(g.n_circumferential))));
  return g;
}

struct BenchRow {
  std::size_t n_internal = 0;
  std::size_t n_axial = 0;
  std::size_t n_circumferential = 0;
  double assembly_s = 0.0;
  double td1_setup_s = 0.0;
  double td1_per_step_s = 0.0;
  double td2_setup_s = 0.0;
  double td2_per_step_s = 0.0;
  double fd_per_tone_s = 0.0;
};

/// Times one grid. Per-step costs are the minimum over `repeats` runs of
/// `steps` steps each, which filters scheduler noise.
inline BenchRow bench_point(std::size_t target, std::size_t steps, std::size_t repeats = 3) {
  if (steps == 0 || repeats == 0) throw ValidationError("bench needs at least one step and one repeat");
  BenchRow row;
  const TubeGeometry g = bench_geometry(target);
  row.n_axial = g.n_axial;
  row.n_circumferential = g.n_circumferential;

  const auto t0 = std::chrono::steady_clock::now();
  const LoopNetwork net = generate_tube_grid(g);
  const CurrentBasis basis = build_current_basis(net);
  const ReducedModel rm = project_model(assemble_branch_matrices(net), basis, electrode_incidence(basis, net));
  row.assembly_s = detail::seconds_since(t0);
  row.n_internal = rm.n_internal();

  const auto spec = default_experiment();
  const DriveSignal drive = spec.drive();
  TransientConfig cfg;
  cfg.theta = 1.0;
  cfg.dt = spec.dt();
  cfg.t_end = static_cast<double>(steps) * cfg.dt;
  cfg.capture_states = false;

  row.td1_setup_s = row.td1_per_step_s = std::numeric_limits<double>::infinity();
  cfg.method = Method::td1;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto res = run_transient(rm, nullptr, nullptr, drive, cfg);
    row.td1_setup_s = std::min(row.td1_setup_s, res.wall_time_setup);
    row.td1_per_step_s = std::min(row.td1_per_step_s, res.per_step_cost);
  }

  const auto t1 = std::chrono::steady_clock::now();
  const ModalBasis mb = generalized_eig(rm.inductance, rm.resistance);
  const double eig_s = detail::seconds_since(t1);
  row.td2_setup_s = row.td2_per_step_s = std::numeric_limits<double>::infinity();
  cfg.method = Method::td2;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto res = run_transient(rm, &mb, nullptr, drive, cfg);
    row.td2_setup_s = std::min(row.td2_setup_s, eig_s + res.wall_time_setup);
    row.td2_per_step_s = std::min(row.td2_per_step_s, res.per_step_cost);
  }

  const auto t2 = std::chrono::steady_clock::now();
  ComplexVector ports;
  for (double w : drive.port_weights) ports.push_back(Complex(w, 0.0));
  fd_solve(rm, 2.0 * std::numbers::pi * 50.0, ports);
  row.fd_per_tone_s = detail::seconds_since(t2);
  return row;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw ValidationError("slope fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace eddy
