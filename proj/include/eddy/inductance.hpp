#pragma once

// Partial-inductance assembly for filament branches: Neumann mutual
// inductance between straight segments, thin-wire self inductance, branch
// resistance/inductance matrices, source-coil mutuals and Biot–Savart fields.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "eddy/current_basis.hpp"
#include "eddy/errors.hpp"
#include "eddy/geometry.hpp"
#include "eddy/linalg.hpp"
#include "eddy/network.hpp"
#include "eddy/parallel.hpp"

namespace eddy {

inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;  // H/m
inline constexpr double mu0_over_4pi = 1.0e-7;

/// Gauss–Legendre rule mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw InputError("quadrature order must be positive");
  const auto n = static_cast<std::size_t>(order);
  QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = ((2.0 * jd - 1.0) * x * p2 - (jd - 1.0) * p3) / jd;
      }
      dp = static_cast<double>(n) * (x * p1 - p2) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the positive root; store both mirror points on [0, 1].
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

struct NeumannOptions {
  int quad_order = 8;
  int max_depth = 24;  // recursive halving limit for touching segments
};

namespace detail {

inline bool segment_less(const Segment& s, const Segment& t) {
  return std::tie(s.a.x, s.a.y, s.a.z, s.b.x, s.b.y, s.b.z) < std::tie(t.a.x, t.a.y, t.a.z, t.b.x, t.b.y, t.b.z);
}

inline void check_not_overlapping(const Segment& s, const Segment& t) {
  const Vec3 ds = s.direction();
  const Vec3 dt = t.direction();
  const double ls = norm(ds);
  const double lt = norm(dt);
  if (norm(cross(ds, dt)) > 1e-12 * ls * lt) return;
  if (point_segment_distance(t.a, {s.a - 1e6 * ds, s.b + 1e6 * ds}) > 1e-12 * std::max(ls, lt)) return;
  const double u0 = dot(t.a - s.a, ds) / (ls * ls);
  const double u1 = dot(t.b - s.a, ds) / (ls * ls);
  const double lo = std::max(0.0, std::min(u0, u1));
  const double hi = std::min(1.0, std::max(u0, u1));
  if ((hi - lo) * ls > 1e-9 * std::max(ls, lt)) throw SingularPair("segments overlap; Neumann kernel is singular");
}

inline double neumann_gauss(const Segment& s, const Segment& t, const QuadratureRule& rule) {
  const Vec3 ds = s.direction();
  const Vec3 dt = t.direction();
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Vec3 x = s.at(rule.nodes[i]);
    double inner = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) inner += rule.weights[j] / distance(x, t.at(rule.nodes[j]));
    sum += rule.weights[i] * inner;
  }
  return mu0_over_4pi * dot(ds, dt) * sum;
}

inline double neumann_recursive(const Segment& s, const Segment& t, const QuadratureRule& rule, int depth) {
  const double ls = s.length();
  const double lt = t.length();
  if (depth <= 0 || segment_distance(s, t) >= std::max(ls, lt)) return neumann_gauss(s, t, rule);
  const Vec3 ms = s.midpoint();
  const Vec3 mt = t.midpoint();
  if (ls > 2.0 * lt)
    return neumann_recursive({s.a, ms}, t, rule, depth - 1) + neumann_recursive({ms, s.b}, t, rule, depth - 1);
  if (lt > 2.0 * ls)
    return neumann_recursive(s, {t.a, mt}, rule, depth - 1) + neumann_recursive(s, {mt, t.b}, rule, depth - 1);
  return neumann_recursive({s.a, ms}, {t.a, mt}, rule, depth - 1) + neumann_recursive({s.a, ms}, {mt, t.b}, rule, depth - 1) +
         neumann_recursive({ms, s.b}, {t.a, mt}, rule, depth - 1) + neumann_recursive({ms, s.b}, {mt, t.b}, rule, depth - 1);
}

}  // namespace detail

/// μ₀/4π ∬ t̂_a·t̂_b / ‖x − x′‖ over two straight segments. Pairs closer than
/// their length are halved recursively before Gauss–Legendre is applied.
inline double neumann_mutual(Segment a, Segment b, const QuadratureRule& rule, int max_depth = NeumannOptions{}.max_depth) {
  if (dot(a.direction(), b.direction()) == 0.0) return 0.0;
  detail::check_not_overlapping(a, b);
  if (detail::segment_less(b, a)) std::swap(a, b);
  return detail::neumann_recursive(a, b, rule, max_depth);
}

inline double neumann_mutual(const Segment& a, const Segment& b, int quad_order = NeumannOptions{}.quad_order) {
  if (quad_order < 2) throw InputError("quadrature order must be at least 2");
  return neumann_mutual(a, b, gauss_legendre(quad_order));
}

/// Thin straight wire: L = (μ₀ l / 2π)(ln(2l/r) − 1).
inline double self_inductance(double length, double radius) {
  if (!(length > 0.0) || !(radius > 0.0) || !(radius < 0.5 * length))
    throw InvalidGeometry("self inductance needs length > 0 and 0 < radius < length/2");
  return mu0 * length / (2.0 * std::numbers::pi) * (std::log(2.0 * length / radius) - 1.0);
}

struct BranchMatrices {
  Vector resistance;    // Ω, diagonal of R_b
  SymMatrix inductance;  // H
};

inline BranchMatrices assemble_branch_matrices(const LoopNetwork& net, int quad_order = NeumannOptions{}.quad_order) {
  if (quad_order < 2) throw InputError("quadrature order must be at least 2");
  const std::size_t nb = net.branches.size();
  const auto rule = gauss_legendre(quad_order);
  BranchMatrices bm{Vector(nb), SymMatrix(nb)};
  std::vector<Segment> seg(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    seg[b] = net.segment(b);
    bm.resistance[b] = net.resistance(b);
    bm.inductance.lower(b, b) = self_inductance(seg[b].length(), net.branches[b].radius);
  }
  parallel_for(nb, [&](std::size_t i) {
    for (std::size_t j = 0; j < i; ++j) bm.inductance.lower(i, j) = neumann_mutual(seg[i], seg[j], rule);
  });
  // SPD certificate. The thin-wire diagonal can lose to touching collinear
  // neighbours when segments are only a few equivalent radii long.
  cholesky(bm.inductance);
  return bm;
}

/// Source-coil mutual inductances in basis coordinates (Wᵀ M_branch). Coils
/// bound to a port are summed into that port's column.
struct SourceMutuals {
  Matrix free;  // N_X × free coils
  Matrix port;  // N_X × ports
};

inline SourceMutuals assemble_source_mutuals(const LoopNetwork& net, const CurrentBasis& basis,
                                             int quad_order = NeumannOptions{}.quad_order) {
  const std::size_t nx = basis.size();
  SourceMutuals out{Matrix(nx, net.free_source_count()), Matrix(nx, net.port_count())};
  if (net.sources.empty()) return out;
  const auto rule = gauss_legendre(quad_order);
  const std::size_t nb = net.branches.size();

  Matrix branch_mutual(nb, net.sources.size());
  parallel_for(nb, [&](std::size_t b) {
    const Segment sb = net.segment(b);
    for (std::size_t s = 0; s < net.sources.size(); ++s) {
      double m = 0.0;
      for (std::size_t k = 0; k < net.sources[s].segment_count(); ++k) m += neumann_mutual(sb, net.sources[s].segment(k), rule);
      branch_mutual(b, s) = m;
    }
  });

  std::size_t free_index = 0;
  for (std::size_t s = 0; s < net.sources.size(); ++s) {
    const bool is_free = net.sources[s].binding == SourceBinding::free;
    for (std::size_t j = 0; j < nx; ++j) {
      double v = 0.0;
      for (const auto& e : basis.columns[j]) v += e.sign * branch_mutual(e.index, s);
      if (is_free)
        out.free(j, free_index) = v;
      else
        out.port(j, net.sources[s].port) += v;
    }
    if (is_free) ++free_index;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Biot–Savart

/// Flux density of a straight segment carrying `current` from a to b.
inline Vec3 segment_field(const Segment& s, double current, Vec3 p) {
  const Vec3 r1 = s.a - p;
  const Vec3 r2 = s.b - p;
  const double n1 = norm(r1);
  const double n2 = norm(r2);
  const double denom = n1 * n2 * (n1 * n2 + dot(r1, r2));
  if (denom <= 0.0) return {};
  return (mu0_over_4pi * current * (n1 + n2) / denom) * cross(r1, r2);
}

namespace detail {
inline void check_probe(const LoopNetwork& net, std::size_t b, Vec3 p) {
  if (point_segment_distance(p, net.segment(b)) <= net.branches[b].radius)
    throw ProbeTooClose("probe lies within the wire radius of branch " + std::to_string(b));
}
}  // namespace detail

inline std::vector<Vec3> biot_savart(const LoopNetwork& net, std::span<const double> branch_currents,
                                     std::span<const Vec3> probes) {
  if (branch_currents.size() != net.branches.size()) throw DimensionMismatch("one current per branch expected");
  std::vector<Vec3> out(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p)
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
      detail::check_probe(net, b, probes[p]);
      out[p] += segment_field(net.segment(b), branch_currents[b], probes[p]);
    }
  return out;
}

/// Field per unit branch current: rows (3p, 3p+1, 3p+2) hold (Bx, By, Bz) at
/// probe p, one column per branch.
inline Matrix probe_field_matrix(const LoopNetwork& net, std::span<const Vec3> probes) {
  Matrix g(3 * probes.size(), net.branches.size());
  for (std::size_t p = 0; p < probes.size(); ++p)
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
      detail::check_probe(net, b, probes[p]);
      const Vec3 f = segment_field(net.segment(b), 1.0, probes[p]);
      g(3 * p, b) = f.x;
      g(3 * p + 1, b) = f.y;
      g(3 * p + 2, b) = f.z;
    }
  return g;
}

/// Field per unit current of each source coil, same row layout.
inline Matrix source_field_matrix(const LoopNetwork& net, std::span<const Vec3> probes) {
  Matrix g(3 * probes.size(), net.sources.size());
  for (std::size_t p = 0; p < probes.size(); ++p)
    for (std::size_t s = 0; s < net.sources.size(); ++s) {
      Vec3 f{};
      for (std::size_t k = 0; k < net.sources[s].segment_count(); ++k) {
        if (point_segment_distance(probes[p], net.sources[s].segment(k)) < min_node_separation)
          throw ProbeTooClose("probe lies on source '" + net.sources[s].name + "'");
        f += segment_field(net.sources[s].segment(k), 1.0, probes[p]);
      }
      g(3 * p, s) = f.x;
      g(3 * p + 1, s) = f.y;
      g(3 * p + 2, s) = f.z;
    }
  return g;
}

}  // namespace eddy
