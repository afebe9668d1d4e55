#pragma once

// Filamentary branch network standing in for the conducting domain, with
// electrode node sets and optional external source coils. Also generates
// the cylindrical tube grid used by the testing experiment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "eddy/errors.hpp"
#include "eddy/geometry.hpp"

namespace eddy {

struct Branch {
  std::size_t node_a = 0;
  std::size_t node_b = 0;
  double radius = 0.0;         // m, equivalent round-wire radius
  double resistivity = 0.0;    // Ω·m
  double cross_section = 0.0;  // m²
};

struct Electrode {
  std::string name;
  std::vector<std::size_t> nodes;
};

enum class SourceBinding {
  free,  // solenoidal coil with its own drive current (i₀)
  port,  // carries the current of an electrode port (i_D)
};

struct SourceCoil {
  std::string name;
  std::vector<Vec3> points;  // polyline; repeat the first point to close it
  SourceBinding binding = SourceBinding::free;
  std::size_t port = 0;  // electrode index when binding == port

  std::size_t segment_count() const { return points.size() < 2 ? 0 : points.size() - 1; }
  Segment segment(std::size_t k) const { return {points[k], points[k + 1]}; }
};

inline constexpr double min_node_separation = 1e-9;  // m

struct LoopNetwork {
  std::vector<Vec3> nodes;
  std::vector<Branch> branches;
  std::vector<Electrode> electrodes;  // the last one is the return reference
  std::vector<SourceCoil> sources;

  std::size_t electrode_count() const { return electrodes.size(); }
  std::size_t port_count() const { return electrodes.empty() ? 0 : electrodes.size() - 1; }

  std::size_t free_source_count() const {
    return static_cast<std::size_t>(std::count_if(sources.begin(), sources.end(),
                                                  [](const SourceCoil& s) { return s.binding == SourceBinding::free; }));
  }

  Segment segment(std::size_t b) const { return {nodes[branches[b].node_a], nodes[branches[b].node_b]}; }
  double length(std::size_t b) const { return segment(b).length(); }
  double resistance(std::size_t b) const {
    const Branch& br = branches[b];
    return br.resistivity * length(b) / br.cross_section;
  }
};

namespace detail {

inline bool is_connected(std::size_t n_nodes, const std::vector<Branch>& branches) {
  if (n_nodes == 0) return true;
  std::vector<std::vector<std::size_t>> adj(n_nodes);
  for (const auto& b : branches) {
    adj[b.node_a].push_back(b.node_b);
    adj[b.node_b].push_back(b.node_a);
  }
  std::vector<bool> seen(n_nodes, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
  }
  return count == n_nodes;
}

}  // namespace detail

/// Checks every structural invariant; throws ValidationError on the first
/// violation.
inline void validate(const LoopNetwork& net) {
  const std::size_t n = net.nodes.size();
  if (n < 2) throw ValidationError("network needs at least two nodes");
  if (net.branches.empty()) throw ValidationError("network has no branches");

  // Coincident nodes: sort by x and sweep a window.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return net.nodes[a].x < net.nodes[b].x; });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n && net.nodes[order[j]].x - net.nodes[order[i]].x < min_node_separation; ++j)
      if (distance(net.nodes[order[i]], net.nodes[order[j]]) < min_node_separation)
        throw ValidationError("nodes " + std::to_string(order[i]) + " and " + std::to_string(order[j]) +
                              " are coincident");

  for (std::size_t b = 0; b < net.branches.size(); ++b) {
    const Branch& br = net.branches[b];
    const std::string tag = "branch " + std::to_string(b);
    if (br.node_a >= n || br.node_b >= n) throw ValidationError(tag + " references a missing node");
    if (br.node_a == br.node_b) throw ValidationError(tag + " has identical endpoints");
    if (!(br.resistivity > 0.0)) throw ValidationError(tag + " needs a positive resistivity");
    if (!(br.cross_section > 0.0)) throw ValidationError(tag + " needs a positive cross section");
    if (!(br.radius > 0.0)) throw ValidationError(tag + " needs a positive wire radius");
    if (!(br.radius < 0.5 * net.length(b)))
      throw ValidationError(tag + " wire radius must be below half its length");
  }
  if (!detail::is_connected(n, net.branches)) throw ValidationError("branch graph is not connected");

  if (net.electrodes.size() == 1) throw ValidationError("a single electrode cannot carry net current");
  std::vector<int> owner(n, -1);
  for (std::size_t k = 0; k < net.electrodes.size(); ++k) {
    const auto& e = net.electrodes[k];
    if (e.nodes.empty()) throw ValidationError("electrode '" + e.name + "' has no nodes");
    for (std::size_t j = 0; j < k; ++j)
      if (net.electrodes[j].name == e.name) throw ValidationError("duplicate electrode name '" + e.name + "'");
    for (auto v : e.nodes) {
      if (v >= n) throw ValidationError("electrode '" + e.name + "' references a missing node");
      if (owner[v] != -1) throw ValidationError("electrode node sets overlap at node " + std::to_string(v));
      owner[v] = static_cast<int>(k);
    }
  }
  for (const auto& s : net.sources) {
    if (s.points.size() < 2) throw ValidationError("source '" + s.name + "' needs at least two points");
    for (std::size_t k = 0; k < s.segment_count(); ++k)
      if (s.segment(k).length() < min_node_separation)
        throw ValidationError("source '" + s.name + "' has a zero-length segment");
    if (s.binding == SourceBinding::port && s.port >= net.port_count())
      throw ValidationError("source '" + s.name + "' is bound to a port that does not exist");
  }
}

// ---------------------------------------------------------------------------
// Tube grid generator

enum class EndRing { bottom, top };

struct ElectrodePlacement {
  std::string name;
  EndRing ring = EndRing::bottom;
  double angle = 0.0;  // rad; snapped to the nearest ring node
};

struct ElectrodeSpec {
  std::vector<ElectrodePlacement> placements;

  /// Two diametrically opposite legs on each end ring. Current enters at the
  /// top pair and leaves at the bottom pair; the last entry is the reference.
  static ElectrodeSpec opposite_pairs() {
    return {{{"top_0", EndRing::top, 0.0},
             {"top_pi", EndRing::top, std::numbers::pi},
             {"bottom_0", EndRing::bottom, 0.0},
             {"bottom_pi", EndRing::bottom, std::numbers::pi}}};
  }
  /// One leg per end, both at angle 0.
  static ElectrodeSpec single_pair() {
    return {{{"top_0", EndRing::top, 0.0}, {"bottom_0", EndRing::bottom, 0.0}}};
  }
  static ElectrodeSpec none() { return {}; }
};

enum class DefectMode { remove_branches, scale_resistivity };

/// Branches whose midpoints fall in both windows are removed or derated.
struct DefectSpec {
  double angle_min = 0.0;  // rad, window may wrap through 0
  double angle_max = 0.0;
  double z_min = 0.0;  // m
  double z_max = 0.0;
  DefectMode mode = DefectMode::remove_branches;
  double factor = 1.0;  // resistivity multiplier for scale_resistivity

  void validate() const {
    const double width = angle_max - angle_min;
    if (!(width > 0.0) || width > 2.0 * std::numbers::pi) throw ValidationError("defect angular window is empty");
    if (!(z_max > z_min)) throw ValidationError("defect axial window is empty");
    if (mode == DefectMode::scale_resistivity && !(factor > 0.0))
      throw ValidationError("defect resistivity factor must be positive");
  }

  bool contains(Vec3 p) const {
    const double width = angle_max - angle_min;
    const double rel = wrap_angle(std::atan2(p.y, p.x) - angle_min);
    return rel <= width && p.z >= z_min && p.z <= z_max;
  }
};

struct TubeGeometry {
  double radius = 0.084;          // m
  double length = 0.3;            // m
  double wall_thickness = 0.003;  // m
  std::size_t n_axial = 12;
  std::size_t n_circumferential = 24;
  double resistivity = 1.09e-6;  // Ω·m
};

inline std::size_t tube_node(const TubeGeometry& g, std::size_t ring, std::size_t pos) {
  return ring * g.n_circumferential + (pos % g.n_circumferential);
}

/// Applies a defect in place; remove-branch defects that would disconnect
/// the graph are rejected.
inline void apply_defect(LoopNetwork& net, const DefectSpec& defect) {
  defect.validate();
  std::vector<bool> hit(net.branches.size(), false);
  std::size_t count = 0;
  for (std::size_t b = 0; b < net.branches.size(); ++b)
    if (defect.contains(net.segment(b).midpoint())) {
      hit[b] = true;
      ++count;
    }
  if (count == 0) throw ValidationError("defect window selects no branch");
  if (defect.mode == DefectMode::scale_resistivity) {
    for (std::size_t b = 0; b < net.branches.size(); ++b)
      if (hit[b]) net.branches[b].resistivity *= defect.factor;
    return;
  }
  std::vector<Branch> kept;
  kept.reserve(net.branches.size() - count);
  for (std::size_t b = 0; b < net.branches.size(); ++b)
    if (!hit[b]) kept.push_back(net.branches[b]);
  if (kept.empty() || !detail::is_connected(net.nodes.size(), kept))
    throw ValidationError("defect would disconnect the network");
  net.branches = std::move(kept);
}

/// Single-layer filament grid on a cylinder of the given radius: n_axial rings
/// of n_circumferential nodes, axial branches between rings and
/// circumferential chords within each ring.
inline LoopNetwork generate_tube_grid(const TubeGeometry& g, const ElectrodeSpec& electrodes = ElectrodeSpec::opposite_pairs(),
                                      const std::optional<DefectSpec>& defect = std::nullopt) {
  if (!(g.radius > 0.0) || !(g.length > 0.0) || !(g.wall_thickness > 0.0))
    throw InvalidGeometry("tube radius, length and wall thickness must be positive");
  if (g.n_axial < 2 || g.n_circumferential < 3)
    throw InvalidGeometry("tube grid needs n_axial >= 2 and n_circumferential >= 3");
  if (!(g.resistivity > 0.0)) throw InvalidGeometry("resistivity must be positive");

  const std::size_t na = g.n_axial;
  const std::size_t nc = g.n_circumferential;
  const double dz = g.length / static_cast<double>(na - 1);
  const double arc = 2.0 * std::numbers::pi * g.radius / static_cast<double>(nc);

  LoopNetwork net;
  net.nodes.reserve(na * nc);
  for (std::size_t r = 0; r < na; ++r)
    for (std::size_t j = 0; j < nc; ++j) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(nc);
      net.nodes.push_back({g.radius * std::cos(phi), g.radius * std::sin(phi), dz * static_cast<double>(r)});
    }

  auto add_branch = [&](std::size_t a, std::size_t b, double width) {
    const double area = g.wall_thickness * width;
    net.branches.push_back({a, b, std::sqrt(area / std::numbers::pi), g.resistivity, area});
  };
  for (std::size_t r = 0; r < na; ++r) {
    // End rings own half an axial cell.
    const double width = (r == 0 || r + 1 == na) ? 0.5 * dz : dz;
    for (std::size_t j = 0; j < nc; ++j) add_branch(tube_node(g, r, j), tube_node(g, r, j + 1), width);
    if (r + 1 < na)
      for (std::size_t j = 0; j < nc; ++j) add_branch(tube_node(g, r, j), tube_node(g, r + 1, j), arc);
  }

  std::vector<bool> used(net.nodes.size(), false);
  for (const auto& p : electrodes.placements) {
    const double steps = wrap_angle(p.angle) / (2.0 * std::numbers::pi) * static_cast<double>(nc);
    const auto pos = static_cast<std::size_t>(std::llround(steps)) % nc;
    const std::size_t ring = p.ring == EndRing::top ? na - 1 : 0;
    const std::size_t node = tube_node(g, ring, pos);
    if (used[node]) throw ElectrodeOverlap("electrode '" + p.name + "' lands on a node already used by another electrode");
    used[node] = true;
    net.electrodes.push_back({p.name, {node}});
  }

  if (defect) apply_defect(net, *defect);
  validate(net);
  return net;
}

/// Number of independent loops of a connected graph.
inline std::size_t cycle_rank(const LoopNetwork& net) { return net.branches.size() - net.nodes.size() + 1; }

}  // namespace eddy
