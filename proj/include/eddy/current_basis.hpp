#pragma once

// Branch-current basis W: fundamental cycles of a spanning tree plus one tree
// path per non-reference electrode, and the electrode-flux incidence matrix.
//
// Electrodes are perfect conductors, so every node of one electrode is
// merged into a single vertex before the tree is built. A branch with both
// ends on the same electrode closes a loop through that electrode.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <vector>

#include "eddy/errors.hpp"
#include "eddy/linalg.hpp"
#include "eddy/network.hpp"

namespace eddy {

struct SignedEntry {
  std::size_t index = 0;
  int sign = 0;  // ±1 (or any integer for general kernels)
};

using SparseColumn = std::vector<SignedEntry>;

/// Integer matrix with a few exact helpers; used for incidence data.
struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> data;

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}
  std::int64_t& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  Matrix to_real() const {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = static_cast<double>(data[i]);
    return m;
  }
};

struct CurrentBasis {
  std::size_t n_branches = 0;
  std::size_t n_cycles = 0;
  std::size_t n_paths = 0;
  std::vector<SparseColumn> columns;  // cycles first, then electrode paths

  std::size_t size() const { return columns.size(); }

  IntMatrix dense() const {
    IntMatrix w(n_branches, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j)
      for (const auto& e : columns[j]) w(e.index, j) += e.sign;
    return w;
  }

  /// Branch currents W·x.
  Vector branch_currents(std::span<const double> x) const {
    if (x.size() != columns.size()) throw DimensionMismatch("basis coordinates have the wrong length");
    Vector out(n_branches, 0.0);
    for (std::size_t j = 0; j < columns.size(); ++j)
      for (const auto& e : columns[j]) out[e.index] += e.sign * x[j];
    return out;
  }
};

namespace detail {

/// Maps each node to its graph vertex: one vertex per electrode, one per
/// remaining node.
struct ContractedGraph {
  std::vector<std::size_t> vertex_of_node;
  std::vector<std::size_t> vertex_of_electrode;
  std::size_t n_vertices = 0;
};

inline ContractedGraph contract_electrodes(const LoopNetwork& net) {
  ContractedGraph g;
  constexpr auto unset = static_cast<std::size_t>(-1);
  g.vertex_of_node.assign(net.nodes.size(), unset);
  for (const auto& e : net.electrodes) {
    g.vertex_of_electrode.push_back(g.n_vertices);
    for (auto v : e.nodes) g.vertex_of_node[v] = g.n_vertices;
    ++g.n_vertices;
  }
  for (auto& v : g.vertex_of_node)
    if (v == unset) v = g.n_vertices++;
  return g;
}

}  // namespace detail

/// Breadth-first spanning tree rooted at the reference (last) electrode, or at
/// node 0 without electrodes; adjacency is visited in branch-id order.
inline CurrentBasis build_current_basis(const LoopNetwork& net) {
  const auto g = detail::contract_electrodes(net);
  const std::size_t nb = net.branches.size();
  std::vector<std::size_t> va(nb), vb(nb);
  std::vector<std::vector<std::size_t>> adj(g.n_vertices);
  for (std::size_t b = 0; b < nb; ++b) {
    va[b] = g.vertex_of_node[net.branches[b].node_a];
    vb[b] = g.vertex_of_node[net.branches[b].node_b];
    if (va[b] != vb[b]) {
      adj[va[b]].push_back(b);
      adj[vb[b]].push_back(b);
    }
  }

  constexpr auto none = static_cast<std::size_t>(-1);
  const std::size_t root = net.electrodes.empty() ? g.vertex_of_node.at(0) : g.vertex_of_electrode.back();
  std::vector<std::size_t> parent_branch(g.n_vertices, none);
  std::vector<std::size_t> parent(g.n_vertices, none);
  std::vector<std::size_t> depth(g.n_vertices, 0);
  std::vector<bool> in_tree(nb, false);
  std::vector<bool> seen(g.n_vertices, false);
  std::queue<std::size_t> queue;
  queue.push(root);
  seen[root] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop();
    for (auto b : adj[u]) {
      const auto w = va[b] == u ? vb[b] : va[b];
      if (seen[w]) continue;
      seen[w] = true;
      ++reached;
      parent[w] = u;
      parent_branch[w] = b;
      depth[w] = depth[u] + 1;
      in_tree[b] = true;
      queue.push(w);
    }
  }
  if (reached != g.n_vertices) throw Disconnected("network graph is disconnected");

  // Sign of traversing tree branch parent_branch[x] from x towards parent[x].
  auto up_sign = [&](std::size_t x) {
    const auto b = parent_branch[x];
    return va[b] == x ? +1 : -1;
  };

  CurrentBasis basis;
  basis.n_branches = nb;
  for (std::size_t b = 0; b < nb; ++b) {
    if (in_tree[b]) continue;
    // Loop: along b from va to vb, then through the tree back to va.
    SparseColumn col{{b, +1}};
    std::size_t x = vb[b];
    std::size_t y = va[b];
    SparseColumn down;  // LCA -> va part, collected upward from va
    while (x != y) {
      if (depth[x] >= depth[y]) {
        col.push_back({parent_branch[x], up_sign(x)});
        x = parent[x];
      } else {
        down.push_back({parent_branch[y], -up_sign(y)});
        y = parent[y];
      }
    }
    col.insert(col.end(), down.rbegin(), down.rend());
    basis.columns.push_back(std::move(col));
  }
  basis.n_cycles = basis.columns.size();

  // One path per port: enters at electrode k, leaves at the reference.
  for (std::size_t k = 0; k + 1 < net.electrodes.size(); ++k) {
    SparseColumn col;
    for (std::size_t x = g.vertex_of_electrode[k]; x != root; x = parent[x]) col.push_back({parent_branch[x], up_sign(x)});
    basis.columns.push_back(std::move(col));
  }
  basis.n_paths = basis.columns.size() - basis.n_cycles;
  return basis;
}

/// Net current injected at every node by each basis column (outflow into the
/// branches). Zero rows are interior-conservation certificates.
inline IntMatrix node_injections(const CurrentBasis& basis, const LoopNetwork& net) {
  IntMatrix inj(net.nodes.size(), basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (const auto& e : basis.columns[j]) {
      const auto& br = net.branches[e.index];
      inj(br.node_a, j) += e.sign;
      inj(br.node_b, j) -= e.sign;
    }
  return inj;
}

/// Electrode flux matrices: `full` has one row per electrode; `reduced` drops
/// the reference (last) electrode.
struct IncidenceE {
  IntMatrix full;
  IntMatrix reduced;
};

inline IncidenceE electrode_incidence(const CurrentBasis& basis, const LoopNetwork& net) {
  const auto inj = node_injections(basis, net);
  const std::size_t ne = net.electrodes.size();
  IncidenceE out{IntMatrix(ne, basis.size()), IntMatrix(ne == 0 ? 0 : ne - 1, basis.size())};
  for (std::size_t k = 0; k < ne; ++k)
    for (auto v : net.electrodes[k].nodes)
      for (std::size_t j = 0; j < basis.size(); ++j) out.full(k, j) += inj(v, j);
  for (std::size_t k = 0; k + 1 < ne; ++k)
    for (std::size_t j = 0; j < basis.size(); ++j) out.reduced(k, j) = out.full(k, j);
  return out;
}

/// Exact integer rank by fraction-free (Bareiss) elimination.
inline std::size_t integer_rank(IntMatrix m) {
  std::size_t rank = 0;
  std::int64_t prev = 1;
  for (std::size_t c = 0; c < m.cols && rank < m.rows; ++c) {
    std::size_t piv = rank;
    while (piv < m.rows && m(piv, c) == 0) ++piv;
    if (piv == m.rows) continue;
    if (piv != rank)
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(piv, j), m(rank, j));
    for (std::size_t i = rank + 1; i < m.rows; ++i) {
      for (std::size_t j = c + 1; j < m.cols; ++j) m(i, j) = (m(rank, c) * m(i, j) - m(i, c) * m(rank, j)) / prev;
      m(i, c) = 0;
    }
    prev = m(rank, c);
    ++rank;
  }
  return rank;
}

}  // namespace eddy
