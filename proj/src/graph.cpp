#include "stochavg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stochavg/error.hpp"

namespace stochavg::graph {

Digraph::Digraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
  if (!adjacency_.square()) throw Error(ErrorKind::DimensionMismatch, "adjacency must be square");
  linalg::require_finite(adjacency_);
  for (std::size_t i = 0; i < n(); ++i) {
    if (adjacency_(i, i) != 0.0) {
      throw Error(ErrorKind::InvalidArgument, "adjacency diagonal entry " + std::to_string(i) + " is nonzero");
    }
  }
}

std::size_t Digraph::edge_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(adjacency_.data().begin(), adjacency_.data().end(), [](double v) { return v != 0.0; }));
}

std::vector<std::size_t> Digraph::neighbours(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n(); ++j)
    if (adjacency_(i, j) != 0.0) out.push_back(j);
  return out;
}

double Digraph::in_degree(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n(); ++j) s += adjacency_(i, j);
  return s;
}

double Digraph::out_degree(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n(); ++j) s += adjacency_(j, i);
  return s;
}

Laplacian laplacian(const Digraph& g) {
  const std::size_t n = g.n();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      d += g.weight(i, j);
      l(i, j) = -g.weight(i, j);
    }
    l(i, i) = d;
  }
  return {std::move(l)};
}

Matrix symmetrized_laplacian(const Matrix& l) {
  if (!l.square()) throw Error(ErrorKind::DimensionMismatch, "Laplacian must be square");
  const std::size_t n = l.rows();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s(i, i) = l(i, i);
    for (std::size_t j = i + 1; j < n; ++j) s(i, j) = s(j, i) = 0.5 * (l(i, j) + l(j, i));
  }
  return s;
}

Matrix symmetrized_laplacian(const Laplacian& l) { return symmetrized_laplacian(l.matrix); }

bool is_balanced(const Digraph& g, double tol) {
  for (std::size_t i = 0; i < g.n(); ++i)
    if (std::abs(g.in_degree(i) - g.out_degree(i)) > tol) return false;
  return true;
}

Digraph graph_union(std::span<const Digraph> gs) {
  if (gs.empty()) throw Error(ErrorKind::InvalidArgument, "union of an empty list");
  Matrix sum = gs.front().adjacency();
  for (std::size_t k = 1; k < gs.size(); ++k) {
    if (gs[k].n() != sum.rows()) throw Error(ErrorKind::DimensionMismatch, "union of graphs with different n");
    sum += gs[k].adjacency();
  }
  return Digraph(std::move(sum));
}

namespace {

// Nodes reachable from root following edges j -> i (a_ij != 0 or above the
// threshold when given).
std::vector<char> reachable_from(const Matrix& a, std::size_t root, double threshold) {
  const std::size_t n = a.rows();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{root};
  seen[root] = 1;
  while (!stack.empty()) {
    const std::size_t j = stack.back();
    stack.pop_back();
    for (std::size_t i = 0; i < n; ++i) {
      const double w = a(i, j);
      const bool edge = threshold < 0.0 ? w != 0.0 : w > threshold;
      if (edge && !seen[i]) {
        seen[i] = 1;
        stack.push_back(i);
      }
    }
  }
  return seen;
}

bool reaches_all(const std::vector<char>& seen) {
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  const std::size_t n = g.n();
  if (n == 0) return true;
  // Strongly connected iff node 0 reaches all and all reach node 0.
  if (!reaches_all(reachable_from(g.adjacency(), 0, -1.0))) return false;
  return reaches_all(reachable_from(g.adjacency().transpose(), 0, -1.0));
}

bool has_spanning_tree(const Laplacian& l, double tol) {
  const std::size_t n = l.n();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      a(i, j) = -l.matrix(i, j);
      if (a(i, j) < -tol) {
        throw Error(ErrorKind::NegativeWeights,
                    "implied weight a(" + std::to_string(i) + "," + std::to_string(j) + ") = " +
                        std::to_string(a(i, j)));
      }
    }
  for (std::size_t root = 0; root < n; ++root)
    if (reaches_all(reachable_from(a, root, tol))) return true;
  return n == 0;
}

double algebraic_connectivity(const Matrix& m, double tol) {
  if (!m.square()) throw Error(ErrorKind::DimensionMismatch, "algebraic connectivity of non-square matrix");
  if (m.rows() < 2) throw Error(ErrorKind::DimensionMismatch, "algebraic connectivity needs n >= 2");
  const double scale = 1.0 + m.max_abs();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v;
    if (std::abs(s) > tol * scale) {
      throw Error(ErrorKind::RowSumViolation, "row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
  return linalg::sym_eigenvalues(m, tol)[1];
}

Digraph complete_graph(std::size_t n, double w) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) a(i, j) = w;
  return Digraph(std::move(a));
}

Digraph directed_ring(std::size_t n, double w) {
  Matrix a(n, n);
  if (n >= 2)
    for (std::size_t i = 0; i < n; ++i) a((i + 1) % n, i) = w;
  return Digraph(std::move(a));
}

Digraph undirected_ring(std::size_t n, double w) {
  Matrix a(n, n);
  if (n >= 2)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      a(i, j) = w;
      a(j, i) = w;
    }
  return Digraph(std::move(a));
}

Digraph path_graph(std::size_t n, double w) {
  Matrix a(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = w;
    a(i + 1, i) = w;
  }
  return Digraph(std::move(a));
}

Digraph star_inward(std::size_t n, double w) {
  Matrix a(n, n);
  for (std::size_t j = 1; j < n; ++j) a(0, j) = w;
  return Digraph(std::move(a));
}

Digraph empty_graph(std::size_t n) { return Digraph(n); }

}  // namespace stochavg::graph
