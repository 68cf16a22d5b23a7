#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stochavg/linalg.hpp"

namespace stochavg::graph {

using linalg::Matrix;

inline constexpr double kBalanceTol = 1e-9;

/// Weighted digraph on n agents. Entry a_ij != 0 means an edge j -> i
/// (agent i hears agent j) with weight a_ij, which may be negative.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t n) : adjacency_(n, n) {}
  /// Throws DimensionMismatch for non-square input, InvalidArgument for a
  /// nonzero diagonal.
  explicit Digraph(Matrix adjacency);

  std::size_t n() const noexcept { return adjacency_.rows(); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  double weight(std::size_t i, std::size_t j) const { return adjacency_(i, j); }

  std::size_t edge_count() const noexcept;
  /// Agents j with a_ij != 0.
  std::vector<std::size_t> neighbours(std::size_t i) const;
  double in_degree(std::size_t i) const;   // row sum
  double out_degree(std::size_t i) const;  // column sum

  friend bool operator==(const Digraph&, const Digraph&) = default;

 private:
  Matrix adjacency_;
};

/// L = D - A with D = diag(row sums of A).
struct Laplacian {
  Matrix matrix;
  std::size_t n() const noexcept { return matrix.rows(); }
};

Laplacian laplacian(const Digraph& g);

/// (L + L^T) / 2, exactly symmetric.
Matrix symmetrized_laplacian(const Laplacian& l);
Matrix symmetrized_laplacian(const Matrix& l);

bool is_balanced(const Digraph& g, double tol = kBalanceTol);

Digraph graph_union(std::span<const Digraph> gs);

bool is_strongly_connected(const Digraph& g);

/// True iff the digraph read off -offdiag(l) has a node reaching every other.
/// Throws NegativeWeights if any implied weight is below -tol.
bool has_spanning_tree(const Laplacian& l, double tol = kBalanceTol);

/// Second smallest eigenvalue of a symmetric zero-row-sum matrix.
double algebraic_connectivity(const Matrix& m, double tol = linalg::kDefaultTol);

// Builders used by configs and tests. All weights default to 1.
Digraph complete_graph(std::size_t n, double w = 1.0);
Digraph directed_ring(std::size_t n, double w = 1.0);   // edges i -> i+1
Digraph undirected_ring(std::size_t n, double w = 1.0);
Digraph path_graph(std::size_t n, double w = 1.0);      // undirected path
Digraph star_inward(std::size_t n, double w = 1.0);     // leaves -> hub 0
Digraph empty_graph(std::size_t n);

}  // namespace stochavg::graph
