#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace acid {

struct Edge {
  std::size_t i;
  std::size_t j;
  double rate;  // expected communication events per unit time

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class TopologyKind { ring, complete, star, custom };

TopologyKind parse_topology_kind(std::string_view name);
std::string_view to_string(TopologyKind kind);

/// Undirected rate-weighted communication graph.
///
/// Edges are stored canonically (i < j, lexicographic order). Construction
/// rejects self-loops, duplicates, non-positive rates, out-of-range nodes
/// and disconnected edge sets. A single node with no edges is accepted; it
/// is the degenerate network of one worker.
class Graph {
 public:
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t degree(std::size_t node) const { return degree_.at(node); }
  bool has_edge(std::size_t i, std::size_t j) const;

  /// Sum of all edge rates.
  double total_rate() const;

  Graph scaled(double factor) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degree_;
};

/// Builds a named topology whose edge rates give every node an expected
/// `ratio` incident communications per unit time. For non-regular graphs
/// each edge gets ratio / max(deg(i), deg(j)), so no node exceeds `ratio`.
Graph build_topology(TopologyKind kind, std::size_t n, double ratio);

/// Custom topology from an unweighted edge list, rates normalized as above.
Graph build_custom_topology(std::size_t n,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                            double ratio);

/// Rate-weighted Laplacian: sum over edges of rate * (e_i - e_j)(e_i - e_j)^T.
Eigen::MatrixXd laplacian(const Graph& g);

struct SpectralReport {
  double chi1;          // 1 / smallest nonzero Laplacian eigenvalue
  double chi2;          // half the largest effective resistance over edges
  double trace_lambda;  // Tr(Laplacian)
  double lambda_norm;   // largest Laplacian eigenvalue
};

/// Eigendecomposition of the Laplacian with the zero-eigenvalue tolerance
/// of 1e-10 * lambda_max applied. Shared by the report, the pseudoinverse
/// and the resistance queries.
class LaplacianSpectrum {
 public:
  explicit LaplacianSpectrum(const Graph& g);

  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
  double zero_tolerance() const { return tolerance_; }
  /// Number of eigenvalues at or below the zero tolerance.
  std::size_t null_dimension() const { return null_dim_; }

  /// Moore-Penrose pseudoinverse. Throws ErrorCode::disconnected when the
  /// null space is larger than span(1).
  Eigen::MatrixXd pseudoinverse() const;

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
  double tolerance_ = 0.0;
  std::size_t null_dim_ = 0;
};

SpectralReport spectral_report(const Graph& g);

Eigen::MatrixXd laplacian_pseudoinverse(const Graph& g);

/// (e_i - e_j)^T L^+ (e_i - e_j). Zero when i == j; i, j need not be adjacent.
double effective_resistance(const Graph& g, std::size_t i, std::size_t j);

/// Same query against a precomputed pseudoinverse.
double effective_resistance(const Eigen::MatrixXd& pinv, std::size_t i, std::size_t j);

}  // namespace acid
