#include "acid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "acid/error.hpp"

namespace acid {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

bool is_connected(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::size_t components = n;
  for (const auto& e : edges) {
    auto a = find_root(parent, e.i);
    auto b = find_root(parent, e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "ring") return TopologyKind::ring;
  if (name == "complete") return TopologyKind::complete;
  if (name == "star") return TopologyKind::star;
  if (name == "custom") return TopologyKind::custom;
  fail(ErrorCode::invalid_argument, "unknown topology kind '" + std::string(name) + "'");
}

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::complete: return "complete";
    case TopologyKind::star: return "star";
    case TopologyKind::custom: return "custom";
  }
  return "?";
}

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  require(n_ >= 1, "graph needs at least one node");
  for (auto& e : edges_) {
    require(e.i < n_ && e.j < n_,
            "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") out of range");
    require(e.i != e.j, "self-loop on node " + std::to_string(e.i));
    require(std::isfinite(e.rate) && e.rate > 0.0, "edge rates must be positive and finite");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    require(!(edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j),
            "duplicate edge (" + std::to_string(edges_[k].i) + "," +
                std::to_string(edges_[k].j) + ")");
  }
  if (!is_connected(n_, edges_)) fail(ErrorCode::disconnected, "graph is disconnected");
  degree_.assign(n_, 0);
  for (const auto& e : edges_) {
    ++degree_[e.i];
    ++degree_[e.j];
  }
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j},
                             [](const Edge& e, const std::pair<std::size_t, std::size_t>& key) {
                               return e.i != key.first ? e.i < key.first : e.j < key.second;
                             });
  return it != edges_.end() && it->i == i && it->j == j;
}

double Graph::total_rate() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.rate;
  return total;
}

Graph Graph::scaled(double factor) const {
  require(factor > 0.0, "rate scale factor must be positive");
  auto edges = edges_;
  for (auto& e : edges) e.rate *= factor;
  return Graph(n_, std::move(edges));
}

Graph build_custom_topology(std::size_t n,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                            double ratio) {
  require(ratio > 0.0 && std::isfinite(ratio), "ratio must be positive");
  require(n >= 1, "custom topology needs at least one node");
  std::vector<std::size_t> deg(n, 0);
  for (auto [i, j] : pairs) {
    require(i < n && j < n, "edge (" + std::to_string(i) + "," + std::to_string(j) +
                                ") out of range");
    ++deg[i];
    ++deg[j];
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    edges.push_back({i, j, ratio / static_cast<double>(std::max(deg[i], deg[j]))});
  }
  return Graph(n, std::move(edges));
}

Graph build_topology(TopologyKind kind, std::size_t n, double ratio) {
  require(ratio > 0.0 && std::isfinite(ratio), "ratio must be positive");
  require(kind != TopologyKind::custom, "custom topologies need an edge list");
  require(n >= 2, "topology needs at least two nodes");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  switch (kind) {
    case TopologyKind::ring:
      if (n == 2) {
        pairs.emplace_back(0, 1);
      } else {
        for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
      }
      break;
    case TopologyKind::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
      break;
    case TopologyKind::star:
      for (std::size_t j = 1; j < n; ++j) pairs.emplace_back(0, j);
      break;
    case TopologyKind::custom:
      break;
  }
  return build_custom_topology(n, pairs, ratio);
}

Eigen::MatrixXd laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    lap(i, i) += e.rate;
    lap(j, j) += e.rate;
    lap(i, j) -= e.rate;
    lap(j, i) -= e.rate;
  }
  return lap;
}

LaplacianSpectrum::LaplacianSpectrum(const Graph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(g));
  if (solver.info() != Eigen::Success) fail(ErrorCode::internal, "eigendecomposition failed");
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
  const double lambda_max = values_.size() > 0 ? values_(values_.size() - 1) : 0.0;
  tolerance_ = 1e-10 * lambda_max;
  null_dim_ = 0;
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    if (values_(k) <= tolerance_) ++null_dim_;
  }
}

Eigen::MatrixXd LaplacianSpectrum::pseudoinverse() const {
  if (null_dim_ != 1) {
    fail(ErrorCode::disconnected,
         "Laplacian has " + std::to_string(null_dim_) + " zero eigenvalues; graph is disconnected");
  }
  const auto n = values_.size();
  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (values_(k) <= tolerance_) continue;
    pinv.noalias() += (1.0 / values_(k)) * vectors_.col(k) * vectors_.col(k).transpose();
  }
  return pinv;
}

double effective_resistance(const Eigen::MatrixXd& pinv, std::size_t i, std::size_t j) {
  require(i < static_cast<std::size_t>(pinv.rows()) && j < static_cast<std::size_t>(pinv.rows()),
          "node index out of range");
  if (i == j) return 0.0;
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  return pinv(a, a) + pinv(b, b) - 2.0 * pinv(a, b);
}

Eigen::MatrixXd laplacian_pseudoinverse(const Graph& g) {
  return LaplacianSpectrum(g).pseudoinverse();
}

double effective_resistance(const Graph& g, std::size_t i, std::size_t j) {
  require(i < g.node_count() && j < g.node_count(), "node index out of range");
  if (i == j) return 0.0;
  return effective_resistance(laplacian_pseudoinverse(g), i, j);
}

SpectralReport spectral_report(const Graph& g) {
  require(g.node_count() >= 2, "spectral quantities need at least two nodes",
          ErrorCode::disconnected);
  LaplacianSpectrum spectrum(g);
  const Eigen::MatrixXd pinv = spectrum.pseudoinverse();
  const auto& values = spectrum.eigenvalues();

  SpectralReport report{};
  report.chi1 = 1.0 / values(1);
  double max_resistance = 0.0;
  for (const auto& e : g.edges()) {
    max_resistance = std::max(max_resistance, effective_resistance(pinv, e.i, e.j));
  }
  report.chi2 = 0.5 * max_resistance;
  report.trace_lambda = 2.0 * g.total_rate();
  report.lambda_norm = values(values.size() - 1);
  return report;
}

}  // namespace acid
