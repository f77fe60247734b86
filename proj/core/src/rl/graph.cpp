#include "hgbd/rl/graph.hpp"

#include <cmath>

namespace hgbd::rl {

double ubd_scale(double ubd) { return std::isfinite(ubd) ? std::max(1.0, std::abs(ubd)) : 1.0; }

BipartiteGraph encode_master_graph(const MasterState& master, const BinaryAssignment& prev_y, double scale) {
  const std::size_t m = master.m();
  if (prev_y.size() != m) throw DimensionError("prev_y has wrong length");
  if (!(scale > 0.0)) throw std::invalid_argument("feature scale must be positive");
  BipartiteGraph g;
  g.num_vars = m;
  g.num_pure = static_cast<std::size_t>(master.K().rows());
  g.num_cuts = master.cuts().size();

  for (std::size_t i = 0; i < m; ++i) {
    g.types.push_back(NodeType::Variable);
    g.equality_row.push_back(false);
    g.features.push_back(static_cast<double>(prev_y[i]));
  }
  for (std::size_t r = 0; r < g.num_pure; ++r) {
    const auto node = static_cast<std::uint32_t>(g.types.size());
    g.types.push_back(NodeType::PureRow);
    g.equality_row.push_back(master.equality()[r]);
    g.features.push_back(master.b()[static_cast<Eigen::Index>(r)]);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = master.K()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
      if (a != 0.0) {
        g.adjacency.emplace_back(static_cast<std::uint32_t>(i), node);
        g.edge_values.push_back(a);
      }
    }
  }
  for (const auto& cut : master.cuts()) {
    const auto node = static_cast<std::uint32_t>(g.types.size());
    g.types.push_back(NodeType::Cut);
    g.equality_row.push_back(false);
    g.features.push_back(-cut.constant / scale);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = cut.coeff[static_cast<Eigen::Index>(i)];
      if (a != 0.0) {
        g.adjacency.emplace_back(static_cast<std::uint32_t>(i), node);
        g.edge_values.push_back(a / scale);
      }
    }
  }
  return g;
}

nn::Tensor BipartiteGraph::node_input() const {
  nn::Tensor t(num_nodes(), node_input_width());
  for (std::size_t v = 0; v < num_nodes(); ++v) {
    t(v, 0) = features[v];
    t(v, 1) = types[v] == NodeType::Variable ? 1.0 : 0.0;
    t(v, 2) = types[v] == NodeType::PureRow ? 1.0 : 0.0;
    t(v, 3) = equality_row[v] ? 1.0 : 0.0;
    t(v, 4) = types[v] == NodeType::Cut ? 1.0 : 0.0;
    if (types[v] == NodeType::Variable) t(v, 5 + v) = 1.0;
  }
  return t;
}

nn::EdgeList BipartiteGraph::message_edges() const {
  nn::EdgeList el;
  el.num_nodes = num_nodes();
  for (const auto& [var, con] : adjacency) {
    el.src.push_back(var);
    el.dst.push_back(con);
    el.src.push_back(con);
    el.dst.push_back(var);
  }
  return el;
}

nn::Tensor BipartiteGraph::edge_input() const {
  nn::Tensor t(2 * num_edges(), 1);
  for (std::size_t e = 0; e < num_edges(); ++e) {
    t(2 * e, 0) = edge_values[e];
    t(2 * e + 1, 0) = edge_values[e];
  }
  return t;
}

}  // namespace hgbd::rl
