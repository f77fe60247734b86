#pragma once

#include <vector>

#include "hgbd/benders/cut.hpp"
#include "hgbd/nn/tape.hpp"

namespace hgbd::rl {

enum class NodeType : unsigned char { Variable, PureRow, Cut };

/**
 * Master problem as a bipartite graph.  Node order: the m binary
 * variables, then the pure-binary rows, then one node per cut in insertion
 * order.  Cut k is read as  coeff'y - Theta <= -constant.
 */
struct BipartiteGraph {
  std::size_t num_vars = 0;
  std::size_t num_pure = 0;
  std::size_t num_cuts = 0;
  std::vector<NodeType> types;
  std::vector<bool> equality_row;  // per node; true only for equality pure rows
  std::vector<double> features;    // one scalar per node (X_f)
  // Undirected (variable, constraint-node) pairs with their coefficient (X_e).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacency;
  std::vector<double> edge_values;

  std::size_t num_nodes() const { return types.size(); }
  std::size_t num_edges() const { return adjacency.size(); }

  /// Network input: [x_f, is_var, is_pure, is_eq, is_cut, onehot_m(var)].
  nn::Tensor node_input() const;
  std::size_t node_input_width() const { return 5 + num_vars; }
  /// Both directions of every adjacency pair.
  nn::EdgeList message_edges() const;
  /// Edge feature per directed edge (2E x 1), matching message_edges().
  nn::Tensor edge_input() const;
};

/// Scale used to normalize cut features: max(1, |ubd|) or 1 with no incumbent.
double ubd_scale(double ubd);

BipartiteGraph encode_master_graph(const MasterState& master, const BinaryAssignment& prev_y,
                                   double scale);

}  // namespace hgbd::rl
