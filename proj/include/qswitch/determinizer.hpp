#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qswitch/lattice.hpp"
#include "qswitch/synthesis.hpp"

namespace qswitch {

/* Preorder tree node. Internal nodes send cells with k[axis] <= threshold to
 * the left child (the next node) and the rest to node `right`. */
struct TreeNode {
  static constexpr int kLeaf = -1;

  int axis = kLeaf;
  std::int64_t value = 0;  // threshold for internal nodes, mode for leaves
  std::uint32_t right = 0;

  bool is_leaf() const { return axis == kLeaf; }
  static TreeNode leaf(int mode) { return {kLeaf, mode, 0}; }
  static TreeNode split(int axis, std::int64_t threshold) { return {axis, threshold, 0}; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  /* Nodes in preorder; `right` links are recomputed. Throws a format error if
   * the sequence is not a complete tree or a split leaves an empty side. */
  DecisionTree(CellRange cells, std::size_t mode_count, std::vector<TreeNode> nodes);

  const CellRange& cells() const { return cells_; }
  std::size_t mode_count() const { return modes_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  /* Longest root-to-leaf path, in edges. */
  std::size_t depth() const;

  /* Throws a domain error for cells outside the range. */
  int lookup(const Cell& q) const;
  int lookup(const std::int64_t* k) const;

  friend bool operator==(const DecisionTree& a, const DecisionTree& b) {
    return a.cells_ == b.cells_ && a.modes_ == b.modes_ && a.nodes_ == b.nodes_;
  }

 private:
  CellRange cells_;
  std::size_t modes_ = 0;
  std::vector<TreeNode> nodes_;
};

/* Upper bound on depth for the median split: sum of ceil(log2(extent)). */
std::size_t depth_bound(const CellRange& cells);

/* Split-tree determinization: a region becomes a leaf with the lowest mode
 * allowed on all of its cells; otherwise it is split at the median cell of its
 * widest axis (lowest axis on ties). */
DecisionTree determinize_safety(const RefinedController& K);

/* `target_cells` are the cells lying wholly inside the target box; they and
 * the cells with infinite J_tilde place no constraint on the tree. */
DecisionTree determinize_reach(const RefinedController& K, const CellRange& target_cells);

struct DeterminizationReport {
  std::size_t cells_checked = 0;
  std::size_t constrained = 0;
  std::vector<std::size_t> violations;  // spec cell indices, ascending

  bool passed() const { return violations.empty(); }
};

DeterminizationReport verify_determinization(const DecisionTree& tree,
                                             const RefinedController& K,
                                             int threads = 0);
DeterminizationReport verify_determinization(const DecisionTree& tree,
                                             const RefinedController& K,
                                             const CellRange& target_cells,
                                             int threads = 0);

/* Per-cell allowed modes used by the builder and the checker; cells without
 * a constraint get every mode. */
std::vector<std::uint8_t> permitted_modes(const RefinedController& K);
std::vector<std::uint8_t> permitted_modes(const RefinedController& K,
                                          const CellRange& target_cells);

}  // namespace qswitch
