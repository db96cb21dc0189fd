#include "qswitch/determinizer.hpp"

#include <algorithm>
#include <bit>

#include "qswitch/error.hpp"
#include "qswitch/parallel.hpp"
#include "qswitch/simd/kernels.hpp"

namespace qswitch {

namespace {

struct Region {
  std::vector<std::int64_t> lo, hi;
};

/* Checks the preorder layout and fills in right-child links. Returns the
 * index one past the subtree rooted at `i`. */
std::size_t link(std::vector<TreeNode>& nodes, std::size_t i, Region region) {
  if (i >= nodes.size()) throw Error(ErrorKind::Format, "tree node list is truncated");
  TreeNode& node = nodes[i];
  if (node.is_leaf()) return i + 1;
  const int axis = node.axis;
  if (axis < 0 || axis >= static_cast<int>(region.lo.size())) {
    throw Error(ErrorKind::Format, "tree split axis out of range");
  }
  const std::int64_t t = node.value;
  if (t < region.lo[axis] || t >= region.hi[axis]) {
    throw Error(ErrorKind::Format, "tree split leaves an empty side");
  }
  Region left = region, right = region;
  left.hi[axis] = t;
  right.lo[axis] = t + 1;
  const std::size_t r = link(nodes, i + 1, std::move(left));
  nodes[i].right = static_cast<std::uint32_t>(r);
  return link(nodes, r, std::move(right));
}

class Builder {
 public:
  Builder(const CellRange& cells, const std::vector<std::uint8_t>& allowed)
      : cells_(cells), allowed_(allowed), kernels_(simd::active_kernels()) {}

  std::vector<TreeNode> run() {
    build(Region{cells_.kmin(), cells_.kmax()});
    return std::move(nodes_);
  }

 private:
  /* AND of the allowed masks over the region, one row at a time. */
  std::uint8_t aggregate(const Region& r) const {
    const int n = cells_.dim();
    const int last = n - 1;
    const auto len = static_cast<std::size_t>(r.hi[last] - r.lo[last] + 1);
    std::vector<std::int64_t> k = r.lo;
    std::uint8_t acc = 0xFF;
    while (true) {
      std::size_t base = 0;
      for (int i = 0; i < n; ++i) {
        base += static_cast<std::size_t>(k[i] - cells_.kmin()[i]) * cells_.stride(i);
      }
      acc = kernels_.and_reduce(allowed_.data() + base, len, acc);
      if (acc == 0) return 0;
      int axis = last - 1;
      while (axis >= 0 && k[axis] == r.hi[axis]) {
        k[axis] = r.lo[axis];
        --axis;
      }
      if (axis < 0) return acc;
      ++k[axis];
    }
  }

  void build(const Region& r) {
    const std::uint8_t acc = aggregate(r);
    if (acc != 0) {
      nodes_.push_back(TreeNode::leaf(std::countr_zero(acc)));
      return;
    }
    int axis = 0;
    std::int64_t widest = -1;
    for (int i = 0; i < cells_.dim(); ++i) {
      const std::int64_t e = r.hi[i] - r.lo[i] + 1;
      if (e > widest) {
        widest = e;
        axis = i;
      }
    }
    if (widest <= 1) {
      // Only reachable if a cell allows no mode, which permitted_modes rules out.
      throw Error(ErrorKind::InvalidArgument, "cell with an empty permitted set");
    }
    const std::int64_t t = r.lo[axis] + (widest - 1) / 2;
    const std::size_t self = nodes_.size();
    nodes_.push_back(TreeNode::split(axis, t));
    Region left = r, right = r;
    left.hi[axis] = t;
    right.lo[axis] = t + 1;
    build(left);
    nodes_[self].right = static_cast<std::uint32_t>(nodes_.size());
    build(right);
  }

  const CellRange& cells_;
  const std::vector<std::uint8_t>& allowed_;
  const simd::Kernels& kernels_;
  std::vector<TreeNode> nodes_;
};

/* Modes a reach tree must respect at cell c; 0 means unconstrained. */
std::uint8_t reach_constraint(const RefinedController& K, const std::vector<std::uint8_t>& target,
                              std::size_t c) {
  if (target[c] || K.J_tilde[c] == kInfTime) return 0;
  return K.K[c];
}

void check_controller(const RefinedController& K) {
  if (K.K.size() != K.cells.count()) {
    throw Error(ErrorKind::InvalidArgument, "controller size does not match its cell range");
  }
  if (K.mode_count < 1 || K.mode_count > kMaxModes) {
    throw Error(ErrorKind::InvalidArgument, "controller mode count out of range");
  }
  if (K.kind == SpecKind::Reach && K.J_tilde.size() != K.K.size()) {
    throw Error(ErrorKind::InvalidArgument, "reach controller lacks entry-time bounds");
  }
}

DeterminizationReport verify(const DecisionTree& tree, const CellRange& cells,
                             const std::vector<std::uint8_t>& constraint, int threads) {
  if (!(tree.cells() == cells)) {
    throw Error(ErrorKind::InvalidArgument, "tree and controller cover different ranges");
  }
  const std::size_t count = cells.count();
  const std::size_t workers = static_cast<std::size_t>(resolve_threads(threads));
  const std::size_t chunk = std::max<std::size_t>(1, (count + workers - 1) / workers);
  const std::size_t chunks = (count + chunk - 1) / chunk;
  std::vector<std::vector<std::size_t>> found(chunks);
  parallel_for(0, chunks, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t w = lo; w < hi; ++w) {
      const std::size_t first = w * chunk;
      const std::size_t last = std::min(count, first + chunk);
      Cell q = cells.cell_at(first);
      for (std::size_t c = first; c < last; ++c) {
        if (c != first) {
          for (int i = cells.dim() - 1; i >= 0; --i) {
            if (++q.k[i] <= cells.kmax()[i]) break;
            q.k[i] = cells.kmin()[i];
          }
        }
        if (constraint[c] == 0) continue;
        const int mode = tree.lookup(q.k.data());
        if (!((constraint[c] >> mode) & 1u)) found[w].push_back(c);
      }
    }
  });
  DeterminizationReport report;
  report.cells_checked = count;
  report.constrained = static_cast<std::size_t>(
      std::count_if(constraint.begin(), constraint.end(), [](std::uint8_t m) { return m != 0; }));
  for (auto& part : found) {
    report.violations.insert(report.violations.end(), part.begin(), part.end());
  }
  return report;
}

}  // namespace

DecisionTree::DecisionTree(CellRange cells, std::size_t mode_count, std::vector<TreeNode> nodes)
    : cells_(std::move(cells)), modes_(mode_count), nodes_(std::move(nodes)) {
  if (cells_.empty()) throw Error(ErrorKind::EmptySpec, "tree over an empty cell range");
  if (modes_ < 1 || modes_ > kMaxModes) throw Error(ErrorKind::Format, "tree mode count out of range");
  for (const TreeNode& node : nodes_) {
    if (node.is_leaf() && (node.value < 0 || node.value >= static_cast<std::int64_t>(modes_))) {
      throw Error(ErrorKind::Format, "tree leaf mode out of range");
    }
  }
  if (link(nodes_, 0, Region{cells_.kmin(), cells_.kmax()}) != nodes_.size()) {
    throw Error(ErrorKind::Format, "trailing nodes after the tree");
  }
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& t) { return t.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> depth_at(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, depth_at[i]);
    if (!nodes_[i].is_leaf()) {
      depth_at[i + 1] = depth_at[i] + 1;
      depth_at[nodes_[i].right] = depth_at[i] + 1;
    }
  }
  return best;
}

int DecisionTree::lookup(const Cell& q) const {
  if (!cells_.contains(q)) throw Error(ErrorKind::Domain, "lookup outside the tree's cell range");
  return lookup(q.k.data());
}

int DecisionTree::lookup(const std::int64_t* k) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& node = nodes_[i];
    i = k[node.axis] <= node.value ? i + 1 : node.right;
  }
  return static_cast<int>(nodes_[i].value);
}

std::size_t depth_bound(const CellRange& cells) {
  std::size_t total = 0;
  for (int i = 0; i < cells.dim(); ++i) {
    total += static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(cells.extent(i) - 1)));
  }
  return total;
}

std::vector<std::uint8_t> permitted_modes(const RefinedController& K) {
  check_controller(K);
  const std::uint8_t all = ModeSet::all(K.mode_count).bits();
  std::vector<std::uint8_t> out(K.K.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = K.K[c] ? K.K[c] : all;
  return out;
}

std::vector<std::uint8_t> permitted_modes(const RefinedController& K,
                                          const CellRange& target_cells) {
  check_controller(K);
  if (K.kind != SpecKind::Reach) {
    throw Error(ErrorKind::InvalidArgument, "reach determinization needs a reach controller");
  }
  const std::uint8_t all = ModeSet::all(K.mode_count).bits();
  const auto target = membership_mask(K.cells, target_cells);
  std::vector<std::uint8_t> out(K.K.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const std::uint8_t m = reach_constraint(K, target, c);
    out[c] = m ? m : all;
  }
  return out;
}

DecisionTree determinize_safety(const RefinedController& K) {
  const auto allowed = permitted_modes(K);
  return DecisionTree(K.cells, K.mode_count, Builder(K.cells, allowed).run());
}

DecisionTree determinize_reach(const RefinedController& K, const CellRange& target_cells) {
  const auto allowed = permitted_modes(K, target_cells);
  return DecisionTree(K.cells, K.mode_count, Builder(K.cells, allowed).run());
}

DeterminizationReport verify_determinization(const DecisionTree& tree,
                                             const RefinedController& K, int threads) {
  check_controller(K);
  return verify(tree, K.cells, K.K, threads);
}

DeterminizationReport verify_determinization(const DecisionTree& tree,
                                             const RefinedController& K,
                                             const CellRange& target_cells, int threads) {
  check_controller(K);
  if (K.kind != SpecKind::Reach) {
    throw Error(ErrorKind::InvalidArgument, "reach verification needs a reach controller");
  }
  const auto target = membership_mask(K.cells, target_cells);
  std::vector<std::uint8_t> constraint(K.K.size());
  for (std::size_t c = 0; c < constraint.size(); ++c) {
    constraint[c] = reach_constraint(K, target, c);
  }
  return verify(tree, K.cells, constraint, threads);
}

}  // namespace qswitch
