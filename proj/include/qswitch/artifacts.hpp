#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qswitch/abstraction.hpp"
#include "qswitch/box.hpp"
#include "qswitch/determinizer.hpp"
#include "qswitch/runtime.hpp"
#include "qswitch/synthesis.hpp"

namespace qswitch {

struct Problem;

/* Shared header of controller and tree files. Numbers use the shortest
 * round-trip decimal form, so headers reproduce exactly. */
struct ArtifactHeader {
  SpecKind kind = SpecKind::Safety;
  int n = 0;
  double eta = 0.0;
  double epsilon = 0.0;
  double tau = 0.0;
  Box safe;
  std::optional<Box> target;
  std::size_t modes = 0;
  CellRange cells;

  Lattice lattice() const { return Lattice(n, eta); }
  Specification specification() const;
  friend bool operator==(const ArtifactHeader&, const ArtifactHeader&) = default;
};

ArtifactHeader header_for(const Problem& pb);

/* "QSA1": text header, then per mode one line of successor indices per grid
 * row (-1 = OUT). Debug dump only. */
void write_abstraction(std::ostream& os, const SymbolicModel& model, const Box& working_box);
struct AbstractionFile {
  Box working_box;
  SymbolicModel model;
};
AbstractionFile read_abstraction(std::istream& is);

/* "QSC1": text header, "data", one ModeSet byte per cell in row-major order,
 * then for reach controllers one little-endian uint32 J_tilde per cell. */
struct ControllerFile {
  ArtifactHeader header;
  RefinedController controller;
};
void write_controller(std::ostream& os, const ControllerFile& file);
ControllerFile read_controller(std::istream& is);

/* "QST1": text header, "nodes <count>", then one preorder node per line,
 * "N <axis> <threshold>" or "L <mode>". */
struct TreeFile {
  ArtifactHeader header;
  DecisionTree tree;
};
void write_tree(std::ostream& os, const TreeFile& file);
TreeFile read_tree(std::istream& is);

/* Header "t,x1,...,xn,mode"; 12 significant digits; the final state (and a
 * blocked one) has mode -1. */
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double tau);
struct CsvTrajectory {
  std::vector<double> t;
  Trajectory traj;
};
CsvTrajectory read_trajectory_csv(std::istream& is);

/* First line of a file ("QSA1", "QSC1", "QST1", ...). */
std::string read_magic(const std::string& path);

void save_text(const std::string& path, const std::string& content);
std::string load_text(const std::string& path);

}  // namespace qswitch
