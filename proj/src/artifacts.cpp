#include "qswitch/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qswitch/config.hpp"
#include "qswitch/error.hpp"
#include "qswitch/pipeline.hpp"

namespace qswitch {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::Format, msg); }

std::string join(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_number(v[i]);
  }
  return s;
}

template <class T>
std::string join_ints(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

long long to_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    bad("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) bad("expected an integer, got '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  try {
    return parse_number(s);
  } catch (const Error&) {
    bad("expected a number, got '" + s + "'");
  }
}

/* Line-oriented reader for "key values..." headers in fixed order. */
class HeaderReader {
 public:
  explicit HeaderReader(std::istream& is) : is_(is) {}

  std::string line() {
    std::string l;
    if (!std::getline(is_, l)) bad("unexpected end of file");
    return l;
  }

  std::vector<std::string> expect(const std::string& key) {
    auto w = words(line());
    if (w.empty() || w[0] != key) bad("expected '" + key + "' line");
    w.erase(w.begin());
    return w;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t count) {
    auto w = expect(key);
    if (w.size() != count) bad("wrong number of values for '" + key + "'");
    return w;
  }

  double number(const std::string& key) { return to_double(expect(key, 1)[0]); }
  long long integer(const std::string& key) { return to_int(expect(key, 1)[0]); }

  Vec vector(const std::string& key, int n) {
    const auto w = expect(key, static_cast<std::size_t>(n));
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = to_double(w[i]);
    return v;
  }

  std::vector<std::int64_t> ints(const std::string& key, int n) {
    const auto w = expect(key, static_cast<std::size_t>(n));
    std::vector<std::int64_t> v(n);
    for (int i = 0; i < n; ++i) v[i] = to_int(w[i]);
    return v;
  }

  std::istream& stream() { return is_; }

 private:
  std::istream& is_;
};

void expect_magic(HeaderReader& r, const std::string& magic) {
  if (r.line() != magic) bad("not a " + magic + " file");
}

void write_header(std::ostream& os, const ArtifactHeader& h) {
  os << "kind " << (h.kind == SpecKind::Safety ? "safety" : "reach") << "\n"
     << "n " << h.n << "\n"
     << "eta " << format_number(h.eta) << "\n"
     << "epsilon " << format_number(h.epsilon) << "\n"
     << "tau " << format_number(h.tau) << "\n"
     << "safe.lo " << join(h.safe.lo) << "\n"
     << "safe.hi " << join(h.safe.hi) << "\n";
  if (h.kind == SpecKind::Reach) {
    os << "target.lo " << join(h.target->lo) << "\n"
       << "target.hi " << join(h.target->hi) << "\n";
  }
  os << "modes " << h.modes << "\n"
     << "kmin " << join_ints(h.cells.kmin()) << "\n"
     << "kmax " << join_ints(h.cells.kmax()) << "\n"
     << "cells " << h.cells.count() << "\n";
}

ArtifactHeader read_header(HeaderReader& r) {
  ArtifactHeader h;
  const std::string kind = r.expect("kind", 1)[0];
  if (kind == "safety") {
    h.kind = SpecKind::Safety;
  } else if (kind == "reach") {
    h.kind = SpecKind::Reach;
  } else {
    bad("unknown controller kind '" + kind + "'");
  }
  const long long n = r.integer("n");
  if (n < 1 || n > 8) bad("dimension out of range");
  h.n = static_cast<int>(n);
  h.eta = r.number("eta");
  h.epsilon = r.number("epsilon");
  h.tau = r.number("tau");
  Vec lo = r.vector("safe.lo", h.n);
  h.safe = Box(lo, r.vector("safe.hi", h.n));
  if (h.kind == SpecKind::Reach) {
    Vec tlo = r.vector("target.lo", h.n);
    h.target = Box(tlo, r.vector("target.hi", h.n));
  }
  const long long modes = r.integer("modes");
  if (modes < 1 || modes > static_cast<long long>(kMaxModes)) bad("mode count out of range");
  h.modes = static_cast<std::size_t>(modes);
  auto kmin = r.ints("kmin", h.n);
  h.cells = CellRange(kmin, r.ints("kmax", h.n));
  if (r.integer("cells") != static_cast<long long>(h.cells.count())) bad("cell count mismatch");
  return h;
}

void write_u32_le(std::ostream& os, const std::vector<std::uint32_t>& v) {
  std::vector<unsigned char> buf(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (int b = 0; b < 4; ++b) buf[4 * i + b] = static_cast<unsigned char>(v[i] >> (8 * b));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::vector<std::uint32_t> read_u32_le(std::istream& is, std::size_t count) {
  std::vector<unsigned char> buf(count * 4);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    bad("truncated entry-time section");
  }
  std::vector<std::uint32_t> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = static_cast<std::uint32_t>(buf[4 * i]) | static_cast<std::uint32_t>(buf[4 * i + 1]) << 8 |
           static_cast<std::uint32_t>(buf[4 * i + 2]) << 16 |
           static_cast<std::uint32_t>(buf[4 * i + 3]) << 24;
  }
  return v;
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

Specification ArtifactHeader::specification() const {
  return kind == SpecKind::Safety ? Specification::safety(safe)
                                  : Specification::reach(safe, *target);
}

ArtifactHeader header_for(const Problem& pb) {
  ArtifactHeader h;
  h.kind = pb.config.kind;
  h.n = pb.lattice.dim();
  h.eta = pb.params.eta;
  h.epsilon = pb.params.epsilon;
  h.tau = pb.params.tau;
  h.safe = pb.safe;
  h.target = pb.target;
  h.modes = pb.system.mode_count();
  h.cells = pb.spec_cells;
  return h;
}

void write_abstraction(std::ostream& os, const SymbolicModel& model, const Box& working_box) {
  const CellRange& d = model.domain();
  os << "QSA1\n"
     << "n " << d.dim() << "\n"
     << "eta " << format_number(model.lattice().eta()) << "\n"
     << "tau " << format_number(model.tau()) << "\n"
     << "box.lo " << join(working_box.lo) << "\n"
     << "box.hi " << join(working_box.hi) << "\n"
     << "modes " << model.mode_count() << "\n"
     << "kmin " << join_ints(d.kmin()) << "\n"
     << "kmax " << join_ints(d.kmax()) << "\n"
     << "cells " << d.count() << "\n";
  const std::size_t len = d.row_length();
  std::string line;
  for (std::size_t p = 0; p < model.mode_count(); ++p) {
    os << "mode " << p << "\n";
    const auto succ = model.successors(p);
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      line.clear();
      for (std::size_t e = 0; e < len; ++e) {
        if (e) line += ' ';
        line += std::to_string(succ[r * len + e]);
      }
      line += '\n';
      os << line;
    }
  }
}

AbstractionFile read_abstraction(std::istream& is) {
  HeaderReader r(is);
  expect_magic(r, "QSA1");
  const long long n = r.integer("n");
  if (n < 1 || n > 8) bad("dimension out of range");
  const int dim = static_cast<int>(n);
  const double eta = r.number("eta");
  const double tau = r.number("tau");
  Vec lo = r.vector("box.lo", dim);
  Box box(lo, r.vector("box.hi", dim));
  const long long modes = r.integer("modes");
  if (modes < 1 || modes > static_cast<long long>(kMaxModes)) bad("mode count out of range");
  auto kmin = r.ints("kmin", dim);
  CellRange d(kmin, r.ints("kmax", dim));
  const auto cells = d.count();
  if (r.integer("cells") != static_cast<long long>(cells)) bad("cell count mismatch");
  std::vector<std::int32_t> succ(cells * static_cast<std::size_t>(modes));
  const std::size_t len = d.row_length();
  for (long long p = 0; p < modes; ++p) {
    if (r.integer("mode") != p) bad("mode sections out of order");
    for (std::size_t row = 0; row < d.row_count(); ++row) {
      const auto w = words(r.line());
      if (w.size() != len) bad("wrong row length in successor table");
      for (std::size_t e = 0; e < len; ++e) {
        const long long s = to_int(w[e]);
        if (s < -1 || s >= static_cast<long long>(cells)) bad("successor index out of range");
        succ[static_cast<std::size_t>(p) * cells + row * len + e] = static_cast<std::int32_t>(s);
      }
    }
  }
  return AbstractionFile{box, SymbolicModel(Lattice(dim, eta), d, static_cast<std::size_t>(modes),
                                            tau, std::move(succ))};
}

void write_controller(std::ostream& os, const ControllerFile& file) {
  const ArtifactHeader& h = file.header;
  const RefinedController& K = file.controller;
  if (K.kind != h.kind || !(K.cells == h.cells) || K.mode_count != h.modes ||
      K.K.size() != h.cells.count()) {
    throw Error(ErrorKind::InvalidArgument, "controller does not match its header");
  }
  os << "QSC1\n";
  write_header(os, h);
  os << "data\n";
  os.write(reinterpret_cast<const char*>(K.K.data()), static_cast<std::streamsize>(K.K.size()));
  if (h.kind == SpecKind::Reach) write_u32_le(os, K.J_tilde);
}

ControllerFile read_controller(std::istream& is) {
  HeaderReader r(is);
  expect_magic(r, "QSC1");
  ControllerFile f;
  f.header = read_header(r);
  if (r.line() != "data") bad("expected 'data' line");
  RefinedController& K = f.controller;
  K.kind = f.header.kind;
  K.cells = f.header.cells;
  K.mode_count = f.header.modes;
  K.K.resize(K.cells.count());
  if (!is.read(reinterpret_cast<char*>(K.K.data()), static_cast<std::streamsize>(K.K.size()))) {
    bad("truncated mode-set section");
  }
  const unsigned limit = 1u << K.mode_count;
  for (std::uint8_t m : K.K) {
    if (m >= limit) bad("mode set names an unknown mode");
  }
  if (K.kind == SpecKind::Reach) K.J_tilde = read_u32_le(is, K.K.size());
  if (is.peek() != std::char_traits<char>::eof()) bad("trailing bytes after controller data");
  return f;
}

void write_tree(std::ostream& os, const TreeFile& file) {
  const ArtifactHeader& h = file.header;
  if (!(file.tree.cells() == h.cells) || file.tree.mode_count() != h.modes) {
    throw Error(ErrorKind::InvalidArgument, "tree does not match its header");
  }
  os << "QST1\n";
  write_header(os, h);
  os << "nodes " << file.tree.size() << "\n";
  for (const TreeNode& node : file.tree.nodes()) {
    if (node.is_leaf()) {
      os << "L " << node.value << "\n";
    } else {
      os << "N " << node.axis << " " << node.value << "\n";
    }
  }
}

TreeFile read_tree(std::istream& is) {
  HeaderReader r(is);
  expect_magic(r, "QST1");
  ArtifactHeader h = read_header(r);
  const long long count = r.integer("nodes");
  if (count < 1) bad("tree has no nodes");
  std::vector<TreeNode> nodes;
  nodes.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const auto w = words(r.line());
    if (w.size() == 2 && w[0] == "L") {
      nodes.push_back(TreeNode::leaf(static_cast<int>(to_int(w[1]))));
    } else if (w.size() == 3 && w[0] == "N") {
      nodes.push_back(TreeNode::split(static_cast<int>(to_int(w[1])), to_int(w[2])));
    } else {
      bad("malformed tree node line");
    }
  }
  std::string rest;
  if (std::getline(is, rest)) bad("trailing content after tree nodes");
  DecisionTree tree(h.cells, h.modes, std::move(nodes));
  return TreeFile{std::move(h), std::move(tree)};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double tau) {
  const auto n = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << (i + 1);
  os << ",mode\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << csv_number(static_cast<double>(k) * tau);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << csv_number(traj.states[k][i]);
    os << ',' << (k < traj.modes.size() ? traj.modes[k] : -1) << '\n';
  }
}

CsvTrajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) bad("empty trajectory file");
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) head.push_back(cell);
  }
  if (head.size() < 3 || head.front() != "t" || head.back() != "mode") bad("bad CSV header");
  const auto n = static_cast<Eigen::Index>(head.size() - 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (head[i + 1] != "x" + std::to_string(i + 1)) bad("bad CSV header");
  }
  CsvTrajectory out;
  bool ended = false;
  while (std::getline(is, line)) {
    if (ended) bad("rows after the final state");
    std::stringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != head.size()) bad("wrong number of CSV columns");
    out.t.push_back(to_double(cells[0]));
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = to_double(cells[i + 1]);
    out.traj.states.push_back(x);
    const long long mode = to_int(cells.back());
    if (mode < 0) {
      ended = true;
    } else {
      out.traj.modes.push_back(static_cast<int>(mode));
    }
  }
  if (!ended && !out.traj.states.empty()) bad("missing final row");
  return out;
}

std::string read_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  return line;
}

void save_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Config, "write failed for " + path);
}

std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qswitch
