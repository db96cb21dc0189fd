#include "qswitch/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qswitch/error.hpp"

namespace qswitch {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

class Document {
 public:
  explicit Document(std::string_view text) {
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      const std::string_view raw =
          text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      const std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#' || line.front() == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail("line " + std::to_string(line_no) + ": malformed section");
        current = std::string(trim(line.substr(1, line.size() - 2)));
        if (sections_.count(current)) fail("duplicate section [" + current + "]");
        sections_[current];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        fail("line " + std::to_string(line_no) + ": expected key = value");
      }
      if (current.empty()) fail("line " + std::to_string(line_no) + ": entry outside a section");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      Section& sec = sections_[current];
      if (sec.count(key)) fail("duplicate key '" + key + "' in [" + current + "]");
      sec[key] = Entry{value, line_no};
    }
  }

  bool has_section(const std::string& name) const { return sections_.count(name) > 0; }

  const Section& section(const std::string& name) const {
    const auto it = sections_.find(name);
    if (it == sections_.end()) fail("missing section [" + name + "]");
    used_[name];
    return it->second;
  }

  std::optional<std::string> get(const std::string& sec, const std::string& key) const {
    if (!has_section(sec)) return std::nullopt;
    const Section& s = section(sec);
    const auto it = s.find(key);
    if (it == s.end()) return std::nullopt;
    used_[sec].insert(key);
    return it->second.value;
  }

  std::string require(const std::string& sec, const std::string& key) const {
    auto v = get(sec, key);
    if (!v) fail("missing key '" + key + "' in [" + sec + "]");
    return *v;
  }

  /* Every entry must have been consumed. */
  void check_unused() const {
    for (const auto& [name, sec] : sections_) {
      const auto u = used_.find(name);
      if (u == used_.end()) fail("unknown section [" + name + "]");
      for (const auto& [key, entry] : sec) {
        if (!u->second.count(key)) {
          fail("line " + std::to_string(entry.line) + ": unknown key '" + key + "' in [" +
               name + "]");
        }
      }
    }
  }

 private:
  std::map<std::string, Section> sections_;
  mutable std::map<std::string, std::set<std::string>> used_;
};

double number(const std::string& text, const std::string& what) {
  try {
    return parse_number(text);
  } catch (const Error&) {
    fail(what + ": '" + text + "' is not a finite number");
  }
}

Vec vector_of(const std::string& text, const std::string& what) {
  const auto parts = split_ws(text);
  if (parts.empty()) fail(what + ": empty vector");
  Vec v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[i] = number(std::string(parts[i]), what);
  return v;
}

Mat matrix_of(const std::string& text, const std::string& what) {
  std::vector<Vec> rows;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t semi = text.find(';', pos);
    const std::string row =
        text.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
    rows.push_back(vector_of(row, what));
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  const auto cols = rows.front().size();
  Mat m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) fail(what + ": ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  return m;
}

PowerKInf power_of(const std::string& text, const std::string& what) {
  const Vec v = vector_of(text, what);
  if (v.size() != 2) fail(what + ": expected 'c e'");
  PowerKInf f{v[0], v[1]};
  try {
    f.validate();
  } catch (const Error& e) {
    fail(what + ": " + e.what());
  }
  return f;
}

long long integer_of(const std::string& text, const std::string& what) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    fail(what + ": '" + text + "' is not an integer");
  }
  return v;
}

Box box_of(const Document& doc, const std::string& name, int n) {
  const Vec lo = vector_of(doc.require("spec", name + ".lo"), name + ".lo");
  const Vec hi = vector_of(doc.require("spec", name + ".hi"), name + ".hi");
  if (lo.size() != n || hi.size() != n) fail(name + " box has wrong dimension");
  return Box(lo, hi);
}

std::string vector_text(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_number(v[i]);
  }
  return s;
}

std::string matrix_text(const Mat& m) {
  std::string s;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) s += "; ";
    s += vector_text(m.row(r).transpose());
  }
  return s;
}

std::string power_text(const PowerKInf& f) {
  return format_number(f.c) + " " + format_number(f.e);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorKind::Format, "number formatting failed");
  return std::string(buf, p);
}

double parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::Format, "not a finite number: '" + std::string(text) + "'");
  }
  return v;
}

SwitchedSystem ProblemConfig::build_system() const {
  if (thermal) return make_thermal_system(thermal_params);
  std::vector<ModeDynamics> dyn;
  for (const auto& m : modes) dyn.push_back(ModeDynamics::affine(m.A, m.b));
  return SwitchedSystem(std::move(dyn));
}

double ProblemConfig::resolved_eta() const {
  return eta ? *eta : max_eta(cert, tau, epsilon);
}

SamplingParams ProblemConfig::params() const {
  SamplingParams p;
  p.tau = tau;
  p.eta = resolved_eta();
  p.epsilon = epsilon;
  return p;
}

ProblemConfig parse_config(std::string_view text) {
  const Document doc(text);
  ProblemConfig cfg;

  const auto preset = doc.get("system", "preset");
  if (preset) {
    if (*preset != "thermal") fail("unknown system preset '" + *preset + "'");
    cfg.thermal = true;
    cfg.dimension = 2;
    auto knob = [&](const char* key, double& field) {
      if (auto v = doc.get("system", key)) field = number(*v, key);
    };
    ThermalParameters& t = cfg.thermal_params;
    knob("a21", t.a21);
    knob("a12", t.a12);
    knob("ae1", t.ae1);
    knob("ae2", t.ae2);
    knob("af", t.af);
    knob("te", t.te);
    knob("tf", t.tf);
  } else {
    cfg.dimension = static_cast<int>(integer_of(doc.require("system", "dimension"), "dimension"));
    const auto count = integer_of(doc.require("system", "modes"), "modes");
    if (cfg.dimension < 1) fail("dimension must be >= 1");
    if (count < 1 || count > static_cast<long long>(kMaxModes)) fail("modes must be in 1..8");
    for (long long p = 0; p < count; ++p) {
      const std::string key = "mode" + std::to_string(p);
      AffineModeSpec m{matrix_of(doc.require("system", key + ".A"), key + ".A"),
                       vector_of(doc.require("system", key + ".b"), key + ".b")};
      if (m.A.rows() != cfg.dimension || m.A.cols() != cfg.dimension || m.b.size() != cfg.dimension) {
        fail(key + " does not match the dimension");
      }
      cfg.modes.push_back(std::move(m));
    }
  }
  const int n = cfg.dimension;

  const std::string metric = doc.require("certificate", "M");
  cfg.cert.M = metric == "identity" ? Mat(Mat::Identity(n, n)) : matrix_of(metric, "M");
  cfg.cert.alpha_lo = power_of(doc.require("certificate", "alpha_lo"), "alpha_lo");
  cfg.cert.alpha_hi = power_of(doc.require("certificate", "alpha_hi"), "alpha_hi");
  cfg.cert.gamma = power_of(doc.require("certificate", "gamma"), "gamma");
  cfg.cert.kappa = number(doc.require("certificate", "kappa"), "kappa");
  try {
    cfg.cert.validate(n);
  } catch (const Error& e) {
    fail(std::string("certificate: ") + e.what());
  }

  cfg.tau = number(doc.require("params", "tau"), "tau");
  const std::string eta = doc.require("params", "eta");
  if (eta != "auto") cfg.eta = number(eta, "eta");
  cfg.epsilon = number(doc.require("params", "epsilon"), "epsilon");
  if (!(cfg.tau > 0.0)) fail("tau must be positive");
  if (cfg.eta && !(*cfg.eta > 0.0)) fail("eta must be positive");
  if (!(cfg.epsilon > 0.0)) fail("epsilon must be positive");

  const std::string kind = doc.require("spec", "kind");
  if (kind == "safety") {
    cfg.kind = SpecKind::Safety;
  } else if (kind == "reach") {
    cfg.kind = SpecKind::Reach;
  } else {
    fail("spec kind must be safety or reach");
  }
  cfg.safe = box_of(doc, "safe", n);
  if (cfg.kind == SpecKind::Reach) cfg.target = box_of(doc, "target", n);

  if (auto v = doc.get("runtime", "substeps")) {
    cfg.substeps = static_cast<int>(integer_of(*v, "substeps"));
    if (cfg.substeps < 1) fail("substeps must be >= 1");
  }
  if (auto v = doc.get("runtime", "threads")) {
    cfg.threads = static_cast<int>(integer_of(*v, "threads"));
    if (cfg.threads < 0) fail("threads must be >= 0");
  }
  if (auto v = doc.get("runtime", "seed")) {
    const long long s = integer_of(*v, "seed");
    if (s < 0) fail("seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  doc.check_unused();
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ProblemConfig& cfg) {
  std::ostringstream os;
  os << "[system]\n";
  if (cfg.thermal) {
    const ThermalParameters& t = cfg.thermal_params;
    os << "preset = thermal\n"
       << "a21 = " << format_number(t.a21) << "\n"
       << "a12 = " << format_number(t.a12) << "\n"
       << "ae1 = " << format_number(t.ae1) << "\n"
       << "ae2 = " << format_number(t.ae2) << "\n"
       << "af = " << format_number(t.af) << "\n"
       << "te = " << format_number(t.te) << "\n"
       << "tf = " << format_number(t.tf) << "\n";
  } else {
    os << "dimension = " << cfg.dimension << "\n"
       << "modes = " << cfg.modes.size() << "\n";
    for (std::size_t p = 0; p < cfg.modes.size(); ++p) {
      os << "mode" << p << ".A = " << matrix_text(cfg.modes[p].A) << "\n"
         << "mode" << p << ".b = " << vector_text(cfg.modes[p].b) << "\n";
    }
  }
  const int n = cfg.dimension;
  const bool identity = cfg.cert.M.rows() == n && cfg.cert.M == Mat::Identity(n, n);
  os << "\n[certificate]\n"
     << "M = " << (identity ? std::string("identity") : matrix_text(cfg.cert.M)) << "\n"
     << "alpha_lo = " << power_text(cfg.cert.alpha_lo) << "\n"
     << "alpha_hi = " << power_text(cfg.cert.alpha_hi) << "\n"
     << "gamma = " << power_text(cfg.cert.gamma) << "\n"
     << "kappa = " << format_number(cfg.cert.kappa) << "\n";
  os << "\n[params]\n"
     << "tau = " << format_number(cfg.tau) << "\n"
     << "eta = " << (cfg.eta ? format_number(*cfg.eta) : std::string("auto")) << "\n"
     << "epsilon = " << format_number(cfg.epsilon) << "\n";
  os << "\n[spec]\n"
     << "kind = " << (cfg.kind == SpecKind::Safety ? "safety" : "reach") << "\n"
     << "safe.lo = " << vector_text(cfg.safe.lo) << "\n"
     << "safe.hi = " << vector_text(cfg.safe.hi) << "\n";
  if (cfg.target) {
    os << "target.lo = " << vector_text(cfg.target->lo) << "\n"
       << "target.hi = " << vector_text(cfg.target->hi) << "\n";
  }
  os << "\n[runtime]\n"
     << "substeps = " << cfg.substeps << "\n"
     << "threads = " << cfg.threads << "\n"
     << "seed = " << cfg.seed << "\n";
  return os.str();
}

}  // namespace qswitch
