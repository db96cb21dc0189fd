// qswitch: command-line front end for abstraction, synthesis, determinization
// and closed-loop simulation of switched systems.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qswitch/artifacts.hpp"
#include "qswitch/config.hpp"
#include "qswitch/determinizer.hpp"
#include "qswitch/error.hpp"
#include "qswitch/parallel.hpp"
#include "qswitch/pipeline.hpp"
#include "qswitch/runtime.hpp"
#include "qswitch/simd/kernels.hpp"

using namespace qswitch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPrecision = 2;
constexpr int kExitConfig = 3;
constexpr int kExitDeterminization = 4;
constexpr int kExitGuarantee = 5;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PrecisionViolated:
      return kExitPrecision;
    case ErrorKind::Config:
    case ErrorKind::EmptySpec:
    case ErrorKind::Format:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Domain:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

/* --threads, else QSWITCH_THREADS, else the config value, else all cores. */
int pick_threads(int flag, int config_value) {
  if (flag > 0) return flag;
  if (std::getenv("QSWITCH_THREADS")) return default_thread_count();
  return config_value > 0 ? config_value : default_thread_count();
}

ProblemConfig load_and_announce(const std::string& path) {
  ProblemConfig cfg = load_config(path);
  if (!cfg.eta) {
    std::cerr << "warning: eta = auto picks the coarsest admissible lattice; finer values "
                 "usually give larger controller domains\n";
  }
  return cfg;
}

std::string describe_range(const CellRange& r) {
  std::ostringstream os;
  for (int i = 0; i < r.dim(); ++i) os << (i ? " x " : "") << r.extent(i);
  return os.str();
}

std::string format_time(std::uint32_t j) {
  return j == kInfTime ? std::string("inf") : std::to_string(j);
}

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
  fn(out);
  if (!out) throw Error(ErrorKind::Config, "write failed for " + path);
}

template <class T, class Fn>
T read_file(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
  return fn(in);
}

ControllerFile load_controller(const std::string& path) {
  return read_file<ControllerFile>(path, [](std::istream& is) { return read_controller(is); });
}

TreeFile load_tree(const std::string& path) {
  return read_file<TreeFile>(path, [](std::istream& is) { return read_tree(is); });
}

void require_same_setup(const ArtifactHeader& h, const Problem& pb, const std::string& what) {
  if (!(h == header_for(pb))) {
    throw Error(ErrorKind::Config, what + " was built for a different configuration");
  }
}

// ---------------------------------------------------------------- abstract

struct AbstractArgs {
  std::string config;
  std::string out;
  int threads = 0;
};

int cmd_abstract(const AbstractArgs& a) {
  ProblemConfig cfg = load_and_announce(a.config);
  cfg.threads = pick_threads(a.threads, cfg.threads);
  const Problem pb = prepare_problem(cfg);
  std::printf("dimension        %d\n", pb.lattice.dim());
  std::printf("modes            %zu\n", pb.system.mode_count());
  std::printf("eta              %s%s\n", format_number(pb.params.eta).c_str(),
              cfg.eta ? "" : " (auto)");
  std::printf("spacing          %.12g\n", pb.lattice.spacing());
  std::printf("precision bound  %.12g <= epsilon %s\n", precision_bound(cfg.cert, pb.params),
              format_number(pb.params.epsilon).c_str());
  std::printf("cells            %s = %zu\n", describe_range(pb.spec_cells).c_str(),
              pb.spec_cells.count());
  std::printf("safe cells       %zu\n", pb.safe_cells.count());
  if (cfg.kind == SpecKind::Reach) std::printf("target cells     %zu\n", pb.target_cells.count());

  const SymbolicModel model = build_problem_abstraction(pb);
  for (std::size_t p = 0; p < model.mode_count(); ++p) {
    std::printf("out fraction p%zu  %.6f\n", p, model.out_fraction(p));
  }
  if (!a.out.empty()) {
    write_file(a.out, [&](std::ostream& os) { write_abstraction(os, model, pb.safe); });
    std::printf("wrote %s\n", a.out.c_str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string out;
  std::string engine = "auto";
  std::string reach_mode = "full";
  int threads = 0;
};

int cmd_synth(const SynthArgs& a) {
  ProblemConfig cfg = load_and_announce(a.config);
  cfg.threads = pick_threads(a.threads, cfg.threads);
  const Problem pb = prepare_problem(cfg);
  const SymbolicModel model = build_problem_abstraction(pb);

  RefineOptions opts;
  opts.threads = cfg.threads;
  if (a.engine == "scan") {
    opts.engine = DilationEngine::BallScan;
  } else if (a.engine == "edt") {
    opts.engine = DilationEngine::DistanceTransform;
  }
  opts.reach = a.reach_mode == "full" ? ReachRefinement::FullUnion : ReachRefinement::Fast;

  const SynthesisOutput res = synthesize_problem(pb, model, opts);
  const RefinedController& K = res.controller;
  std::printf("cells            %zu\n", K.cells.count());
  std::printf("abstract domain  %zu\n", res.abstract_domain);
  std::printf("dom size         %zu\n", K.dom_size());
  if (K.kind == SpecKind::Reach) {
    std::map<std::uint32_t, std::size_t> hist;
    for (std::uint32_t j : K.J_tilde) ++hist[j];
    std::printf("J~ histogram (value: cells)\n");
    for (const auto& [j, count] : hist) {
      std::printf("  %s: %zu\n", format_time(j).c_str(), count);
    }
  }
  write_file(a.out, [&](std::ostream& os) { write_controller(os, {header_for(pb), K}); });
  std::printf("wrote %s\n", a.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- determinize

struct DeterminizeArgs {
  std::string in;
  std::string out;
  int threads = 0;
};

int cmd_determinize(const DeterminizeArgs& a) {
  const ControllerFile cf = load_controller(a.in);
  const int threads = pick_threads(a.threads, 0);
  const RefinedController& K = cf.controller;
  DecisionTree tree;
  DeterminizationReport report;
  if (K.kind == SpecKind::Safety) {
    tree = determinize_safety(K);
    report = verify_determinization(tree, K, threads);
  } else {
    const CellRange inner = cf.header.lattice().cells_within(*cf.header.target);
    tree = determinize_reach(K, inner);
    report = verify_determinization(tree, K, inner, threads);
  }
  std::printf("nodes            %zu\n", tree.size());
  std::printf("leaves           %zu\n", tree.leaf_count());
  std::printf("depth            %zu (bound %zu)\n", tree.depth(), depth_bound(K.cells));
  std::printf("compression      %.1fx\n",
              static_cast<double>(K.cells.count()) / static_cast<double>(tree.size()));
  std::printf("constrained      %zu of %zu cells\n", report.constrained, report.cells_checked);
  std::printf("violations       %zu\n", report.violations.size());
  if (!report.passed()) {
    std::fprintf(stderr, "error: determinization check failed; %s not written\n", a.out.c_str());
    return kExitDeterminization;
  }
  write_file(a.out, [&](std::ostream& os) { write_tree(os, {cf.header, tree}); });
  std::printf("wrote %s\n", a.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::string controller;
  std::string array;
  std::vector<double> x0;
  std::size_t steps = 500;
  std::string out;
  bool random = false;
  std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  const ProblemConfig cfg = load_and_announce(a.config);
  const Problem pb = prepare_problem(cfg);
  if (static_cast<int>(a.x0.size()) != pb.lattice.dim()) {
    throw Error(ErrorKind::Config, "x0 needs " + std::to_string(pb.lattice.dim()) + " values");
  }
  Vec x0(pb.lattice.dim());
  for (int i = 0; i < x0.size(); ++i) x0[i] = a.x0[i];

  const std::string magic = read_magic(a.controller);
  std::optional<ControllerFile> array;
  std::optional<Controller> ctrl;
  if (magic == "QST1") {
    TreeFile tf = load_tree(a.controller);
    require_same_setup(tf.header, pb, a.controller);
    ctrl = Controller::from_tree(std::move(tf.tree), pb.lattice, tf.header.specification());
    if (!a.array.empty()) array = load_controller(a.array);
  } else if (magic == "QSC1") {
    array = load_controller(a.controller);
    ctrl = Controller::from_array(array->controller, pb.lattice, array->header.specification());
  } else {
    throw Error(ErrorKind::Config, a.controller + " is neither a QSC1 nor a QST1 file");
  }
  if (array) require_same_setup(array->header, pb, "controller array");

  const Specification& spec = ctrl->spec();
  const bool reach = spec.kind == SpecKind::Reach;
  std::optional<std::size_t> cell;
  if (array) {
    const Cell q = pb.lattice.quantize(x0);
    if (array->controller.cells.contains(q)) cell = array->controller.cells.index(q);
  }
  std::optional<std::uint32_t> bound;
  bool certified = false;
  if (array && cell) {
    if (reach) {
      if (array->controller.J_tilde[*cell] != kInfTime) bound = array->controller.J_tilde[*cell];
    } else {
      certified = array->controller.K[*cell] != 0;
    }
  }

  std::size_t steps = a.steps;
  if (bound) steps = std::max<std::size_t>(steps, *bound);
  const SampledPlant plant(pb.system, pb.params.tau, FlowOptions{cfg.substeps});
  RunOptions ro;
  ro.random_selection = a.random;
  ro.seed = a.seed;
  const Trajectory traj = run_closed_loop(plant, *ctrl, x0, steps, ro);

  if (!a.out.empty()) {
    write_file(a.out, [&](std::ostream& os) { write_trajectory_csv(os, traj, pb.params.tau); });
  }
  std::printf("steps            %zu\n", traj.modes.size());
  std::printf("final state     ");
  for (int i = 0; i < traj.states.back().size(); ++i) std::printf(" %.12g", traj.states.back()[i]);
  std::printf("\n");

  int rc = kExitOk;
  if (!spec.in_safe(x0)) {
    std::printf("verdict          OUT-OF-DOMAIN\n");
    return rc;
  }
  if (!reach) {
    const bool left = std::any_of(traj.states.begin(), traj.states.end(),
                                  [&](const Vec& x) { return !spec.in_safe(x); });
    if (traj.blocked && traj.modes.empty() && !left) {
      std::printf("verdict          OUT-OF-DOMAIN\n");
    } else if (!traj.blocked && !left) {
      std::printf("verdict          SAFE\n");
    } else {
      std::printf("verdict          UNSAFE%s\n", certified ? "" : " (start not certified)");
      if (certified) rc = kExitGuarantee;
    }
  } else {
    const std::size_t e = entry_time(traj, spec.safe, *spec.target);
    std::printf("entry time       %s\n", e == kNeverEntered ? "inf" : std::to_string(e).c_str());
    if (bound) {
      std::printf("J~ bound         %u\n", *bound);
      const bool ok = e != kNeverEntered && e <= *bound;
      std::printf("verdict          %s\n", ok ? "REACHED-WITHIN-BOUND" : "BOUND-VIOLATED");
      if (!ok) rc = kExitGuarantee;
    } else {
      std::printf("J~ bound         %s\n", array ? "inf" : "unknown (pass --array)");
      std::printf("verdict          %s\n", e == kNeverEntered ? "NOT-REACHED" : "REACHED");
    }
  }
  return rc;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string config;
  std::string controller;
  std::string tree;
  MonteCarloOptions mc;
  bool seed_given = false;
  int threads = 0;
};

int cmd_verify(VerifyArgs a) {
  const ProblemConfig cfg = load_and_announce(a.config);
  const Problem pb = prepare_problem(cfg);
  const ControllerFile cf = load_controller(a.controller);
  require_same_setup(cf.header, pb, a.controller);
  const int threads = pick_threads(a.threads, cfg.threads);
  const RefinedController& K = cf.controller;

  std::optional<Controller> ctrl;
  if (!a.tree.empty()) {
    TreeFile tf = load_tree(a.tree);
    require_same_setup(tf.header, pb, a.tree);
    const DeterminizationReport rep =
        K.kind == SpecKind::Safety
            ? verify_determinization(tf.tree, K, threads)
            : verify_determinization(tf.tree, K, pb.target_inner, threads);
    std::printf("determinization  %zu violations over %zu cells\n", rep.violations.size(),
                rep.cells_checked);
    if (!rep.passed()) return kExitDeterminization;
    ctrl = Controller::from_tree(std::move(tf.tree), pb.lattice, cf.header.specification());
  } else {
    ctrl = Controller::from_array(K, pb.lattice, cf.header.specification());
  }

  if (!a.seed_given) a.mc.seed = cfg.seed;
  const SampledPlant plant(pb.system, pb.params.tau, FlowOptions{cfg.substeps});
  const MonteCarloReport mc = monte_carlo_validate(plant, *ctrl, K, a.mc);
  std::printf("runs             %zu\n", mc.runs);
  if (mc.starts_not_found) std::printf("starts not found %zu\n", mc.starts_not_found);
  std::printf("membership       %zu violations\n", mc.membership_violations);
  if (K.kind == SpecKind::Safety) {
    std::printf("safety           %zu violating runs (%zu blocked)\n", mc.safety_violations,
                mc.blocked_runs);
  } else {
    std::printf("reach            %zu runs over bound, max excess %lld\n", mc.reach_violations,
                static_cast<long long>(mc.max_excess));
  }
  std::printf("verdict          %s\n", mc.passed() ? "PASS" : "FAIL");
  return mc.passed() ? kExitOk : kExitGuarantee;
}

// ---------------------------------------------------------------- info

int cmd_info(const std::string& path) {
  std::printf("simd kernels     %s\n", simd::active_kernels().name);
  std::printf("default threads  %d\n", default_thread_count());
  if (path.empty()) return kExitOk;

  const std::string magic = read_magic(path);
  auto print_header = [](const ArtifactHeader& h) {
    std::printf("kind             %s\n", h.kind == SpecKind::Safety ? "safety" : "reach");
    std::printf("eta              %s\n", format_number(h.eta).c_str());
    std::printf("epsilon          %s\n", format_number(h.epsilon).c_str());
    std::printf("tau              %s\n", format_number(h.tau).c_str());
    std::printf("modes            %zu\n", h.modes);
    std::printf("cells            %s = %zu\n", describe_range(h.cells).c_str(), h.cells.count());
  };
  if (magic == "QSC1") {
    const ControllerFile cf = load_controller(path);
    std::printf("format           QSC1 controller array\n");
    print_header(cf.header);
    std::printf("dom size         %zu\n", cf.controller.dom_size());
    if (cf.header.kind == SpecKind::Reach) {
      std::uint32_t worst = 0;
      std::size_t finite = 0;
      for (std::uint32_t j : cf.controller.J_tilde) {
        if (j == kInfTime) continue;
        ++finite;
        worst = std::max(worst, j);
      }
      std::printf("finite J~ cells  %zu (max %u)\n", finite, worst);
    }
  } else if (magic == "QST1") {
    const TreeFile tf = load_tree(path);
    std::printf("format           QST1 decision tree\n");
    print_header(tf.header);
    std::printf("nodes            %zu\n", tf.tree.size());
    std::printf("depth            %zu\n", tf.tree.depth());
  } else if (magic == "QSA1") {
    const AbstractionFile af =
        read_file<AbstractionFile>(path, [](std::istream& is) { return read_abstraction(is); });
    std::printf("format           QSA1 abstraction dump\n");
    std::printf("eta              %s\n", format_number(af.model.lattice().eta()).c_str());
    std::printf("tau              %s\n", format_number(af.model.tau()).c_str());
    std::printf("cells            %zu\n", af.model.cell_count());
    for (std::size_t p = 0; p < af.model.mode_count(); ++p) {
      std::printf("out fraction p%zu  %.6f\n", p, af.model.out_fraction(p));
    }
  } else {
    const ProblemConfig cfg = load_config(path);
    const SwitchedSystem sys = cfg.build_system();
    const SamplingParams params = cfg.params();
    std::printf("format           config\n");
    std::printf("eta              %s%s\n", format_number(params.eta).c_str(),
                cfg.eta ? "" : " (auto)");
    std::printf("precision bound  %.12g (%s)\n", precision_bound(cfg.cert, params),
                check_precision(cfg.cert, params) ? "ok" : "fails");
    std::printf("max eta          %.12g\n", max_eta(cfg.cert, cfg.tau, cfg.epsilon));
    if (sys.all_affine() && cfg.cert.metric_is_identity()) {
      try {
        std::printf("kappa estimate   %.12g (certificate %s)\n", estimate_kappa(sys, cfg.cert),
                    format_number(cfg.cert.kappa).c_str());
      } catch (const Error& e) {
        std::printf("kappa estimate   %s\n", e.what());
      }
    }
    const Lattice lat(sys.dim(), params.eta);
    const CellRange cells = lat.cell_range(cfg.safe);
    std::printf("cells            %s = %zu\n", describe_range(cells).c_str(), cells.count());
    std::printf("\n%s", format_config(cfg).c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized controller synthesis for switched systems"};
  app.require_subcommand(1);

  AbstractArgs abs_args;
  auto* abs = app.add_subcommand("abstract", "Build the symbolic model and report its size");
  abs->add_option("-c,--config", abs_args.config, "Problem config")->required()->check(CLI::ExistingFile);
  abs->add_option("-o,--out", abs_args.out, "Write a QSA1 dump");
  abs->add_option("--threads", abs_args.threads, "Worker threads (default: QSWITCH_THREADS)");

  SynthArgs syn_args;
  auto* syn = app.add_subcommand("synth", "Synthesize and refine a controller (QSC1)");
  syn->add_option("-c,--config", syn_args.config, "Problem config")->required()->check(CLI::ExistingFile);
  syn->add_option("-o,--out", syn_args.out, "Output controller file")->required();
  syn->add_option("--engine", syn_args.engine, "Safety dilation engine")
      ->check(CLI::IsMember({"auto", "scan", "edt"}));
  syn->add_option("--reach-mode", syn_args.reach_mode, "Reach refinement")
      ->check(CLI::IsMember({"fast", "full"}));
  syn->add_option("--threads", syn_args.threads, "Worker threads (default: QSWITCH_THREADS)");

  DeterminizeArgs det_args;
  auto* det = app.add_subcommand("determinize", "Compress a controller into a decision tree (QST1)");
  det->add_option("-i,--in", det_args.in, "Controller file (QSC1)")->required()->check(CLI::ExistingFile);
  det->add_option("-o,--out", det_args.out, "Output tree file")->required();
  det->add_option("--threads", det_args.threads, "Worker threads (default: QSWITCH_THREADS)");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Closed-loop simulation from one initial state");
  sim->add_option("-c,--config", sim_args.config, "Problem config")->required()->check(CLI::ExistingFile);
  sim->add_option("--controller", sim_args.controller, "QSC1 or QST1 file")->required()->check(CLI::ExistingFile);
  sim->add_option("--array", sim_args.array, "QSC1 file used to certify a tree run")->check(CLI::ExistingFile);
  sim->add_option("--x0", sim_args.x0, "Initial state")->required()->expected(1, 8);
  sim->add_option("--steps", sim_args.steps, "Sampling steps");
  sim->add_option("-o,--out", sim_args.out, "Trajectory CSV");
  sim->add_flag("--random", sim_args.random, "Pick enabled modes at random");
  sim->add_option("--seed", sim_args.seed, "Seed for --random");

  VerifyArgs ver_args;
  auto* ver = app.add_subcommand("verify", "Check determinization and closed-loop guarantees");
  ver->add_option("-c,--config", ver_args.config, "Problem config")->required()->check(CLI::ExistingFile);
  ver->add_option("--controller", ver_args.controller, "Controller file (QSC1)")->required()->check(CLI::ExistingFile);
  ver->add_option("--tree", ver_args.tree, "Decision tree file (QST1)")->check(CLI::ExistingFile);
  ver->add_option("--runs", ver_args.mc.runs, "Monte Carlo runs");
  ver->add_option("--steps", ver_args.mc.steps, "Steps per run");
  auto* seed_opt = ver->add_option("--seed", ver_args.mc.seed, "Sampling seed (default: config)");
  ver->add_flag("--random", ver_args.mc.random_selection, "Pick enabled modes at random");
  ver->add_option("--threads", ver_args.threads, "Worker threads (default: QSWITCH_THREADS)");

  std::string info_path;
  auto* inf = app.add_subcommand("info", "Describe a config or artifact file");
  inf->add_option("file", info_path, "Config, QSA1, QSC1 or QST1 file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*abs) return cmd_abstract(abs_args);
    if (*syn) return cmd_synth(syn_args);
    if (*det) return cmd_determinize(det_args);
    if (*sim) return cmd_simulate(sim_args);
    if (*ver) {
      ver_args.seed_given = seed_opt->count() > 0;
      return cmd_verify(ver_args);
    }
    if (*inf) return cmd_info(info_path);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
