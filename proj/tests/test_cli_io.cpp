#include <doctest.h>

#include <functional>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "qswitch/artifacts.hpp"
#include "qswitch/config.hpp"
#include "qswitch/error.hpp"
#include "qswitch/pipeline.hpp"

using namespace qswitch;
using qtest::vec;

namespace {

std::string fixture(const std::string& name) {
  return std::string(QSWITCH_FIXTURE_DIR) + "/" + name;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

const char* kMinimal = R"(
[system]
preset = thermal
[certificate]
M = identity
alpha_lo = 1 2
alpha_hi = 1 2
gamma = 1 2
kappa = 0.0084
[params]
tau = 5
eta = 0.0014
epsilon = 0.25
[spec]
kind = safety
safe.lo = 20 20
safe.hi = 22 22
)";

/* Every artifact of one pipeline run, as bytes. */
struct Artifacts {
  std::string abstraction, controller, tree, csv;
};

Artifacts run_pipeline(const std::string& path, int threads) {
  ProblemConfig cfg = load_config(path);
  cfg.threads = threads;
  const Problem pb = prepare_problem(cfg);
  const SymbolicModel model = build_problem_abstraction(pb);
  RefineOptions ro;
  ro.threads = threads;
  const auto syn = synthesize_problem(pb, model, ro);
  const ArtifactHeader h = header_for(pb);
  const DecisionTree tree = cfg.kind == SpecKind::Safety
                                ? determinize_safety(syn.controller)
                                : determinize_reach(syn.controller, pb.target_inner);
  Artifacts a;
  std::ostringstream os1, os2, os3, os4;
  write_abstraction(os1, model, pb.safe);
  write_controller(os2, {h, syn.controller});
  write_tree(os3, {h, tree});
  const SampledPlant plant(pb.system, pb.params.tau);
  const auto ctrl = Controller::from_tree(tree, pb.lattice, h.specification());
  const Vec x0 = pb.lattice.center(pb.safe_cells.cell_at(pb.safe_cells.count() / 2));
  write_trajectory_csv(os4, run_closed_loop(plant, ctrl, x0, 40, {true, 77}), pb.params.tau);
  return {os1.str(), os2.str(), os3.str(), os4.str()};
}

}  // namespace

TEST_CASE("config: bundled files load") {
  const ProblemConfig s = load_config(std::string(QSWITCH_CONFIG_DIR) + "/thermal_safety.ini");
  CHECK(s.thermal);
  CHECK(s.kind == SpecKind::Safety);
  CHECK(s.tau == 5.0);
  CHECK(s.eta == 0.0014);
  CHECK(s.epsilon == 0.25);
  CHECK(s.safe == cube(2, 20, 22));
  CHECK(s.cert.kappa == 0.0084);
  CHECK(s.thermal_params.tf == 50.0);

  const ProblemConfig r = load_config(std::string(QSWITCH_CONFIG_DIR) + "/thermal_reach.ini");
  CHECK(r.kind == SpecKind::Reach);
  REQUIRE(r.target.has_value());
  CHECK(*r.target == cube(2, 20, 22));
  CHECK(r.safe == cube(2, 17.5, 22.5));
}

TEST_CASE("config: canonical round trip") {
  for (const char* name : {"line_safety.ini", "line_reach.ini", "plane_safety.ini",
                           "plane_reach.ini", "plane_metric.ini"}) {
    CAPTURE(std::string(name));
    const ProblemConfig a = load_config(fixture(name));
    const std::string text = format_config(a);
    const ProblemConfig b = parse_config(text);
    CHECK(format_config(b) == text);
    CHECK(b.tau == a.tau);
    CHECK(b.eta == a.eta);
    CHECK(b.safe == a.safe);
    CHECK(b.modes == a.modes);
    CHECK(b.cert.M == a.cert.M);
  }
  ProblemConfig c = parse_config(kMinimal);
  c.eta = std::nullopt;
  CHECK(format_config(parse_config(format_config(c))) == format_config(c));
}

TEST_CASE("config: number formatting is shortest round trip") {
  for (double v : {0.0014, 0.1 + 0.2, 1e-300, 22.5, -3.0, 1.0 / 3.0, 5e-324}) {
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK(format_number(0.0014) == "0.0014");
  CHECK(format_number(20.0) == "20");
  CHECK(kind_of([] { parse_number("1.5x"); }) == ErrorKind::Format);
  CHECK(kind_of([] { parse_number(""); }) == ErrorKind::Format);
}

TEST_CASE("config: eta auto resolves to the largest admissible value") {
  std::string text = kMinimal;
  text.replace(text.find("eta = 0.0014"), 12, "eta = auto");
  const ProblemConfig c = parse_config(text);
  CHECK_FALSE(c.eta.has_value());
  CHECK(c.resolved_eta() == doctest::Approx(0.0208677392).epsilon(1e-8));
  CHECK(check_precision(c.cert, c.params()));
}

TEST_CASE("config: errors are config errors") {
  auto with = [](const std::string& from, const std::string& to) {
    std::string t = kMinimal;
    const auto at = t.find(from);
    REQUIRE(at != std::string::npos);
    t.replace(at, from.size(), to);
    return t;
  };
  const std::vector<std::string> broken = {
      with("kappa = 0.0084", "kappa = 0.0084\nbogus = 1"),
      with("[params]", "[nonsense]"),
      with("tau = 5", "tau = five"),
      with("safe.hi = 22 22", "safe.hi = 22"),
      with("kind = safety", "kind = liveness"),
      with("kind = safety", "kind = reach"),
      with("gamma = 1 2", "gamma = 1"),
      with("epsilon = 0.25\n", ""),
      with("M = identity", "M = 1 0; 0"),
      "just text",
  };
  for (const auto& text : broken) {
    CAPTURE(text);
    CHECK(kind_of([&] { parse_config(text); }) == ErrorKind::Config);
  }
  CHECK(kind_of([] { load_config("/nonexistent/file.ini"); }) == ErrorKind::Config);
}

TEST_CASE("pipeline: empty spec and precision failures") {
  CHECK(kind_of([] { prepare_problem(load_config(fixture("empty_spec.ini"))); }) ==
        ErrorKind::EmptySpec);
  CHECK(kind_of([] { prepare_problem(load_config(fixture("precision_fail.ini"))); }) ==
        ErrorKind::PrecisionViolated);
}

TEST_CASE("pipeline: grid sizes of the bundled instances") {
  for (const char* name : {"thermal_safety.ini", "thermal_reach.ini"}) {
    const Problem pb = prepare_problem(load_config(std::string(QSWITCH_CONFIG_DIR) + "/" + name));
    CHECK(pb.spec_cells.count() == 1022121u);
  }
}

TEST_CASE("artifacts: controller and tree round trip") {
  for (const char* name : {"plane_safety.ini", "plane_reach.ini"}) {
    CAPTURE(std::string(name));
    const Problem pb = prepare_problem(load_config(fixture(name)));
    const SymbolicModel model = build_problem_abstraction(pb);
    const auto syn = synthesize_problem(pb, model, {});
    const ArtifactHeader h = header_for(pb);

    std::stringstream cs;
    write_controller(cs, {h, syn.controller});
    const ControllerFile cf = read_controller(cs);
    CHECK(cf.header == h);
    CHECK(cf.controller.K == syn.controller.K);
    CHECK(cf.controller.J_tilde == syn.controller.J_tilde);
    CHECK(cf.controller.cells == syn.controller.cells);
    std::ostringstream again;
    write_controller(again, cf);
    CHECK(again.str() == cs.str());

    const DecisionTree t = pb.config.kind == SpecKind::Safety
                               ? determinize_safety(syn.controller)
                               : determinize_reach(syn.controller, pb.target_inner);
    std::stringstream ts;
    write_tree(ts, {h, t});
    const TreeFile tf = read_tree(ts);
    CHECK(tf.header == h);
    CHECK(tf.tree == t);

    std::stringstream as;
    write_abstraction(as, model, pb.safe);
    const AbstractionFile af = read_abstraction(as);
    CHECK(af.working_box == pb.safe);
    CHECK(af.model.table() == model.table());
    CHECK(af.model.domain() == model.domain());
  }
}

TEST_CASE("artifacts: corrupt input is a format error") {
  const Problem pb = prepare_problem(load_config(fixture("line_reach.ini")));
  const auto syn = synthesize_problem(pb, build_problem_abstraction(pb), {});
  std::ostringstream os;
  write_controller(os, {header_for(pb), syn.controller});
  const std::string good = os.str();

  auto read = [](const std::string& s) {
    std::istringstream is(s);
    read_controller(is);
  };
  CHECK_NOTHROW(read(good));
  CHECK(kind_of([&] { read(good.substr(0, good.size() - 3)); }) == ErrorKind::Format);
  CHECK(kind_of([&] { read("QSC2" + good.substr(4)); }) == ErrorKind::Format);
  CHECK(kind_of([&] { read(""); }) == ErrorKind::Format);

  std::istringstream tree("QST1\nkind safety\n");
  CHECK(kind_of([&] { read_tree(tree); }) == ErrorKind::Format);
  std::istringstream csv("t,x1,mode\n0,1\n");
  CHECK(kind_of([&] { read_trajectory_csv(csv); }) == ErrorKind::Format);
}

TEST_CASE("trajectory csv round trip") {
  Trajectory t;
  t.states = {vec({20.5, 21.0}), vec({20.625, 21.125}), vec({1.0 / 3.0, 2.0})};
  t.modes = {1, 0};
  std::ostringstream os;
  write_trajectory_csv(os, t, 5.0);
  const std::string text = os.str();
  CHECK(text.rfind("t,x1,x2,mode\n", 0) == 0);
  CHECK(text.find("0,20.5,21,1\n") != std::string::npos);
  CHECK(text.find("10,0.333333333333,2,-1\n") != std::string::npos);

  std::istringstream is(text);
  const CsvTrajectory r = read_trajectory_csv(is);
  CHECK(r.t == std::vector<double>{0, 5, 10});
  CHECK(r.traj.modes == t.modes);
  REQUIRE(r.traj.states.size() == 3);
  CHECK(r.traj.states[1] == t.states[1]);
  std::ostringstream again;
  write_trajectory_csv(again, r.traj, 5.0);
  CHECK(again.str() == text);
}

TEST_CASE("determinism: artifacts identical across runs and thread counts") {
  for (const char* name : {"line_safety.ini", "plane_reach.ini", "plane_metric.ini"}) {
    CAPTURE(std::string(name));
    const Artifacts ref = run_pipeline(fixture(name), 1);
    for (int threads : {1, 4, 8}) {
      const Artifacts a = run_pipeline(fixture(name), threads);
      CHECK(a.abstraction == ref.abstraction);
      CHECK(a.controller == ref.controller);
      CHECK(a.tree == ref.tree);
      CHECK(a.csv == ref.csv);
    }
  }
}
