#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "qswitch/error.hpp"
#include "qswitch/lattice.hpp"

using namespace qswitch;
using qtest::vec;

namespace {

/* Per-axis count of lattice indices k with k s in [lo - s/2, hi + s/2), by
 * floor arithmetic on the interval ends. */
std::int64_t axis_count_oracle(double lo, double hi, double s) {
  const auto first = static_cast<std::int64_t>(std::floor(lo / s + 0.5));
  const auto last = static_cast<std::int64_t>(std::floor(hi / s + 0.5));
  return last - first + 1;
}

std::size_t disc_count_oracle(double s, double r) {
  std::size_t n = 0;
  const auto m = static_cast<std::int64_t>(r / s) + 2;
  for (std::int64_t i = -m; i <= m; ++i) {
    for (std::int64_t j = -m; j <= m; ++j) {
      if (static_cast<double>(i * i + j * j) * s * s <= r * r) ++n;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("quantize: half-open cells") {
  const Lattice l1(1, 0.5);
  CHECK(l1.spacing() == 1.0);
  CHECK(l1.quantize(vec({0.4})).k == std::vector<std::int64_t>{0});
  CHECK(l1.quantize(vec({0.5})).k == std::vector<std::int64_t>{1});
  CHECK(l1.quantize(vec({-0.5})).k == std::vector<std::int64_t>{0});
  CHECK(l1.quantize(vec({-0.51})).k == std::vector<std::int64_t>{-1});

  const Lattice l2(2, std::sqrt(2.0));
  CHECK(l2.spacing() == doctest::Approx(2.0));
  CHECK(l2.quantize(vec({0.9, -1.0})).k == std::vector<std::int64_t>{0, 0});
}

TEST_CASE("quantize: idempotent on centers and within eta of x") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int n : {1, 2, 3}) {
    const Lattice lat(n, 0.0173);
    for (int t = 0; t < 2000; ++t) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = u(rng);
      const Cell q = lat.quantize(x);
      CHECK(lat.quantize(lat.center(q)) == q);
      CHECK((lat.center(q) - x).norm() <= lat.eta() * (1 + 1e-12));
    }
  }
}

TEST_CASE("cell_range: grid sizes of both thermal instances") {
  const Lattice ls(2, 0.0014);
  const CellRange rs = ls.cell_range(cube(2, 20.0, 22.0));
  const std::int64_t per_axis_s = axis_count_oracle(20.0, 22.0, ls.spacing());
  CHECK(per_axis_s == 1011);
  CHECK(rs.extent(0) == per_axis_s);
  CHECK(rs.extent(1) == per_axis_s);
  CHECK(rs.count() == 1022121u);

  const Lattice lr(2, 0.0035);
  const CellRange rr = lr.cell_range(cube(2, 17.5, 22.5));
  CHECK(axis_count_oracle(17.5, 22.5, lr.spacing()) == 1011);
  CHECK(rr.count() == 1022121u);
}

TEST_CASE("cell_range: degenerate box and ordering") {
  const Lattice lat(2, 0.1);
  const Cell q{{7, -3}};
  const Vec c = lat.center(q);
  const CellRange r = lat.cell_range(Box(c, c));
  CHECK(r.count() == 1);
  CHECK(r.cell_at(0) == q);
  CHECK_THROWS_AS(lat.cell_range(Box(vec({1, 1}), vec({0, 1}))), Error);
}

TEST_CASE("points_in and cells_within are subsets of cell_range") {
  const Lattice lat(2, 0.0035);
  const Box b = cube(2, 17.5, 22.5);
  const CellRange all = lat.cell_range(b);
  const CellRange pts = lat.points_in(b);
  const CellRange inner = lat.cells_within(b);
  CHECK(all.contains(pts));
  CHECK(pts.contains(inner));
  const double s = lat.spacing();
  for (int a = 0; a < 2; ++a) {
    CHECK(static_cast<double>(pts.kmin()[a]) * s >= 17.5);
    CHECK(static_cast<double>(pts.kmax()[a]) * s <= 22.5);
    CHECK(static_cast<double>(inner.kmin()[a]) * s - s / 2 >= 17.5);
    CHECK(static_cast<double>(inner.kmax()[a]) * s + s / 2 <= 22.5);
  }
}

TEST_CASE("CellRange: indexing round trip") {
  const CellRange r({-2, 5, 0}, {1, 7, 4});
  CHECK(r.count() == 4u * 3u * 5u);
  CHECK(r.row_length() == 5u);
  CHECK(r.row_count() == 12u);
  for (std::size_t i = 0; i < r.count(); ++i) {
    const Cell q = r.cell_at(i);
    CHECK(r.contains(q));
    CHECK(r.index(q) == i);
  }
  CHECK(r.cell_at(1).k == std::vector<std::int64_t>{-2, 5, 1});
  CHECK_FALSE(r.contains(Cell{{2, 5, 0}}));
  CHECK(CellRange({0}, {-1}).empty());
}

TEST_CASE("membership_mask clips the sub-range") {
  const CellRange d({0, 0}, {3, 3});
  const auto m = membership_mask(d, CellRange({2, -5}, {9, 1}));
  for (std::size_t i = 0; i < d.count(); ++i) {
    const Cell q = d.cell_at(i);
    CHECK(m[i] == ((q.k[0] >= 2 && q.k[1] <= 1) ? 1 : 0));
  }
}

TEST_CASE("ball_offsets: examples") {
  const Lattice lat(2, std::sqrt(2.0) / 2.0);  // s = 1
  CHECK(ball_offsets(lat, 0.99).size() == 1);
  const auto cross = ball_offsets(lat, lat.spacing());
  CHECK(cross.size() == 5);
  CHECK(std::set<Offset>(cross.begin(), cross.end()) ==
        std::set<Offset>{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  CHECK(std::is_sorted(cross.begin(), cross.end()));
}

TEST_CASE("ball_offsets: safety-instance disc") {
  const Lattice lat(2, 0.0014);
  const double r = 0.25 - 0.0014;
  const auto ball = ball_offsets(lat, r);
  CHECK(ball.size() == disc_count_oracle(lat.spacing(), r));
  CHECK(ball.size() == 49525u);
  const double area = M_PI * std::pow(r / lat.spacing(), 2);
  CHECK(std::abs(static_cast<double>(ball.size()) - area) / area < 0.02);
}

TEST_CASE("RelationBall: matches offsets and rel_ball") {
  const Lattice lat(2, 0.0014);
  const auto cert = qtest::thermal_cert();
  const SamplingParams p{5.0, 0.0014, 0.25};
  const RelationBall ball = RelationBall::build(lat, cert, p);
  CHECK(ball.euclidean());
  CHECK(ball.size() == 49525u);
  CHECK(ball.offsets() == ball_offsets(lat, 0.25 - 0.0014));
  CHECK(ball.max_square_index() == lat.max_square_index(std::pow(0.25 - 0.0014, 2)));

  std::size_t span_total = 0;
  for (const auto& sp : ball.spans()) span_total += static_cast<std::size_t>(sp.hi - sp.lo + 1);
  CHECK(span_total == ball.size());

  const Cell q{{10000, -3}};
  const auto cells = rel_ball(lat, cert, p, q);
  CHECK(cells.size() == ball.size());
  CHECK(std::find(cells.begin(), cells.end(), q) != cells.end());
}

TEST_CASE("RelationBall: singleton when eps - eta < s") {
  const Lattice lat(2, 0.1);
  const SamplingParams p{1.0, 0.1, 0.2};  // eps - eta = 0.1 < s = 0.1414
  const RelationBall ball = RelationBall::build(lat, qtest::quadratic_cert(2, 1.0), p);
  CHECK(ball.size() == 1);
  CHECK(ball.offsets()[0] == Offset{0, 0});
}

TEST_CASE("RelationBall: non-identity metric") {
  const Lattice lat(2, std::sqrt(2.0) / 2.0);  // s = 1
  auto cert = qtest::quadratic_cert(2, 1.0);
  cert.M = qtest::mat2(4, 0, 0, 1);
  const SamplingParams p{1.0, lat.eta(), lat.eta() + std::sqrt(4.5)};
  const RelationBall ball = RelationBall::build(lat, cert, p);
  CHECK_FALSE(ball.euclidean());
  std::set<Offset> oracle;
  for (std::int64_t i = -3; i <= 3; ++i)
    for (std::int64_t j = -3; j <= 3; ++j)
      if (4 * i * i + j * j <= 4.5) oracle.insert({i, j});
  CHECK(std::set<Offset>(ball.offsets().begin(), ball.offsets().end()) == oracle);
  for (const auto& d : ball.offsets()) CHECK(ball.contains(d));
  CHECK_FALSE(ball.contains({1, 1}));
}

TEST_CASE("Lattice: invalid arguments") {
  CHECK_THROWS_AS(Lattice(0, 0.1), Error);
  CHECK_THROWS_AS(Lattice(2, 0.0), Error);
  CHECK_THROWS_AS(Lattice(2, -1.0), Error);
}
