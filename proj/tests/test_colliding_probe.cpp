#include "catch_amalgamated.hpp"

#include <numbers>

#include "nmor/colliding_probe.hpp"
#include "nmor/single_probe.hpp"
#include "nmor/sweep.hpp"

using namespace nmor;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ModelParams P = figure_params();
const CpBoundary B = figure_boundary();
constexpr double G_FIG = 101.0 / 26.0;

double rel_diff(const ProbeVec& a, const ProbeVec& b) {
  double w = 0.0;
  for (int k = 0; k < 4; ++k) w = std::max(w, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(b[k])));
  return w;
}

}  // namespace

TEST_CASE("cp_rhs reduces to the single-probe form without probe 2", "[colliding]") {
  const CpPoint y{{30.0, 20.0, 0.1, -0.1}, {0.0, 0.0, 0.0, 0.0}};
  const auto r = cp_rhs(y, P, 0.8, 0.0);
  const double D = 101.0 * (1.0 + 0.64);
  CHECK_THAT(r.p1[0], WithinRel(2 * 0.0065 * (1 + 8.0) * 600.0 / D, 1e-14));
  CHECK_THAT(r.p1[1], WithinRel(2 * 0.0065 * (1 - 8.0) * 600.0 / D, 1e-14));
  CHECK_THAT(r.p1[2], WithinRel(0.0065 * (10 - 0.8) * 20.0 / D, 1e-14));
  CHECK_THAT(r.p1[3], WithinRel(0.0065 * (10 + 0.8) * 30.0 / D, 1e-14));
  for (double v : r.p2) CHECK(v == 0.0);
}

TEST_CASE("cp_rhs structure", "[colliding]") {
  const CpPoint sym{{25, 25, 0, 0}, {25, 25, 0, 0}};
  SECTION("zero field: no imbalance growth") {
    const auto r = cp_rhs(sym, P, 0.0, 0.0);
    CHECK(r.p1[0] - r.p1[1] == 0.0);
  }
  SECTION("in-phase growth at the entrance") {
    const auto r = cp_rhs(sym, P, 1.0, 0.0);
    CHECK(r.p1[0] > 0.0);
    CHECK(r.p2[0] > 0.0);
    CpOptions level;
    level.mirror = MirrorRule::level_structure;
    CHECK(cp_rhs(sym, P, 1.0, 0.0, level).p2[0] < 0.0);
  }
  SECTION("cross-angle factor 1 + G cos 2theta0") {
    const double base = cp_rhs(sym, P, 1.0, std::numbers::pi / 4).p1[0];  // G-independent part
    CHECK_THAT(base, WithinRel(2 * 0.0065 * 11 * 625 / 202.0, 1e-12));
    CHECK_THAT(cp_rhs(sym, P, 1.0, 0.0).p1[0] / base, WithinRel(1.0 + G_FIG, 1e-12));
    CHECK_THAT(cp_rhs(sym, P, 1.0, std::numbers::pi / 2).p1[0] / base, WithinRel(1.0 - G_FIG, 1e-12));
    CHECK(cp_rhs(sym, P, 1.0, std::numbers::pi / 2).p1[0] < 0.0);  // G > 1 flips the sign
  }
  SECTION("phase laws at symmetric input") {
    const auto a = cp_rhs(sym, P, 1.0, 0.0);
    CpOptions per;
    per.phase_law = PhaseLaw::per_component;
    const auto b = cp_rhs(sym, P, 1.0, 0.0, per);
    const double sp = -0.0065 * 1.0 * 50.0 / 202.0;
    CHECK_THAT((a.p1[2] - a.p1[3]) / sp, WithinRel(1.0 + 2.0 * G_FIG, 1e-12));
    CHECK_THAT((b.p1[2] - b.p1[3]) / sp, WithinRel(1.0 + G_FIG, 1e-12));
  }
  SECTION("singular gain") {
    const CpPoint bad{{25, 0, 0, 0}, {25, 25, 0, 0}};
    REQUIRE_THROWS_AS(cp_rhs(bad, P, 1.0, 0.0), SingularGainError);
  }
}

TEST_CASE("BVP matches an independent collocation solution", "[colliding][golden]") {
  // scipy solve_bvp, tol 1e-12, same equations
  struct Row {
    double d_B, S1p_L, S1m_L, dth_L, S2p_0, S2m_0, dphi_0;
  };
  const Row rows[] = {
      {1.0, 35.840238949276, 16.130713586956, -8.924479961362e-02, 31.029885983179, 20.980076011214, -6.355121610521e-02},
      {0.3, 32.681795080147, 21.159102459926, -5.750970652002e-02, 29.830779071994, 24.033844185601, -4.330021043506e-02},
  };
  for (const auto& r : rows) {
    const auto pr = cp_solve_bvp(B, P, r.d_B);
    const auto& L = pr.points.back();
    const auto& z = pr.points.front();
    CHECK_THAT(L.p1[0], WithinRel(r.S1p_L, 1e-8));
    CHECK_THAT(L.p1[1], WithinRel(r.S1m_L, 1e-8));
    CHECK_THAT(L.p1[2] - L.p1[3], WithinRel(r.dth_L, 1e-7));
    CHECK_THAT(z.p2[0], WithinRel(r.S2p_0, 1e-8));
    CHECK_THAT(z.p2[1], WithinRel(r.S2m_0, 1e-8));
    CHECK_THAT(z.p2[2] - z.p2[3], WithinRel(r.dphi_0, 1e-7));
  }
}

TEST_CASE("BVP limits", "[colliding]") {
  SECTION("probe 2 off: one iteration, equals probe 1 alone") {
    CpBoundary b = B;
    b.probe2 = {0, 0, 0, 0};
    const auto pr = cp_solve_bvp(b, P, 1.0);
    CHECK(pr.iterations == 1);
    const auto ref = probe1_alone(b.probe1, b.length, 101, P, 1.0);
    double w = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) w = std::max(w, rel_diff(pr.points[i].p1, ref[i]));
    CHECK(w < 1e-8);
    for (const auto& y : pr.points) CHECK(y.p2 == ProbeVec{0, 0, 0, 0});
  }
  SECTION("no coupling: constant profiles") {
    ModelParams p = P;
    p.alpha_p1 = p.alpha_p2 = 0.0;
    const auto pr = cp_solve_bvp(B, p, 1.0);
    for (const auto& y : pr.points) {
      CHECK(y.p1 == ProbeVec{25, 25, 0, 0});
      CHECK(y.p2 == ProbeVec{25, 25, 0, 0});
    }
  }
  SECTION("boundary values are honoured") {
    CpBoundary b = B;
    b.probe1 = {30, 20, 0.2, -0.1};
    b.probe2 = {22, 28, -0.3, 0.05};
    const auto pr = cp_solve_bvp(b, P, 0.7);
    CHECK(pr.points.front().p1 == ProbeVec{30, 20, 0.2, -0.1});
    CHECK(pr.points.back().p2 == ProbeVec{22, 28, -0.3, 0.05});
    CHECK(pr.residual < 1e-8);
  }
  SECTION("iteration cap reports the residual") {
    CpOptions opt;
    opt.max_iter = 1;
    try {
      cp_solve_bvp(B, P, 1.0, opt);
      FAIL("expected non-convergence");
    } catch (const ConvergenceError& e) {
      CHECK_THAT(std::string(e.what()), ContainsSubstring("non-convergence"));
      CHECK(e.iterations() == 1);
      CHECK(e.residual() > 1e-8);
    }
  }
  SECTION("probe 1 with a dark component throws") {
    CpBoundary b = B;
    b.probe1 = {25, 0, 0, 0};
    REQUIRE_THROWS_AS(cp_solve_bvp(b, P, 1.0), SingularGainError);
  }
  SECTION("input validation") {
    CpOptions opt;
    opt.grid_size = 8;
    REQUIRE_THROWS_AS(cp_solve_bvp(B, P, 1.0, opt), ConfigError);
    CpBoundary b = B;
    b.length = 0.0;
    REQUIRE_THROWS_AS(cp_solve_bvp(b, P, 1.0), ConfigError);
  }
}

TEST_CASE("BVP symmetries", "[colliding]") {
  SECTION("zero field") {
    const auto pr = cp_solve_bvp(B, P, 0.0);
    const auto ob = cp_observables(pr, B, P, 0.0);
    for (std::size_t i = 0; i < pr.points.size(); ++i) {
      CHECK(std::abs(ob.delta_S_p1[i]) <= 1e-10);
      CHECK(std::abs(ob.delta_theta[i]) <= 1e-10);
    }
    CHECK(ob.circulation_index == 0.0);
  }
  SECTION("odd parity in d_B") {
    for (double d_B : {0.2, 1.0, 2.5}) {
      const auto a = cp_observables(cp_solve_bvp(B, P, d_B), B, P, d_B);
      const auto b = cp_observables(cp_solve_bvp(B, P, -d_B), B, P, -d_B);
      for (std::size_t i = 0; i < a.eta.size(); ++i) {
        CHECK_THAT(a.delta_S_p1[i] + b.delta_S_p1[i], WithinAbs(0.0, 1e-9));
        CHECK_THAT(a.delta_theta[i] + b.delta_theta[i], WithinAbs(0.0, 1e-11));
      }
      CHECK_THAT(a.circulation_index + b.circulation_index, WithinAbs(0.0, 1e-12));
    }
  }
}

TEST_CASE("in-phase growth at every node", "[colliding]") {
  for (double d_B : {-3.0, -1.0, -0.3, 0.3, 1.0, 3.0}) {
    const auto pr = cp_solve_bvp(B, P, d_B);
    const auto ob = cp_observables(pr, B, P, d_B);
    for (std::size_t i = 0; i < pr.points.size(); ++i) {
      CHECK(std::signbit(ob.growth_p1_plus[i]) == std::signbit(ob.growth_p2_plus[i]));
      CHECK(std::signbit(ob.growth_p1_plus[i]) == (d_B < 0));
    }
  }
}

TEST_CASE("lab-frame in-phase growth under the level-structure mirror", "[colliding]") {
  CpOptions opt;
  opt.mirror = MirrorRule::level_structure;
  const auto pr = cp_solve_bvp(B, P, 1.0, opt);
  // both sigma+ components increase with eta
  for (std::size_t i = 1; i < pr.points.size(); ++i) {
    CHECK(pr.points[i].p1[0] > pr.points[i - 1].p1[0]);
    CHECK(pr.points[i].p2[0] > pr.points[i - 1].p2[0]);
  }
}

TEST_CASE("grid convergence", "[colliding]") {
  CpOptions coarse, fine;
  fine.grid_size = 2 * coarse.grid_size - 1;
  const auto a = cp_solve_bvp(B, P, 1.0, coarse);
  const auto b = cp_solve_bvp(B, P, 1.0, fine);
  double w = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    w = std::max(w, rel_diff(a.points[i].p1, b.points[2 * i].p1));
    w = std::max(w, rel_diff(a.points[i].p2, b.points[2 * i].p2));
  }
  CHECK(w < 10 * coarse.tol);
}

TEST_CASE("observables", "[colliding]") {
  const auto pr = cp_solve_bvp(B, P, 1.0);
  const auto ob = cp_observables(pr, B, P, 1.0);
  CHECK_THAT(ob.enhancement_ratio, WithinRel(1.0 + 2.0 * G_FIG, 1e-14));
  CHECK_THAT(ob.gain.front(), WithinRel(G_FIG * std::sqrt(pr.points.front().p2[0] * pr.points.front().p2[1]) / 25.0, 1e-12));
  CHECK(ob.circulation_index > 0.0);
  // rotation beats the single-probe law everywhere past the entrance
  for (std::size_t i = 1; i < ob.eta.size(); ++i)
    CHECK(std::abs(ob.delta_theta[i]) > std::abs(sp_rotation(ob.eta[i], 50.0, P, 1.0)));

  CpBoundary off = B;
  off.probe2 = {0, 0, 0, 0};
  const auto o2 = cp_observables(cp_solve_bvp(off, P, 1.0), off, P, 1.0);
  CHECK(o2.enhancement_ratio == 1.0);
  CHECK(o2.circulation_index == 0.0);
}

TEST_CASE("entry slope approaches the enhancement factor in a thin cell", "[colliding]") {
  CpBoundary thin = B;
  thin.length = 0.01;
  const auto ob = cp_observables(cp_solve_bvp(thin, P, 1.0), thin, P, 1.0);
  CHECK_THAT(ob.entry_slope_ratio, WithinRel(1.0 + 2.0 * G_FIG, 1e-3));
}

TEST_CASE("reduced growth diagnostic", "[colliding][golden]") {
  const SaturationSet s{25, 25, 25, 25};
  const auto [g1, g2] = cp_reduced_growth(s, P, 1.0);
  CHECK_THAT(g1, WithinRel(2525.0 / 416.0, 1e-14));
  CHECK_THAT(g2, WithinRel(4225.0 / 81608.0, 1e-14));
  CHECK(g1 > 0.0);
  CHECK(g2 > 0.0);
  const auto [z1, z2] = cp_reduced_growth(s, P, 0.0);
  CHECK(z1 == 0.0);
  CHECK(z2 == 0.0);
  CHECK(cp_reduced_growth(s, P, 1.0, MirrorRule::level_structure).second == -g2);
  REQUIRE_THROWS_AS(cp_reduced_growth({0, 25, 25, 25}, P, 1.0), SingularGainError);
}

TEST_CASE("angle scan is pi-periodic", "[colliding]") {
  std::vector<double> grid;
  for (int k = 0; k <= 36; ++k) grid.push_back(k * std::numbers::pi / 18.0);  // [0, 2 pi]
  const auto scan = angle_scan(B, P, 1.0, grid);
  double span = 0.0;
  for (const auto& s : scan) span = std::max(span, std::abs(s.delta_theta));
  for (int k = 0; k + 18 < 37; ++k) CHECK(std::abs(scan[k].delta_theta - scan[k + 18].delta_theta) < 1e-9 * span);
  // even about theta0 = 0 and extremal at 0 and pi/2
  CHECK_THAT(scan[1].delta_theta, WithinRel(scan[17].delta_theta, 1e-9));
  CHECK(scan[0].delta_theta < 0.0);
  CHECK(scan[9].delta_theta > 0.0);
}

TEST_CASE("tracking cross-angle mode", "[colliding]") {
  CpOptions tr;
  tr.cross_angle_mode = CrossAngleMode::tracking;
  const auto a = cp_solve_bvp(B, P, 0.0, tr);
  const auto b = cp_solve_bvp(B, P, 0.0);
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(rel_diff(a.points[i].p1, b.points[i].p1) < 1e-12);
  const auto c = cp_solve_bvp(B, P, 1.0, tr);
  const auto d = cp_solve_bvp(B, P, 1.0);
  const double dc = c.points.back().p1[2] - c.points.back().p1[3];
  const double dd = d.points.back().p1[2] - d.points.back().p1[3];
  CHECK(dc != dd);
  CHECK_THAT(dc, WithinRel(dd, 0.05));
}
