#include <doctest.h>

#include <cmath>
#include <random>

#include "dn/solver.h"
#include "dn/synth.h"

using namespace dn;

namespace {

// Uniform state: every grid same shape, conf 1, gray image, fronto normals.
SolverState uniform_state(int W, int H, double depth, const Intrinsics& K) {
  SolverState s;
  s.depth = ScalarGrid(W, H, depth);
  s.normal = NormalGrid(W, H, Vec3{0.0, 0.0, -1.0});
  s.anchor_depth = s.depth;
  s.anchor_normal = s.normal;
  s.conf_d = ScalarGrid(W, H, 1.0);
  s.conf_n = ScalarGrid(W, H, 1.0);
  s.image = ColorImage(W, H, Vec3{128.0, 128.0, 128.0});
  s.K = K;
  return s;
}

SolverState random_state(int W, int H, uint64_t seed,
                         bool sprinkle_zero_conf = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.5, 3.0);
  std::uniform_real_distribution<double> uab(-0.8, 0.8);
  std::uniform_real_distribution<double> uc(0.05, 1.0);
  std::uniform_real_distribution<double> ucol(0.0, 255.0);
  std::bernoulli_distribution zero(0.3);

  Intrinsics K{0.9 * W, 0.9 * W, 0.5 * W, 0.5 * H};
  SolverState s = uniform_state(W, H, 1.0, K);
  for (size_t i = 0; i < s.depth.size(); ++i) {
    s.depth[i] = ud(rng);
    s.normal[i] = unit_from_param({uab(rng), uab(rng)});
    s.conf_d[i] = sprinkle_zero_conf && zero(rng) ? 0.0 : uc(rng);
    s.conf_n[i] = sprinkle_zero_conf && zero(rng) ? 0.0 : uc(rng);
    s.image[i] = {ucol(rng), ucol(rng), ucol(rng)};
  }
  s.anchor_depth = s.depth;
  s.anchor_normal = s.normal;
  return s;
}

NeighborhoodPattern axes_pattern() {
  NeighborhoodPattern p;
  p.kind = PatternKind::Checkerboard;
  p.offsets = {{1, 0}, {0, 1}};
  return p;
}

bool grids_equal(const ScalarGrid& a, const ScalarGrid& b) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool grids_equal(const NormalGrid& a, const NormalGrid& b) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].x != b[i].x || a[i].y != b[i].y || a[i].z != b[i].z) return false;
  return true;
}

}  // namespace

TEST_CASE("bilateral weight: frozen exponent oracles") {
  SolverConfig cfg;  // sigma_x^2 = 2.5, sigma_c^2 = 25
  Vec3 gray{100.0, 100.0, 100.0};
  // Unit spatial offset, equal colors: exp(-1/5).
  CHECK(bilateral_weight(1, 0, 0, 0, gray, gray, cfg) ==
        doctest::Approx(0.81873075307798182).epsilon(1e-15));
  // Same position, |dI|^2 = 25+25 = 50: exp(-50/50) = exp(-1).
  Vec3 c2{105.0, 95.0, 100.0};
  CHECK(bilateral_weight(5, 5, 5, 5, gray, c2, cfg) ==
        doctest::Approx(0.36787944117144233).epsilon(1e-15));
  // Factorizes into spatial * color.
  double w = bilateral_weight(1, 0, 0, 0, gray, c2, cfg);
  CHECK(w == doctest::Approx(0.81873075307798182 * 0.36787944117144233)
                 .epsilon(1e-14));
  // Weights never exceed 1.
  CHECK(bilateral_weight(0, 0, 0, 0, gray, gray, cfg) == 1.0);
}

TEST_CASE("propagate_depth: plane-ray intersection") {
  Intrinsics K{100.0, 100.0, 50.0, 50.0};

  // Fronto plane: constant depth everywhere.
  SlantedPlane fronto = plane_from(K, 50, 50, 2.0, ParamNormal{0.0, 0.0});
  CHECK(*propagate_depth(fronto, K, 60, 50, 1e-6) == doctest::Approx(2.0));
  CHECK(*propagate_depth(fronto, K, 10, 90, 1e-6) == doctest::Approx(2.0));

  // Slanted plane through the principal point at depth 2, slope a = 0.5:
  // at (60,50), ut = 0.1 -> d = 2 / (1 - 0.05).
  SlantedPlane sl = plane_from(K, 50, 50, 2.0, ParamNormal{0.5, 0.0});
  CHECK(*propagate_depth(sl, K, 60, 50, 1e-6) ==
        doctest::Approx(2.0 / 0.95).epsilon(1e-15));

  // Grazing denominator: a*ut = 1 exactly -> rejected.
  SlantedPlane gr{10.0, 0.0, 2.0};
  CHECK_FALSE(propagate_depth(gr, K, 60, 50, 1e-6).has_value());

  // Negative propagated depth (plane behind the ray) -> rejected.
  SlantedPlane neg{0.5, 0.0, 2.0};
  CHECK_FALSE(propagate_depth(neg, K, 350, 50, 1e-6).has_value());
}

TEST_CASE("d_step: pure data term returns the anchor") {
  Intrinsics K{100, 100, 0.5, 0.5};
  SolverState s = uniform_state(1, 1, 5.0, K);
  s.anchor_depth.at(0, 0) = 1.0;
  auto out = d_step(s, NeighborhoodPattern::checkerboard(), SolverConfig{});
  CHECK(out.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("d_step: hand oracle (1*1 + 1*5)/(1+1) = 3") {
  Intrinsics K{100, 100, 1.0, 0.5};
  SolverState s = uniform_state(2, 1, 5.0, K);
  s.anchor_depth.at(0, 0) = 1.0;
  s.anchor_depth.at(1, 0) = 5.0;
  SolverConfig cfg;
  cfg.confidence_mode = ConfidenceMode::Unified;
  cfg.sigma_x_sq = 1e18;  // spatial factor -> 1
  auto out = d_step(s, axes_pattern(), cfg);
  // Pixel 0: anchor 1 with weight 1; fronto neighbor at depth 5 propagates 5
  // with weight ~1. d* = (1 + 5) / 2.
  CHECK(out.at(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("d_step: separate mode weights the source by c_d * c_n") {
  Intrinsics K{100, 100, 1.0, 0.5};
  SolverState s = uniform_state(2, 1, 5.0, K);
  s.anchor_depth.at(0, 0) = 1.0;
  s.conf_n.at(1, 0) = 0.5;
  SolverConfig cfg;
  cfg.confidence_mode = ConfidenceMode::Separate;
  cfg.sigma_x_sq = 1e18;
  auto out = d_step(s, axes_pattern(), cfg);
  // S = c_d(j) * c_n(j) * w = 0.5: d* = (1 + 0.5*5) / 1.5.
  CHECK(out.at(0, 0) == doctest::Approx(3.5 / 1.5).epsilon(1e-12));
}

TEST_CASE("d_step: degenerate pixels keep the current depth") {
  Intrinsics K{100, 100, 1.0, 0.5};
  SolverState s = uniform_state(2, 1, 2.0, K);
  s.conf_d = ScalarGrid(2, 1, 0.0);
  s.conf_n = ScalarGrid(2, 1, 0.0);
  s.depth.at(1, 0) = 0.0;  // invalid neighbor: nothing propagates
  auto out = d_step(s, axes_pattern(), SolverConfig{});
  CHECK(out.at(0, 0) == 2.0);
  CHECK(out.at(1, 0) == 0.0);
}

TEST_CASE("d_step: zero-confidence pixels never move (literal kernel)") {
  SolverState s = random_state(12, 9, 101);
  s.conf_d = ScalarGrid(12, 9, 0.0);
  auto out = d_step(s, NeighborhoodPattern::checkerboard(), SolverConfig{});
  CHECK(grids_equal(out, s.depth));
}

TEST_CASE("n_step: hand oracle a = 3/13 on a unit-weight cross") {
  Intrinsics K{1.0, 1.0, 0.0, 0.0};
  SolverState s = uniform_state(2, 2, 1.0, K);
  s.depth.at(1, 0) = 1.5;
  s.anchor_depth = s.depth;
  SolverConfig cfg;
  cfg.sigma_x_sq = 1e18;
  // Self (0,0) at point (0,0,1); neighbor (1,0): point (1.5,0,1.5); neighbor
  // (0,1): point (0,1,1). A = [[1+2.25, 0],[0, 1+1]], B = [0.75, 0].
  auto out = n_step(s, axes_pattern(), cfg);
  Vec3 n = out.at(0, 0);
  double a = -n.x / n.z, b = -n.y / n.z;
  CHECK(a == doctest::Approx(3.0 / 13.0).epsilon(1e-12));
  CHECK(b == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("n_step: data-only pixels return the anchor direction") {
  Intrinsics K{100, 100, 1.0, 0.5};
  SolverState s = uniform_state(2, 1, 2.0, K);
  s.conf_d = ScalarGrid(2, 1, 0.0);  // separate mode: no structural term
  s.anchor_normal.at(0, 0) = unit_from_param({0.3, -0.1});
  auto out = n_step(s, axes_pattern(), SolverConfig{});
  Vec3 n = out.at(0, 0);
  CHECK(-n.x / n.z == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(-n.y / n.z == doctest::Approx(-0.1).epsilon(1e-13));
}

TEST_CASE("n_step: singular system keeps the current normal") {
  Intrinsics K{100, 100, 1.0, 0.5};
  SolverState s = uniform_state(2, 1, 2.0, K);
  Vec3 held = unit_from_param({0.7, 0.2});
  s.normal.at(0, 0) = held;
  s.conf_d = ScalarGrid(2, 1, 0.0);
  s.conf_n = ScalarGrid(2, 1, 0.0);  // D = 0 and no structural term
  auto out = n_step(s, axes_pattern(), SolverConfig{});
  CHECK(out.at(0, 0).x == held.x);
  CHECK(out.at(0, 0).z == held.z);
}

TEST_CASE("n_step: solutions are clipped to |a|,|b| <= 20") {
  Intrinsics K{100.0, 100.0, 0.0, 0.0};
  SolverState s = uniform_state(2, 2, 1.0, K);
  s.depth.at(1, 0) = 10.0;  // slope dz/dp = 9 / 0.1 = 90 along u
  s.anchor_depth = s.depth;
  s.conf_n = ScalarGrid(2, 2, 0.0);  // no data term: raw LSQ solution
  SolverConfig cfg;
  cfg.sigma_x_sq = 1e18;
  auto out = n_step(s, axes_pattern(), cfg);
  Vec3 n = out.at(0, 0);
  CHECK(-n.x / n.z == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("neighborhood: checkerboard order and bounds") {
  auto p = NeighborhoodPattern::checkerboard();
  REQUIRE(p.offsets.size() == 16);
  CHECK(p.offsets[0] == Offset{1, 0});
  CHECK(p.offsets[1] == Offset{-1, 0});
  CHECK(p.offsets[7] == Offset{-10, 0});
  CHECK(p.offsets[8] == Offset{0, 1});
  CHECK(p.offsets[15] == Offset{0, -10});

  auto center = neighborhood(p, 10, 10, 21, 21);
  CHECK(center.size() == 16);
  CHECK(center[0] == Offset{1, 0});
  CHECK(center[1] == Offset{-1, 0});

  auto corner = neighborhood(p, 0, 0, 21, 21);
  CHECK(corner.size() == 8);  // only positive offsets stay in-bounds
  for (auto [du, dv] : corner) {
    CHECK(du >= 0);
    CHECK(dv >= 0);
  }

  auto lonely = neighborhood(p, 0, 0, 1, 1);
  CHECK(lonely.empty());
}

TEST_CASE("neighborhood: dense window enumerates the full square") {
  auto p = NeighborhoodPattern::dense_window(2);
  CHECK(p.offsets.size() == 24);
  CHECK(p.offsets.front() == Offset{-2, -2});
  CHECK(p.offsets.back() == Offset{2, 2});
  for (auto [du, dv] : p.offsets) CHECK((du != 0 || dv != 0));
}

TEST_CASE("neighborhood: random window is deterministic, distinct, in-bounds") {
  auto p = NeighborhoodPattern::random_window(10, 16, 42);
  auto a = neighborhood(p, 50, 40, 100, 100);
  auto b = neighborhood(p, 50, 40, 100, 100);
  CHECK(a == b);
  CHECK(a.size() == 16);
  for (size_t i = 0; i < a.size(); ++i) {
    auto [du, dv] = a[i];
    CHECK(std::abs(du) <= 10);
    CHECK(std::abs(dv) <= 10);
    CHECK((du != 0 || dv != 0));
    CHECK(50 + du >= 0);
    CHECK(50 + du < 100);
    for (size_t j = i + 1; j < a.size(); ++j) CHECK(a[i] != a[j]);
  }

  // A window smaller than sample_count returns every cell.
  auto small = NeighborhoodPattern::random_window(1, 16, 42);
  auto all = neighborhood(small, 5, 5, 100, 100);
  CHECK(all.size() == 8);

  // Different seeds give different draws somewhere.
  auto p2 = NeighborhoodPattern::random_window(10, 16, 43);
  bool differs = false;
  for (int u = 20; u < 30 && !differs; ++u)
    differs = neighborhood(p, u, 50, 100, 100) !=
              neighborhood(p2, u, 50, 100, 100);
  CHECK(differs);
}

TEST_CASE("solve: bit-identical across thread counts and reruns") {
  GroundTruthScene scene = gen_planar_scene(default_four_plane_spec());
  CorruptionSpec cs;
  cs.seed = 7;
  CorruptResult cr = corrupt(scene, cs);

  SolverState s;
  s.depth = cr.depth;
  s.normal = cr.normal;
  s.anchor_depth = cr.depth;
  s.anchor_normal = cr.normal;
  s.conf_d = cr.conf_d;
  s.conf_n = cr.conf_n;
  s.image = scene.image;
  s.K = scene.K;

  auto pattern = NeighborhoodPattern::checkerboard();
  SolverConfig cfg;
  cfg.iterations = 3;

  cfg.threads = 1;
  SolveResult r1 = solve(s, pattern, cfg);
  SolveResult r1b = solve(s, pattern, cfg);
  cfg.threads = 4;
  SolveResult r4 = solve(s, pattern, cfg);
  cfg.threads = 16;
  SolveResult r16 = solve(s, pattern, cfg);

  CHECK(grids_equal(r1.depth, r1b.depth));
  CHECK(grids_equal(r1.normal, r1b.normal));
  CHECK(grids_equal(r1.depth, r4.depth));
  CHECK(grids_equal(r1.normal, r4.normal));
  CHECK(grids_equal(r1.depth, r16.depth));
  CHECK(grids_equal(r1.normal, r16.normal));
}

TEST_CASE("solve: one non-evolving iteration equals the literal kernels") {
  for (auto mode : {ConfidenceMode::Separate, ConfidenceMode::Unified}) {
    SolverState s = random_state(16, 12, 2024);
    auto pattern = NeighborhoodPattern::checkerboard();
    SolverConfig cfg;
    cfg.iterations = 1;
    cfg.evolve_trust = false;
    cfg.confidence_mode = mode;

    SolveResult r = solve(s, pattern, cfg);

    ScalarGrid d1 = d_step(s, pattern, cfg);
    SolverState s2 = s;
    s2.depth = d1;  // N-step runs at the post-D depth
    NormalGrid n1 = n_step(s2, pattern, cfg);

    CHECK(grids_equal(r.depth, d1));
    CHECK(grids_equal(r.normal, n1));
  }
}

TEST_CASE("solve: fronto constant-depth state is a fixed point") {
  Intrinsics K{100, 100, 16.0, 12.0};
  SolverState s = uniform_state(32, 24, 2.0, K);
  SolverConfig cfg;
  cfg.iterations = 3;
  SolveResult r = solve(s, NeighborhoodPattern::checkerboard(), cfg);
  for (size_t i = 0; i < r.depth.size(); ++i) {
    CHECK(r.depth[i] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.normal[i].z == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("solve: on_iteration fires once per iteration with live grids") {
  SolverState s = random_state(10, 8, 5);
  SolverConfig cfg;
  cfg.iterations = 4;
  int calls = 0;
  SolveResult r = solve(s, NeighborhoodPattern::checkerboard(), cfg,
                        [&](int it, const ScalarGrid& d, const NormalGrid& n) {
                          CHECK(it == calls);
                          CHECK(d.width() == 10);
                          CHECK(n.height() == 8);
                          ++calls;
                        });
  CHECK(calls == 4);
}

TEST_CASE("energy_d: single-pixel oracle and d_step descent") {
  Intrinsics K{100, 100, 0.5, 0.5};
  SolverState s = uniform_state(1, 1, 2.0, K);
  s.anchor_depth.at(0, 0) = 1.0;
  auto pattern = NeighborhoodPattern::checkerboard();
  // E = alpha * c * (d - anchor)^2 = 1 * 1 * (2-1)^2.
  CHECK(energy_d(s, pattern, SolverConfig{}) == doctest::Approx(1.0));

  // Frozen-propagation energy never increases across a D-step.
  for (uint64_t seed : {11, 12, 13, 14, 15}) {
    SolverState rs = random_state(14, 11, seed);
    SolverConfig cfg;
    double before = energy_d(rs, pattern, cfg);
    ScalarGrid after_d = d_step(rs, pattern, cfg);
    double after = energy_d(rs, pattern, cfg, &after_d);
    CHECK(after <= before * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("energy_n: data-only oracle") {
  Intrinsics K{100, 100, 0.5, 0.5};
  SolverState s = uniform_state(1, 1, 2.0, K);
  s.normal.at(0, 0) = unit_from_param({0.5, 0.0});
  s.anchor_normal.at(0, 0) = unit_from_param({0.0, 0.0});
  s.conf_d.at(0, 0) = 0.0;  // no structural term (and none possible on 1x1)
  // E = alpha * c_n * ((a - ahat)^2 + (b - bhat)^2) = 0.25.
  CHECK(energy_n(s, NeighborhoodPattern::checkerboard(), SolverConfig{}) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.sigma_x_sq = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.threads = -2;
  CHECK_THROWS_AS(cfg.validate(), Error);

  // Confidence outside [0,1] is rejected at the solve boundary.
  SolverState s = uniform_state(2, 2, 1.0, Intrinsics{10, 10, 1, 1});
  s.conf_d.at(0, 0) = 1.5;
  CHECK_THROWS_AS(solve(s, NeighborhoodPattern::checkerboard(), SolverConfig{}),
                  Error);
}

TEST_CASE("d_step: anchor must be valid where weighted") {
  SolverState s = uniform_state(2, 2, 1.0, Intrinsics{10, 10, 1, 1});
  s.anchor_depth.at(1, 1) = 0.0;  // conf is 1 there
  CHECK_THROWS_AS(d_step(s, NeighborhoodPattern::checkerboard(), SolverConfig{}),
                  Error);
}
