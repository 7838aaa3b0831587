#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dn/io.h"

using nlohmann::json;

namespace {

// DN_CLI_PATH is injected by the build as the absolute path of the binary.
constexpr const char* kCli = DN_CLI_PATH;

int run_cli(const std::string& args) {
  std::string cmd = std::string(kCli) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc == -1 || !WIFEXITED(rc)) return -1;
  return WEXITSTATUS(rc);
}

std::string dir() {
  static std::string d = [] {
    std::filesystem::create_directories("cli_test_tmp");
    return std::string("cli_test_tmp");
  }();
  return d;
}

std::string at(const std::string& name) { return dir() + "/" + name; }

std::string read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  return json::parse(f);
}

// Small two-plane scene so solve-based cases stay fast.
std::string small_spec() {
  static std::string path = [] {
    std::string p = at("small.cfg");
    std::ofstream f(p);
    f << "width = 48\nheight = 32\n"
         "fx = 40\nfy = 40\ncx = 24\ncy = 16\njitter = 10\n"
         "[region]\nrect = 0 0 24 32\nplane = 0.1 -0.05 2.0\ncolor = 60 120 80\n"
         "[region]\nrect = 24 0 24 32\nplane = -0.2 0.1 2.5\ncolor = 180 90 140\n";
    return p;
  }();
  return path;
}

// Generates the small corrupted fixture once; returns its directory.
std::string small_fixture() {
  static std::string d = [] {
    std::string out = at("small_fx");
    REQUIRE(run_cli("synth --spec " + small_spec() + " --out-dir " + out +
                    " --corrupt 0.5 --seed 3") == 0);
    return out;
  }();
  return d;
}

std::string solve_args(const std::string& fx, const std::string& tag,
                       const std::string& extra) {
  return "solve --depth " + fx + "/corrupt_depth.pfm --normal " + fx +
         "/corrupt_normal.pfm --conf-d " + fx + "/conf_d.pfm --conf-n " + fx +
         "/conf_n.pfm --image " + fx + "/image.png --intrinsics " + fx +
         "/intrinsics.txt --out-depth " + at(tag + "_d.pfm") +
         " --out-normal " + at(tag + "_n.pfm") + " " + extra;
}

}  // namespace

TEST_CASE("cli: help exits 0, usage errors exit 2") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("solve --help") == 0);
  CHECK(run_cli("") == 2);                    // subcommand required
  CHECK(run_cli("frobnicate") == 2);          // unknown subcommand
  CHECK(run_cli("synth --bogus x") == 2);     // unknown flag
  CHECK(run_cli("synth") == 2);               // missing required --out-dir
  CHECK(run_cli("synth --out-dir " + at("x") +
                " --corrupt 0.5 --sparsify 0.1") == 2);  // mutually exclusive
}

TEST_CASE("cli synth: default scene emits ground truth + corruption set") {
  std::string out = at("synth_default");
  REQUIRE(run_cli("synth --out-dir " + out + " --corrupt 0.95 --seed 7") == 0);
  for (const char* f : {"gt_depth.pfm", "gt_normal.pfm", "image.png",
                        "intrinsics.txt", "corrupt_depth.pfm",
                        "corrupt_normal.pfm", "conf_d.pfm", "conf_n.pfm"}) {
    CHECK(std::filesystem::exists(out + "/" + f));
  }
  dn::ScalarGrid d = dn::read_pfm_scalar(out + "/gt_depth.pfm");
  CHECK(d.width() == 200);
  CHECK(d.height() == 200);
  dn::Intrinsics K = dn::parse_intrinsics(out + "/intrinsics.txt");
  CHECK(K.fx == 200.0);
  CHECK(K.cx == 100.0);

  std::string sp = at("synth_sparse");
  REQUIRE(run_cli("synth --out-dir " + sp + " --sparsify 0.02 --seed 7") == 0);
  CHECK(std::filesystem::exists(sp + "/sparse_depth.pfm"));
  CHECK(std::filesystem::exists(sp + "/conf_d.pfm"));
  CHECK(!std::filesystem::exists(sp + "/corrupt_depth.pfm"));

  CHECK(run_cli("synth --out-dir " + at("badp") + " --corrupt 1.5") != 0);
}

TEST_CASE("cli metrics: gt vs itself is a perfect score") {
  std::string fx = small_fixture();
  std::string out = at("perfect.json");
  REQUIRE(run_cli("metrics --pred " + fx + "/gt_depth.pfm --gt " + fx +
                  "/gt_depth.pfm --pred-normal " + fx +
                  "/gt_normal.pfm --gt-normal " + fx + "/gt_normal.pfm --out " +
                  out) == 0);
  json m = read_json(out);
  CHECK(m.size() == 13);
  CHECK(m["abs_rel"].get<double>() == 0.0);
  CHECK(m["delta_1"].get<double>() == 1.0);
  CHECK(m["mean_deg"].get<double>() == 0.0);
  CHECK(m["within_30"].get<double>() == 1.0);

  // Depth-only output carries exactly the eight depth keys.
  std::string out2 = at("depth_only.json");
  REQUIRE(run_cli("metrics --pred " + fx + "/gt_depth.pfm --gt " + fx +
                  "/gt_depth.pfm --out " + out2) == 0);
  CHECK(read_json(out2).size() == 8);

  // Normal maps must come in pairs.
  CHECK(run_cli("metrics --pred " + fx + "/gt_depth.pfm --gt " + fx +
                "/gt_depth.pfm --pred-normal " + fx +
                "/gt_normal.pfm --out " + at("odd.json")) == 2);
}

TEST_CASE("cli solve: refines the corrupted fixture") {
  std::string fx = small_fixture();
  REQUIRE(run_cli(solve_args(fx, "ref", "--iters 6")) == 0);

  std::string before = at("before.json"), after = at("after.json");
  REQUIRE(run_cli("metrics --pred " + fx + "/corrupt_depth.pfm --gt " + fx +
                  "/gt_depth.pfm --out " + before) == 0);
  REQUIRE(run_cli("metrics --pred " + at("ref_d.pfm") + " --gt " + fx +
                  "/gt_depth.pfm --out " + after) == 0);
  double r0 = read_json(before)["abs_rel"].get<double>();
  double r1 = read_json(after)["abs_rel"].get<double>();
  CHECK(r1 < r0);
  // Normals come back camera-facing and readable.
  dn::NormalGrid n = dn::read_pfm_normals(at("ref_n.pfm"));
  CHECK(n.width() == 48);
}

TEST_CASE("cli solve: doubling --iters never worsens AbsRel") {
  std::string out = at("fp");
  REQUIRE(run_cli("synth --out-dir " + out + " --corrupt 0.95 --seed 7") == 0);
  auto solve_and_score = [&](int iters, const std::string& tag) {
    REQUIRE(run_cli("solve --depth " + out + "/corrupt_depth.pfm --normal " +
                    out + "/corrupt_normal.pfm --conf-d " + out +
                    "/conf_d.pfm --conf-n " + out + "/conf_n.pfm --image " +
                    out + "/image.png --intrinsics " + out +
                    "/intrinsics.txt --iters " + std::to_string(iters) +
                    " --out-depth " + at(tag + "_d.pfm") + " --out-normal " +
                    at(tag + "_n.pfm")) == 0);
    std::string mj = at(tag + ".json");
    REQUIRE(run_cli("metrics --pred " + at(tag + "_d.pfm") + " --gt " + out +
                    "/gt_depth.pfm --out " + mj) == 0);
    return read_json(mj)["abs_rel"].get<double>();
  };
  double r2 = solve_and_score(2, "it2");
  double r4 = solve_and_score(4, "it4");
  CHECK(r4 <= r2);
}

TEST_CASE("cli solve: byte-identical across threads and reruns") {
  std::string fx = small_fixture();
  REQUIRE(run_cli(solve_args(fx, "t1", "--iters 4 --threads 1")) == 0);
  REQUIRE(run_cli(solve_args(fx, "t4", "--iters 4 --threads 4")) == 0);
  REQUIRE(run_cli(solve_args(fx, "t1b", "--iters 4 --threads 1")) == 0);
  std::string d1 = read_bytes(at("t1_d.pfm"));
  CHECK(d1 == read_bytes(at("t4_d.pfm")));
  CHECK(d1 == read_bytes(at("t1b_d.pfm")));
  std::string n1 = read_bytes(at("t1_n.pfm"));
  CHECK(n1 == read_bytes(at("t4_n.pfm")));
  CHECK(n1 == read_bytes(at("t1b_n.pfm")));
}

TEST_CASE("cli solve: omitted --conf-n defaults to the depth confidence") {
  std::string fx = small_fixture();
  std::string with = "solve --depth " + fx + "/corrupt_depth.pfm --normal " +
                     fx + "/corrupt_normal.pfm --conf-d " + fx +
                     "/conf_d.pfm --conf-n " + fx + "/conf_d.pfm --image " +
                     fx + "/image.png --intrinsics " + fx +
                     "/intrinsics.txt --iters 3 --out-depth " +
                     at("cnx_d.pfm") + " --out-normal " + at("cnx_n.pfm");
  std::string without = "solve --depth " + fx + "/corrupt_depth.pfm --normal " +
                        fx + "/corrupt_normal.pfm --conf-d " + fx +
                        "/conf_d.pfm --image " + fx + "/image.png "
                        "--intrinsics " + fx +
                        "/intrinsics.txt --iters 3 --out-depth " +
                        at("cno_d.pfm") + " --out-normal " + at("cno_n.pfm");
  REQUIRE(run_cli(with) == 0);
  REQUIRE(run_cli(without) == 0);
  CHECK(read_bytes(at("cnx_d.pfm")) == read_bytes(at("cno_d.pfm")));
  CHECK(read_bytes(at("cnx_n.pfm")) == read_bytes(at("cno_n.pfm")));
}

TEST_CASE("cli solve: config errors exit 2, runtime errors exit 1") {
  std::string fx = small_fixture();
  CHECK(run_cli(solve_args(fx, "bad", "--iters 3 --mode bogus")) == 2);
  CHECK(run_cli(solve_args(fx, "bad", "--iters 0")) == 2);
  CHECK(run_cli(solve_args(fx, "bad", "--iters 3 --pattern dense")) == 2);
  CHECK(run_cli(solve_args(fx, "bad", "--iters 3 --alpha -1")) == 2);

  // Out-of-range confidence is a config error at the solver boundary.
  dn::ScalarGrid overconf(48, 32, 1.5);
  dn::write_pfm(overconf, at("overconf.pfm"));
  CHECK(run_cli("solve --depth " + fx + "/corrupt_depth.pfm --normal " + fx +
                "/corrupt_normal.pfm --conf-d " + at("overconf.pfm") +
                " --image " + fx + "/image.png --intrinsics " + fx +
                "/intrinsics.txt --iters 3 --out-depth " + at("oc_d.pfm") +
                " --out-normal " + at("oc_n.pfm")) == 2);

  // Missing input file is a runtime failure.
  CHECK(run_cli("solve --depth /nonexistent.pfm --normal " + fx +
                "/corrupt_normal.pfm --conf-d " + fx + "/conf_d.pfm --image " +
                fx + "/image.png --intrinsics " + fx +
                "/intrinsics.txt --iters 3 --out-depth " + at("mi_d.pfm") +
                " --out-normal " + at("mi_n.pfm")) == 1);
}

TEST_CASE("cli geoconf + hybrid") {
  // Identical views with identity poses observe every pixel perfectly.
  dn::ScalarGrid d(8, 6, 2.0);
  dn::write_pfm(d, at("geo_t.pfm"));
  dn::write_pfm(d, at("geo_r.pfm"));
  {
    std::ofstream p(at("identity.txt"));
    p << "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
    std::ofstream k(at("geo_K.txt"));
    k << "10 10 4 3\n";
  }
  REQUIRE(run_cli("geoconf --target-depth " + at("geo_t.pfm") +
                  " --target-pose " + at("identity.txt") + " --ref-depth " +
                  at("geo_r.pfm") + " --ref-pose " + at("identity.txt") +
                  " --intrinsics " + at("geo_K.txt") + " --out " +
                  at("geo_c.pfm")) == 0);
  dn::ScalarGrid c = dn::read_pfm_scalar(at("geo_c.pfm"));
  for (size_t i = 0; i < c.size(); ++i) CHECK(c[i] == 1.0);

  // Mismatched view counts are a usage error.
  CHECK(run_cli("geoconf --target-depth " + at("geo_t.pfm") +
                " --target-pose " + at("identity.txt") + " --ref-depth " +
                at("geo_r.pfm") + " --ref-depth " + at("geo_r.pfm") +
                " --ref-pose " + at("identity.txt") + " --intrinsics " +
                at("geo_K.txt") + " --out " + at("geo_c2.pfm")) == 2);

  dn::ScalarGrid a(4, 4, 0.5), b(4, 4, 0.5);
  dn::write_pfm(a, at("hy_a.pfm"));
  dn::write_pfm(b, at("hy_b.pfm"));
  REQUIRE(run_cli("hybrid --deep " + at("hy_a.pfm") + " --geo " +
                  at("hy_b.pfm") + " --out " + at("hy_c.pfm")) == 0);
  dn::ScalarGrid h = dn::read_pfm_scalar(at("hy_c.pfm"));
  for (size_t i = 0; i < h.size(); ++i) CHECK(h[i] == 0.25);
}

TEST_CASE("cli solve: viz renders land in --viz-dir") {
  std::string fx = small_fixture();
  std::string viz = at("viz");
  REQUIRE(run_cli(solve_args(fx, "vz", "--iters 2 --viz-dir " + viz)) == 0);
  CHECK(std::filesystem::exists(viz + "/depth.png"));
  CHECK(std::filesystem::exists(viz + "/normal.png"));
}
