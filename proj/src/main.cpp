// dnsolve: confidence-weighted depth/normal refinement CLI.
//
// Exit codes: 0 success, 2 configuration error (bad flags, bad values,
// malformed inputs), 1 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dn/confidence.h"
#include "dn/io.h"
#include "dn/metrics.h"
#include "dn/solver.h"
#include "dn/synth.h"

namespace {

dn::NeighborhoodPattern parse_pattern(const std::string& s) {
  if (s == "checkerboard") return dn::NeighborhoodPattern::checkerboard();
  auto split = [](const std::string& str) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (size_t i = 0; i <= str.size(); ++i)
      if (i == str.size() || str[i] == ':') {
        parts.push_back(str.substr(start, i - start));
        start = i + 1;
      }
    return parts;
  };
  auto parts = split(s);
  try {
    if (parts.size() == 2 && parts[0] == "dense")
      return dn::NeighborhoodPattern::dense_window(std::stoi(parts[1]));
    if (parts.size() == 4 && parts[0] == "random")
      return dn::NeighborhoodPattern::random_window(
          std::stoi(parts[1]), std::stoi(parts[2]),
          static_cast<uint64_t>(std::stoull(parts[3])));
  } catch (const std::exception&) {
  }
  dn::fail(dn::ErrorKind::Config,
           "bad --pattern '" + s +
               "' (use checkerboard | dense:R | random:R:SAMPLES:SEED)");
}

dn::Pose parse_single_pose(const std::string& path) {
  auto poses = dn::parse_poses(path);
  if (poses.size() != 1)
    dn::fail(dn::ErrorKind::Config,
             path + ": expected exactly one 4x4 pose in this file");
  return poses[0];
}

int run_solve(const std::string& depth_path, const std::string& normal_path,
              const std::string& conf_d_path, const std::string& conf_n_path,
              const std::string& image_path, const std::string& intr_path,
              int iters, double alpha, double sigma_x2, double sigma_c2,
              const std::string& pattern_str, const std::string& anchor_str,
              const std::string& mode_str, int threads,
              const std::string& out_depth, const std::string& out_normal,
              const std::string& viz_dir) {
  dn::SolverConfig cfg;
  cfg.iterations = iters;
  cfg.alpha = alpha;
  cfg.sigma_x_sq = sigma_x2;
  cfg.sigma_c_sq = sigma_c2;
  cfg.threads = threads;
  if (mode_str == "separate")
    cfg.confidence_mode = dn::ConfidenceMode::Separate;
  else if (mode_str == "unified")
    cfg.confidence_mode = dn::ConfidenceMode::Unified;
  else
    dn::fail(dn::ErrorKind::Config, "bad --mode (use separate | unified)");
  if (anchor_str == "initial")
    cfg.anchor_mode = dn::AnchorMode::Initial;
  else if (anchor_str == "previous")
    cfg.anchor_mode = dn::AnchorMode::Previous;
  else
    dn::fail(dn::ErrorKind::Config, "bad --anchor (use initial | previous)");

  dn::SolverState state;
  state.depth = dn::read_pfm_scalar(depth_path);
  state.normal = dn::read_pfm_normals(normal_path);
  state.anchor_depth = state.depth;    // input maps are both the initial
  state.anchor_normal = state.normal;  // iterate and the data-term targets
  state.conf_d = dn::read_pfm_scalar(conf_d_path);
  state.conf_n = conf_n_path.empty() ? state.conf_d
                                     : dn::read_pfm_scalar(conf_n_path);
  state.image = dn::read_image_png(image_path);
  state.K = dn::parse_intrinsics(intr_path);

  auto pattern = parse_pattern(pattern_str);
  auto result = dn::solve(state, pattern, cfg);

  dn::write_pfm(result.depth, out_depth);
  dn::write_pfm(result.normal, out_normal);
  if (!viz_dir.empty()) {
    std::filesystem::create_directories(viz_dir);
    dn::colormap_render(result.depth,
                        (std::filesystem::path(viz_dir) / "depth.png").string());
    dn::colormap_render(
        result.normal, (std::filesystem::path(viz_dir) / "normal.png").string());
  }
  return 0;
}

int run_geoconf(const std::string& target_depth, const std::string& target_pose,
                const std::vector<std::string>& ref_depths,
                const std::vector<std::string>& ref_poses,
                const std::string& intr_path, double gamma, double oob,
                const std::string& out) {
  if (ref_depths.size() != ref_poses.size() || ref_depths.empty())
    dn::fail(dn::ErrorKind::Config,
             "--ref-depth and --ref-pose must be given the same number of "
             "times (at least once)");
  dn::Intrinsics K = dn::parse_intrinsics(intr_path);
  dn::View target{dn::read_pfm_scalar(target_depth),
                  parse_single_pose(target_pose), K};
  std::vector<dn::View> refs;
  for (size_t i = 0; i < ref_depths.size(); ++i)
    refs.push_back({dn::read_pfm_scalar(ref_depths[i]),
                    parse_single_pose(ref_poses[i]), K});
  dn::ConfidenceConfig cfg;
  cfg.gamma_geo = gamma;
  cfg.oob_value = oob;
  dn::write_pfm(dn::geometric_confidence(target, refs, cfg), out);
  return 0;
}

int run_hybrid(const std::string& deep, const std::string& geo,
               const std::string& out) {
  dn::write_pfm(
      dn::hybrid_confidence(dn::read_pfm_scalar(deep), dn::read_pfm_scalar(geo)),
      out);
  return 0;
}

int run_synth(const std::string& spec_path, const std::string& out_dir,
              std::optional<double> corrupt_p, std::optional<double> sparsify_f,
              uint64_t seed) {
  dn::SceneSpec spec = spec_path.empty() ? dn::default_four_plane_spec()
                                         : dn::parse_scene_spec(spec_path);
  dn::GroundTruthScene scene = dn::gen_planar_scene(spec);

  std::filesystem::create_directories(out_dir);
  auto at = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  dn::write_pfm(scene.depth, at("gt_depth.pfm"));
  dn::write_pfm(scene.normal, at("gt_normal.pfm"));
  dn::write_image_png(scene.image, at("image.png"));
  dn::write_intrinsics(scene.K, at("intrinsics.txt"));

  if (corrupt_p) {
    dn::CorruptionSpec cs;
    cs.p_noise = *corrupt_p;
    cs.seed = seed;
    dn::CorruptResult cr = dn::corrupt(scene, cs);
    dn::write_pfm(cr.depth, at("corrupt_depth.pfm"));
    dn::write_pfm(cr.normal, at("corrupt_normal.pfm"));
    dn::write_pfm(cr.conf_d, at("conf_d.pfm"));
    dn::write_pfm(cr.conf_n, at("conf_n.pfm"));
  }
  if (sparsify_f) {
    dn::SparsifyResult sr = dn::sparsify(scene, *sparsify_f, seed);
    dn::write_pfm(sr.depth, at("sparse_depth.pfm"));
    dn::write_pfm(sr.conf_d, at("conf_d.pfm"));
  }
  return 0;
}

int run_metrics(const std::string& pred, const std::string& gt,
                const std::string& pred_normal, const std::string& gt_normal,
                const std::string& out) {
  if (pred_normal.empty() != gt_normal.empty())
    dn::fail(dn::ErrorKind::Config,
             "--pred-normal and --gt-normal must be given together");
  dn::ScalarGrid pred_d = dn::read_pfm_scalar(pred);
  dn::ScalarGrid gt_d = dn::read_pfm_scalar(gt);
  dn::DepthMetrics dm = dn::depth_metrics(pred_d, gt_d);
  std::optional<dn::NormalMetrics> nm;
  if (!pred_normal.empty()) {
    dn::NormalGrid pn = dn::read_pfm_normals(pred_normal);
    dn::NormalGrid gn = dn::read_pfm_normals(gt_normal);
    nm = dn::normal_metrics(pn, gn);
  }
  std::string json = dn::metrics_json(dm, nm);
  std::ofstream f(out);
  if (!f) dn::fail(dn::ErrorKind::Io, out + ": cannot open for writing");
  f << json;
  if (!f) dn::fail(dn::ErrorKind::Io, out + ": write failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence-weighted iterative depth/normal refinement"};
  app.require_subcommand(1);
  app.fallthrough();  // global options (--threads) may follow the subcommand
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads for the solver (0 = hardware count)");

  // solve
  auto* solve = app.add_subcommand("solve", "Refine a depth/normal pair");
  std::string s_depth, s_normal, s_conf_d, s_conf_n, s_image, s_intr;
  std::string s_pattern = "checkerboard", s_anchor = "initial",
              s_mode = "separate";
  std::string s_out_depth, s_out_normal, s_viz;
  int s_iters = 0;
  double s_alpha = 1.0, s_sx2 = 2.5, s_sc2 = 25.0;
  solve->add_option("--depth", s_depth, "Input depth map (.pfm)")->required();
  solve->add_option("--normal", s_normal, "Input normal map (.pfm)")->required();
  solve->add_option("--conf-d", s_conf_d, "Depth confidence map (.pfm)")
      ->required();
  solve->add_option("--conf-n", s_conf_n,
                    "Normal confidence map (.pfm); defaults to --conf-d");
  solve->add_option("--image", s_image, "RGB guide image (.png)")->required();
  solve->add_option("--intrinsics", s_intr, "Pinhole intrinsics: fx fy cx cy")
      ->required();
  solve->add_option("--iters", s_iters, "Refinement iterations")->required();
  solve->add_option("--alpha", s_alpha, "Data term weight");
  solve->add_option("--sigma-x2", s_sx2, "Spatial bilateral variance (px^2)");
  solve->add_option("--sigma-c2", s_sc2, "Color bilateral variance");
  solve->add_option("--pattern", s_pattern,
                    "checkerboard | dense:R | random:R:SAMPLES:SEED");
  solve->add_option("--anchor", s_anchor, "initial | previous");
  solve->add_option("--mode", s_mode, "separate | unified");
  solve->add_option("--out-depth", s_out_depth, "Refined depth output (.pfm)")
      ->required();
  solve->add_option("--out-normal", s_out_normal,
                    "Refined normal output (.pfm)")
      ->required();
  solve->add_option("--viz-dir", s_viz, "Directory for colormapped renders");

  // geoconf
  auto* geoconf =
      app.add_subcommand("geoconf", "Cross-view geometric depth confidence");
  std::string g_tdepth, g_tpose, g_intr, g_out;
  std::vector<std::string> g_rdepths, g_rposes;
  double g_gamma = 5.0, g_oob = 1.0;
  geoconf->add_option("--target-depth", g_tdepth, "Target depth map (.pfm)")
      ->required();
  geoconf->add_option("--target-pose", g_tpose, "Target camera-to-world pose")
      ->required();
  geoconf->add_option("--ref-depth", g_rdepths, "Reference depth map (repeat)")
      ->required();
  geoconf->add_option("--ref-pose", g_rposes, "Reference pose (repeat)")
      ->required();
  geoconf->add_option("--intrinsics", g_intr, "Shared intrinsics")->required();
  geoconf->add_option("--gamma", g_gamma, "Relative-error sharpness");
  geoconf->add_option("--oob", g_oob, "Confidence for unobserved pixels");
  geoconf->add_option("--out", g_out, "Output confidence map (.pfm)")
      ->required();

  // hybrid
  auto* hybrid =
      app.add_subcommand("hybrid", "Combine two confidence maps (product)");
  std::string h_deep, h_geo, h_out;
  hybrid->add_option("--deep", h_deep, "Learned confidence map (.pfm)")
      ->required();
  hybrid->add_option("--geo", h_geo, "Geometric confidence map (.pfm)")
      ->required();
  hybrid->add_option("--out", h_out, "Output confidence map (.pfm)")
      ->required();

  // synth
  auto* synth =
      app.add_subcommand("synth", "Generate a synthetic planar benchmark");
  std::string y_spec, y_out_dir;
  double y_corrupt = 0.0, y_sparsify = 0.0;
  uint64_t y_seed = 7;
  synth->add_option("--spec", y_spec,
                    "Scene description; omitted = built-in four-plane scene");
  synth->add_option("--out-dir", y_out_dir, "Output directory")->required();
  auto* oc = synth->add_option("--corrupt", y_corrupt,
                               "Also emit a corrupted variant (noise fraction)");
  auto* os = synth->add_option(
      "--sparsify", y_sparsify, "Also emit a sparse variant (keep fraction)");
  oc->excludes(os);
  synth->add_option("--seed", y_seed, "Seed for corruption/sparsification");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Depth/normal error metrics");
  std::string m_pred, m_gt, m_pred_n, m_gt_n, m_out;
  metrics->add_option("--pred", m_pred, "Predicted depth (.pfm)")->required();
  metrics->add_option("--gt", m_gt, "Ground-truth depth (.pfm)")->required();
  metrics->add_option("--pred-normal", m_pred_n, "Predicted normals (.pfm)");
  metrics->add_option("--gt-normal", m_gt_n, "Ground-truth normals (.pfm)");
  metrics->add_option("--out", m_out, "Output metrics JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve)
      return run_solve(s_depth, s_normal, s_conf_d, s_conf_n, s_image, s_intr,
                       s_iters, s_alpha, s_sx2, s_sc2, s_pattern, s_anchor,
                       s_mode, threads, s_out_depth, s_out_normal, s_viz);
    if (*geoconf)
      return run_geoconf(g_tdepth, g_tpose, g_rdepths, g_rposes, g_intr,
                         g_gamma, g_oob, g_out);
    if (*hybrid) return run_hybrid(h_deep, h_geo, h_out);
    if (*synth)
      return run_synth(y_spec, y_out_dir,
                       *oc ? std::optional<double>(y_corrupt) : std::nullopt,
                       *os ? std::optional<double>(y_sparsify) : std::nullopt,
                       y_seed);
    if (*metrics) return run_metrics(m_pred, m_gt, m_pred_n, m_gt_n, m_out);
  } catch (const dn::Error& e) {
    std::fprintf(stderr, "dnsolve: %s\n", e.what());
    return e.kind() == dn::ErrorKind::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dnsolve: %s\n", e.what());
    return 1;
  }
  return 0;
}
