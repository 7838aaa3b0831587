#include "dn/solver.h"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace dn {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static row sharding. Per-pixel work is independent and written to disjoint
// outputs, so results are bit-identical for any thread count.
template <typename Fn>
void parallel_rows(int height, int threads, Fn&& fn) {
  threads = std::min(resolve_threads(threads), height);
  if (threads <= 1) {
    fn(0, height);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  int chunk = (height + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    int v0 = t * chunk, v1 = std::min(height, v0 + chunk);
    if (v0 >= v1) break;
    pool.emplace_back([&fn, v0, v1] { fn(v0, v1); });
  }
  for (auto& th : pool) th.join();
}

struct NormalizedCoords {
  ScalarGrid ut, vt;

  NormalizedCoords(const Intrinsics& K, int width, int height)
      : ut(width, height), vt(width, height) {
    for (int v = 0; v < height; ++v)
      for (int u = 0; u < width; ++u) {
        auto [a, b] = normalized_coords(K, u, v);
        ut.at(u, v) = a;
        vt.at(u, v) = b;
      }
  }
};

double offset_spatial(int du, int dv, const SolverConfig& cfg) {
  return std::exp(-(du * du + dv * dv) / (2.0 * cfg.sigma_x_sq));
}

double color_factor(const Vec3& Ii, const Vec3& Ij, const SolverConfig& cfg) {
  Vec3 d = Ii - Ij;
  return std::exp(-d.dot(d) / (2.0 * cfg.sigma_c_sq));
}

// Per-pixel neighbor enumeration shared by both steps. Checkerboard patterns
// iterate the fixed offset list with precomputed spatial factors;
// random-window patterns draw their per-pixel sample.
struct NeighborScan {
  const NeighborhoodPattern& pattern;
  const SolverConfig& cfg;
  int width, height;
  std::vector<double> spatial;  // aligned with pattern.offsets (checkerboard)

  NeighborScan(const NeighborhoodPattern& p, const SolverConfig& c, int w,
               int h)
      : pattern(p), cfg(c), width(w), height(h) {
    if (pattern.kind == PatternKind::Checkerboard) {
      spatial.reserve(pattern.offsets.size());
      for (auto [du, dv] : pattern.offsets)
        spatial.push_back(offset_spatial(du, dv, cfg));
    }
  }

  // fn(ju, jv, spatial_factor); enumeration order is the pattern order.
  template <typename Fn>
  void for_each(int u, int v, Fn&& fn) const {
    if (pattern.kind == PatternKind::Checkerboard) {
      for (size_t k = 0; k < pattern.offsets.size(); ++k) {
        int ju = u + pattern.offsets[k].first;
        int jv = v + pattern.offsets[k].second;
        if (ju < 0 || ju >= width || jv < 0 || jv >= height) continue;
        fn(ju, jv, spatial[k]);
      }
    } else {
      for (auto [du, dv] : neighborhood(pattern, u, v, width, height))
        fn(u + du, v + dv, offset_spatial(du, dv, cfg));
    }
  }
};

// ---- D-step kernel ---------------------------------------------------------
//
// d* = (alpha*data_w*anchor + sum S_j d_{j->i}) / (alpha*data_w + sum S_j)
// with S_j = src_w_j * w_ij; denominator < 1e-12 keeps the current depth.

struct DStepExtras {
  MaskGrid* filled = nullptr;      // denominator >= 1e-12
  ScalarGrid* support = nullptr;   // sum of S_j over accepted propagations
};

ScalarGrid d_step_impl(const ScalarGrid& d, const NormalGrid& n,
                       const ColorImage& image, const NormalizedCoords& nc,
                       const ScalarGrid& data_w, const ScalarGrid& anchor_d,
                       const ScalarGrid& src_w,
                       const NeighborhoodPattern& pattern,
                       const SolverConfig& cfg, bool ratio_guard,
                       const DStepExtras& extras = {}) {
  const int W = d.width(), H = d.height();
  ScalarGrid out(W, H);
  NeighborScan scan(pattern, cfg, W, H);

  parallel_rows(H, cfg.threads, [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v)
      for (int u = 0; u < W; ++u) {
        double num = cfg.alpha * data_w.at(u, v) * anchor_d.at(u, v);
        double den = cfg.alpha * data_w.at(u, v);
        double support = 0.0;
        double uti = nc.ut.at(u, v), vti = nc.vt.at(u, v);
        const Vec3& Ii = image.at(u, v);
        scan.for_each(u, v, [&](int ju, int jv, double sp) {
          double s0 = src_w.at(ju, jv);
          if (!(s0 > 0.0)) return;
          double dj = d.at(ju, jv);
          if (!(dj > 0.0)) return;
          const Vec3& nj = n.at(ju, jv);
          if (!(nj.z < -kEpsFace)) return;  // unparameterizable source: skip
          double aj = -nj.x / nj.z, bj = -nj.y / nj.z;
          double tj = (1.0 - aj * nc.ut.at(ju, jv) - bj * nc.vt.at(ju, jv)) * dj;
          double denp = 1.0 - aj * uti - bj * vti;
          if (!(std::abs(denp) >= cfg.eps_den)) return;
          double dp = tj / denp;
          if (!(dp > 0.0) || !std::isfinite(dp)) return;
          if (ratio_guard &&
              !(dp <= trust::kRatioGuard * dj && dp * trust::kRatioGuard >= dj))
            return;
          double S = s0 * sp * color_factor(Ii, image.at(ju, jv), cfg);
          num += S * dp;
          den += S;
          support += S;
        });
        bool filled = den >= 1e-12;
        out.at(u, v) = filled ? num / den : d.at(u, v);
        if (extras.filled) extras.filled->at(u, v) = filled ? 1 : 0;
        if (extras.support) extras.support->at(u, v) = support;
      }
  });
  return out;
}

// ---- N-step kernel ---------------------------------------------------------
//
// Per pixel: 2x2 system A (a,b)^T = B with data weight D = alpha*data_w_i and
// structural weight self_gate_i * src_w_j * w_ij over points unprojected from
// the supplied depth grid. |det| < eps_sing keeps the current normal.

struct NStepExtras {
  MaskGrid* good_fit = nullptr;  // passes the trust-promotion gates
  bool rescue = false;           // relative det guard for data-free pixels
};

NormalGrid n_step_impl(const ScalarGrid& d, const NormalGrid& n,
                       const ColorImage& image, const NormalizedCoords& nc,
                       const ScalarGrid& data_w, const ScalarGrid& anchor_a,
                       const ScalarGrid& anchor_b, const ScalarGrid& src_w,
                       const ScalarGrid& self_gate,
                       const NeighborhoodPattern& pattern,
                       const SolverConfig& cfg,
                       const NStepExtras& extras = {}) {
  const int W = d.width(), H = d.height();
  NormalGrid out(W, H);
  NeighborScan scan(pattern, cfg, W, H);

  parallel_rows(H, cfg.threads, [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v)
      for (int u = 0; u < W; ++u) {
        double D = cfg.alpha * data_w.at(u, v);
        double di = d.at(u, v);
        double gate = self_gate.at(u, v);
        if (!(di > 0.0)) gate = 0.0;  // no structural term without a self point

        double sA11 = 0, sA22 = 0, sA12 = 0, sB1 = 0, sB2 = 0, sC = 0, sS = 0;
        if (gate > 0.0) {
          double pi = nc.ut.at(u, v) * di, qi = nc.vt.at(u, v) * di, zi = di;
          const Vec3& Ii = image.at(u, v);
          scan.for_each(u, v, [&](int ju, int jv, double sp) {
            double tj = src_w.at(ju, jv);
            if (!(tj > 0.0)) return;
            double dj = d.at(ju, jv);
            if (!(dj > 0.0)) return;
            double sw = gate * tj * sp * color_factor(Ii, image.at(ju, jv), cfg);
            if (!(sw > 0.0)) return;
            double dp = nc.ut.at(ju, jv) * dj - pi;
            double dq = nc.vt.at(ju, jv) * dj - qi;
            double dz = dj - zi;
            sA11 += sw * dp * dp;
            sA22 += sw * dq * dq;
            sA12 += sw * dp * dq;
            sB1 += sw * dp * dz;
            sB2 += sw * dq * dz;
            sC += sw * dz * dz;
            sS += sw;
          });
        }

        double A11 = D + sA11, A22 = D + sA22, A12 = sA12;
        double B1 = D * anchor_a.at(u, v) + sB1;
        double B2 = D * anchor_b.at(u, v) + sB2;
        double det = A11 * A22 - A12 * A12;
        bool solvable = std::abs(det) >= cfg.eps_sing;

        // The 2x2 solution is scale-invariant in the structural weights, but
        // the det guard is absolute; a data-free pixel whose neighborhood
        // weights are tiny gets re-assembled at unit total weight so the
        // guard is effectively relative. Gate ratios are unchanged.
        if (!solvable && extras.rescue && D == 0.0 && sS > 0.0) {
          double r = 1.0 / sS;
          sA11 *= r; sA22 *= r; sA12 *= r;
          sB1 *= r; sB2 *= r; sC *= r; sS = 1.0;
          A11 = sA11; A22 = sA22; A12 = sA12;
          B1 = sB1; B2 = sB2;
          det = A11 * A22 - A12 * A12;
          solvable = std::abs(det) >= cfg.eps_sing;
        }

        bool good = false;
        if (solvable) {
          double a_raw = (B1 * A22 - B2 * A12) / det;
          double b_raw = (A11 * B2 - A12 * B1) / det;
          double a = std::clamp(a_raw, -cfg.clip_ab, cfg.clip_ab);
          double b = std::clamp(b_raw, -cfg.clip_ab, cfg.clip_ab);
          out.at(u, v) = unit_from_param({a, b});
          if (extras.good_fit && gate > 0.0 && sS > 0.0) {
            double r2 = a_raw * a_raw * sA11 + b_raw * b_raw * sA22 +
                        2.0 * a_raw * b_raw * sA12 - 2.0 * a_raw * sB1 -
                        2.0 * b_raw * sB2 + sC;
            double rms = std::sqrt(std::max(r2, 0.0) / sS);
            good = det >= trust::kCondGate * A11 * A22 &&
                   rms <= trust::kResidGate * std::abs(di) &&
                   std::abs(a_raw) <= cfg.clip_ab &&
                   std::abs(b_raw) <= cfg.clip_ab;
          }
        } else {
          out.at(u, v) = n.at(u, v);
        }
        if (extras.good_fit) extras.good_fit->at(u, v) = good ? 1 : 0;
      }
  });
  return out;
}

// Anchor slopes (a_hat, b_hat) wherever the data weight is positive; the
// anchor normal must be parameterizable there.
void anchor_slopes(const NormalGrid& anchor_n, const ScalarGrid& data_w,
                   ScalarGrid& a, ScalarGrid& b) {
  for (int v = 0; v < anchor_n.height(); ++v)
    for (int u = 0; u < anchor_n.width(); ++u) {
      if (!(data_w.at(u, v) > 0.0)) {
        a.at(u, v) = 0.0;
        b.at(u, v) = 0.0;
        continue;
      }
      ParamNormal pn = param_from_unit(anchor_n.at(u, v));
      a.at(u, v) = pn.a;
      b.at(u, v) = pn.b;
    }
}

// Mode-derived static weight grids for the literal (non-evolving) steps.
struct ModeWeights {
  ScalarGrid d_data, d_src;           // D-step
  ScalarGrid n_data, n_src, n_gate;   // N-step
};

ModeWeights mode_weights(const SolverState& s, const SolverConfig& cfg) {
  const int W = s.depth.width(), H = s.depth.height();
  ModeWeights mw{ScalarGrid(W, H), ScalarGrid(W, H), ScalarGrid(W, H),
                 ScalarGrid(W, H), ScalarGrid(W, H)};
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      double cd = s.conf_d.at(u, v);
      if (cfg.confidence_mode == ConfidenceMode::Unified) {
        mw.d_data.at(u, v) = cd;
        mw.d_src.at(u, v) = cd;
        mw.n_data.at(u, v) = cd;
        mw.n_src.at(u, v) = cd;
        mw.n_gate.at(u, v) = 1.0;
      } else {
        double cn = s.conf_n.at(u, v);
        mw.d_data.at(u, v) = cd;
        mw.d_src.at(u, v) = cd * cn;
        mw.n_data.at(u, v) = cn;
        mw.n_src.at(u, v) = cd;
        mw.n_gate.at(u, v) = cd;
      }
    }
  return mw;
}

void check_common(const SolverState& s, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg) {
  cfg.validate();
  pattern.validate();
  s.validate_shapes();
  s.K.validate();
}

// anchor_depth must be strictly positive where the depth data weight is.
void check_anchor_depth(const SolverState& s, const ScalarGrid& d_data) {
  for (int v = 0; v < s.depth.height(); ++v)
    for (int u = 0; u < s.depth.width(); ++u)
      if (d_data.at(u, v) > 0.0 && !(s.anchor_depth.at(u, v) > 0.0))
        fail(ErrorKind::InvalidDepth,
             "d_step: anchor depth must be > 0 where conf_d > 0");
}

}  // namespace

void SolverConfig::validate() const {
  if (!(alpha >= 0.0)) fail(ErrorKind::Config, "solver: alpha must be >= 0");
  if (!(sigma_x_sq > 0.0 && sigma_c_sq > 0.0))
    fail(ErrorKind::Config, "solver: bilateral variances must be > 0");
  if (iterations < 1) fail(ErrorKind::Config, "solver: iterations must be >= 1");
  if (!(clip_ab > 0.0)) fail(ErrorKind::Config, "solver: clip_ab must be > 0");
  if (!(eps_den > 0.0 && eps_sing > 0.0))
    fail(ErrorKind::Config, "solver: eps thresholds must be > 0");
  if (threads < 0) fail(ErrorKind::Config, "solver: threads must be >= 0");
}

void SolverState::validate_shapes() const {
  require_same_shape(depth, normal, "solver state");
  require_same_shape(depth, anchor_depth, "solver state");
  require_same_shape(depth, anchor_normal, "solver state");
  require_same_shape(depth, conf_d, "solver state");
  require_same_shape(depth, conf_n, "solver state");
  require_same_shape(depth, image, "solver state");
}

double bilateral_weight(double ui, double vi, double uj, double vj,
                        const Vec3& Ii, const Vec3& Ij,
                        const SolverConfig& cfg) {
  double dx = ui - uj, dy = vi - vj;
  Vec3 dc = Ii - Ij;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.sigma_x_sq) -
                  dc.dot(dc) / (2.0 * cfg.sigma_c_sq));
}

std::optional<double> propagate_depth(const SlantedPlane& plane_j,
                                      const Intrinsics& K, double u_i,
                                      double v_i, double eps_den) {
  auto [ut, vt] = normalized_coords(K, u_i, v_i);
  double den = 1.0 - plane_j.a * ut - plane_j.b * vt;
  if (!(std::abs(den) >= eps_den)) return std::nullopt;
  double d = plane_j.t / den;
  if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
  return d;
}

ScalarGrid d_step(const SolverState& state, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg) {
  check_common(state, pattern, cfg);
  ModeWeights mw = mode_weights(state, cfg);
  check_anchor_depth(state, mw.d_data);
  NormalizedCoords nc(state.K, state.depth.width(), state.depth.height());
  return d_step_impl(state.depth, state.normal, state.image, nc, mw.d_data,
                     state.anchor_depth, mw.d_src, pattern, cfg,
                     /*ratio_guard=*/false);
}

NormalGrid n_step(const SolverState& state, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg) {
  check_common(state, pattern, cfg);
  ModeWeights mw = mode_weights(state, cfg);
  NormalizedCoords nc(state.K, state.depth.width(), state.depth.height());
  const int W = state.depth.width(), H = state.depth.height();
  ScalarGrid aa(W, H), ab(W, H);
  anchor_slopes(state.anchor_normal, mw.n_data, aa, ab);
  return n_step_impl(state.depth, state.normal, state.image, nc, mw.n_data, aa,
                     ab, mw.n_src, mw.n_gate, pattern, cfg);
}

SolveResult solve(const SolverState& anchors, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg) {
  return solve(anchors, pattern, cfg, {});
}

SolveResult solve(const SolverState& anchors, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg,
                  const std::function<void(int, const ScalarGrid&,
                                           const NormalGrid&)>& on_iteration) {
  check_common(anchors, pattern, cfg);
  const int W = anchors.depth.width(), H = anchors.depth.height();
  NormalizedCoords nc(anchors.K, W, H);

  // Unified mode has a single confidence grid; the driver sees it as both.
  const ScalarGrid& conf_d = anchors.conf_d;
  const ScalarGrid& conf_n = cfg.confidence_mode == ConfidenceMode::Unified
                                 ? anchors.conf_d
                                 : anchors.conf_n;
  validate_confidence(conf_d, "solve conf_d");
  validate_confidence(conf_n, "solve conf_n");

  ScalarGrid d = anchors.anchor_depth;
  NormalGrid n = anchors.anchor_normal;
  ScalarGrid ad = anchors.anchor_depth;
  ScalarGrid aa(W, H), ab(W, H);
  anchor_slopes(anchors.anchor_normal, conf_n, aa, ab);

  // Trust state. Td/Tn start at the input confidences; promotion raises them
  // to 1. The normal data term keeps the INPUT conf_n forever. Unified mode
  // has no second trust channel: Tn stays 1 so source weights reduce to Td,
  // and the structural term is never self-gated.
  const bool unified = cfg.confidence_mode == ConfidenceMode::Unified;
  ScalarGrid data_wd = conf_d;
  ScalarGrid Td = conf_d;
  ScalarGrid Tn = unified ? ScalarGrid(W, H, 1.0) : conf_n;
  ScalarGrid d_src(W, H), n_src(W, H), n_gate(W, H);

  check_anchor_depth(anchors, conf_d);

  MaskGrid filled(W, H);
  ScalarGrid support(W, H);
  MaskGrid good_fit(W, H);
  MaskGrid promoted(W, H);

  for (int it = 0; it < cfg.iterations; ++it) {
    if (cfg.anchor_mode == AnchorMode::Previous && it > 0) {
      ad = d;
      anchor_slopes(n, conf_n, aa, ab);
    }

    // D-step source weight: Td_j * Tn_j (the separate-mode product; unified
    // inputs enter with Tn = conf as well).
    for (size_t i = 0; i < d_src.size(); ++i) d_src[i] = Td[i] * Tn[i];

    ScalarGrid dnew = d_step_impl(d, n, anchors.image, nc, data_wd, ad, d_src,
                                  pattern, cfg,
                                  /*ratio_guard=*/cfg.evolve_trust,
                                  {&filled, &support});

    // Depth promotion applies before the N-step of the same iteration.
    for (size_t i = 0; i < promoted.size(); ++i)
      promoted[i] = (cfg.evolve_trust && Td[i] == 0.0 && filled[i] &&
                     support[i] >= trust::kTauFill)
                        ? 1
                        : 0;
    for (size_t i = 0; i < n_src.size(); ++i)
      n_src[i] = promoted[i] ? 1.0 : Td[i];
    for (size_t i = 0; i < n_gate.size(); ++i) {
      if (unified)
        n_gate[i] = 1.0;
      else if (Td[i] > 0.0)
        n_gate[i] = Td[i];
      else if (cfg.evolve_trust && filled[i])
        n_gate[i] = 1.0;  // filled but unpromoted: fit is stored, not trusted
      else
        n_gate[i] = 0.0;
    }

    NormalGrid nnew =
        n_step_impl(dnew, n, anchors.image, nc, conf_n, aa, ab, n_src, n_gate,
                    pattern, cfg,
                    {cfg.evolve_trust ? &good_fit : nullptr,
                     /*rescue=*/cfg.evolve_trust});

    d = std::move(dnew);
    n = std::move(nnew);

    if (cfg.evolve_trust) {
      for (size_t i = 0; i < Tn.size(); ++i)
        if (Tn[i] == 0.0 && good_fit[i]) Tn[i] = 1.0;
      for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
          size_t i = static_cast<size_t>(v) * W + u;
          if (promoted[i]) {
            Td[i] = 1.0;
            data_wd[i] = trust::kPromotedWeight;
            ad.at(u, v) = d.at(u, v);
          }
        }
    }

    if (on_iteration) on_iteration(it, d, n);
  }
  return {std::move(d), std::move(n)};
}

double energy_d(const SolverState& state, const NeighborhoodPattern& pattern,
                const SolverConfig& cfg, const ScalarGrid* eval_depth) {
  check_common(state, pattern, cfg);
  const ScalarGrid& ev = eval_depth ? *eval_depth : state.depth;
  require_same_shape(state.depth, ev, "energy_d eval depth");
  ModeWeights mw = mode_weights(state, cfg);
  NormalizedCoords nc(state.K, state.depth.width(), state.depth.height());
  NeighborScan scan(pattern, cfg, state.depth.width(), state.depth.height());

  double E = 0.0;
  for (int v = 0; v < state.depth.height(); ++v)
    for (int u = 0; u < state.depth.width(); ++u) {
      double di = ev.at(u, v);
      double c = mw.d_data.at(u, v);
      if (c > 0.0) {
        double r = di - state.anchor_depth.at(u, v);
        E += cfg.alpha * c * r * r;
      }
      double uti = nc.ut.at(u, v), vti = nc.vt.at(u, v);
      const Vec3& Ii = state.image.at(u, v);
      scan.for_each(u, v, [&](int ju, int jv, double sp) {
        double s0 = mw.d_src.at(ju, jv);
        if (!(s0 > 0.0)) return;
        double dj = state.depth.at(ju, jv);
        if (!(dj > 0.0)) return;
        const Vec3& nj = state.normal.at(ju, jv);
        if (!(nj.z < -kEpsFace)) return;
        double aj = -nj.x / nj.z, bj = -nj.y / nj.z;
        double tj = (1.0 - aj * nc.ut.at(ju, jv) - bj * nc.vt.at(ju, jv)) * dj;
        double denp = 1.0 - aj * uti - bj * vti;
        if (!(std::abs(denp) >= cfg.eps_den)) return;
        double dp = tj / denp;
        if (!(dp > 0.0) || !std::isfinite(dp)) return;
        double S = s0 * sp * color_factor(Ii, state.image.at(ju, jv), cfg);
        double r = di - dp;
        E += S * r * r;
      });
    }
  return E;
}

double energy_n(const SolverState& state, const NeighborhoodPattern& pattern,
                const SolverConfig& cfg) {
  check_common(state, pattern, cfg);
  ModeWeights mw = mode_weights(state, cfg);
  NormalizedCoords nc(state.K, state.depth.width(), state.depth.height());
  NeighborScan scan(pattern, cfg, state.depth.width(), state.depth.height());

  double E = 0.0;
  for (int v = 0; v < state.depth.height(); ++v)
    for (int u = 0; u < state.depth.width(); ++u) {
      double c = mw.n_data.at(u, v);
      if (c > 0.0) {
        ParamNormal ni = param_from_unit(state.normal.at(u, v));
        ParamNormal na = param_from_unit(state.anchor_normal.at(u, v));
        double da = ni.a - na.a, db = ni.b - na.b;
        E += cfg.alpha * c * (da * da + db * db);
      }
      double gate = mw.n_gate.at(u, v);
      double di = state.depth.at(u, v);
      if (!(gate > 0.0) || !(di > 0.0)) continue;
      ParamNormal ni = param_from_unit(state.normal.at(u, v));
      double pi = nc.ut.at(u, v) * di, qi = nc.vt.at(u, v) * di, zi = di;
      const Vec3& Ii = state.image.at(u, v);
      scan.for_each(u, v, [&](int ju, int jv, double sp) {
        double tj = mw.n_src.at(ju, jv);
        if (!(tj > 0.0)) return;
        double dj = state.depth.at(ju, jv);
        if (!(dj > 0.0)) return;
        double sw = gate * tj * sp * color_factor(Ii, state.image.at(ju, jv), cfg);
        double dp = nc.ut.at(ju, jv) * dj - pi;
        double dq = nc.vt.at(ju, jv) * dj - qi;
        double dz = dj - zi;
        double r = ni.a * dp + ni.b * dq - dz;
        E += sw * r * r;
      });
    }
  return E;
}

}  // namespace dn
