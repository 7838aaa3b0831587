#pragma once

#include <functional>
#include <optional>

#include "dn/camera.h"
#include "dn/pattern.h"
#include "dn/plane.h"

namespace dn {

enum class ConfidenceMode { Unified, Separate };
enum class AnchorMode { Initial, Previous };

struct SolverConfig {
  double alpha = 1.0;        // data-term weight
  double sigma_x_sq = 2.5;   // spatial bilateral variance, pixels^2
  double sigma_c_sq = 25.0;  // color bilateral variance, (0-255 RGB)^2
  int iterations = 1;
  double clip_ab = 20.0;
  double eps_den = 1e-6;     // propagation denominator threshold
  double eps_sing = 1e-12;   // N-step determinant threshold
  ConfidenceMode confidence_mode = ConfidenceMode::Separate;
  AnchorMode anchor_mode = AnchorMode::Initial;
  // Trust evolution: zero-confidence pixels are promoted to trusted once the
  // solver fills them with sufficient support (see solve()). Without it, a
  // pixel whose whole neighborhood has zero confidence can never improve, and
  // heavily corrupted or sparse inputs stay unrecoverable.
  bool evolve_trust = true;
  int threads = 0;  // 0 = hardware concurrency; results identical for any value

  void validate() const;
};

struct SolverState {
  ScalarGrid depth;          // current iterate d
  NormalGrid normal;         // current iterate n
  ScalarGrid anchor_depth;   // data-term target d_hat
  NormalGrid anchor_normal;  // data-term target n_hat
  ScalarGrid conf_d;
  ScalarGrid conf_n;         // ignored in unified mode (conf_d is THE confidence)
  ColorImage image;
  Intrinsics K;

  void validate_shapes() const;
};

struct SolveResult {
  ScalarGrid depth;
  NormalGrid normal;
};

// exp(-|x_i-x_j|^2 / (2 sigma_x^2) - |I_i-I_j|^2 / (2 sigma_c^2))
double bilateral_weight(double ui, double vi, double uj, double vj,
                        const Vec3& Ii, const Vec3& Ij,
                        const SolverConfig& cfg);

// Intersection depth of the target pixel's ray with plane_j:
// d = t / (1 - a*ut - b*vt). Empty when |denominator| < eps_den or the result
// is non-positive/non-finite.
std::optional<double> propagate_depth(const SlantedPlane& plane_j,
                                      const Intrinsics& K, double u_i,
                                      double v_i, double eps_den);

// One closed-form depth update (Jacobi: reads only `state`, returns the new
// grid). Unified mode: data weight c_i, source weight c_j. Separate mode:
// data weight c_{d,i}, source weight c_{d,j} * c_{n,j}. Denominator below
// 1e-12 keeps the current depth.
ScalarGrid d_step(const SolverState& state, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg);

// One closed-form normal update at the current depth iterate. Per pixel,
// builds the 2x2 system in (a, b); data weight alpha*c_i (unified) or
// alpha*c_{n,i} (separate); structural weight c_j*w (unified) or
// c_{d,i}*c_{d,j}*w (separate). Solutions are clipped to |a|,|b| <= clip_ab
// and normalized; |det| < eps_sing keeps the current normal.
NormalGrid n_step(const SolverState& state, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg);

// Iteration driver: initializes the iterate to the anchors and repeats
// {D-step, N-step} cfg.iterations times, double-buffered (Jacobi contract:
// bit-identical results for any thread count).
//
// With cfg.evolve_trust, zero-confidence pixels participate through an
// evolving trust state: a filled pixel whose propagation support reaches
// TAU_FILL is promoted to a trusted depth source (its data anchor becomes its
// first filled value), and a pixel whose plane fit passes conditioning and
// residual gates becomes a trusted normal source. The per-iteration update
// formulas are unchanged; only the confidence-derived weights evolve. The
// normal data term always uses the INPUT conf_n.
SolveResult solve(const SolverState& anchors, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg);

// As above, invoking on_iteration(iter, depth, normal) after each iteration.
SolveResult solve(const SolverState& anchors, const NeighborhoodPattern& pattern,
                  const SolverConfig& cfg,
                  const std::function<void(int, const ScalarGrid&,
                                           const NormalGrid&)>& on_iteration);

// E_d with propagated depths frozen from `geometry` (defaults to the state's
// own depth/normal grids): alpha * sum c_i (d_i - dhat_i)^2 +
// sum_i sum_j S_j (d_i - d_{j->i})^2. Skipped propagations contribute zero.
// eval_depth lets tests evaluate the quadratic at a different depth iterate.
double energy_d(const SolverState& state, const NeighborhoodPattern& pattern,
                const SolverConfig& cfg,
                const ScalarGrid* eval_depth = nullptr);

// E_n with the algebraic plane-fit residual:
// alpha * sum c_i |(a_i,b_i)-(ahat_i,bhat_i)|^2 +
// sum_i sum_j struct_w * [a_i(p_j-p_i) + b_i(q_j-q_i) - (z_j-z_i)]^2.
double energy_n(const SolverState& state, const NeighborhoodPattern& pattern,
                const SolverConfig& cfg);

// Trust-evolution constants (documented driver policy, exposed for tests).
namespace trust {
inline constexpr double kTauFill = 0.05;      // min support to promote a fill
inline constexpr double kCondGate = 0.05;     // det >= gate * A11 * A22
inline constexpr double kResidGate = 0.05;    // fit RMS residual <= gate * z_i
inline constexpr double kRatioGuard = 8.0;    // propagated/source depth bound
inline constexpr double kPromotedWeight = 1.0;  // data weight after promotion
}  // namespace trust

}  // namespace dn
