#ifndef PCD_OPTIMIZE_HPP
#define PCD_OPTIMIZE_HPP

#include <vector>

#include "pcd/choice_model.hpp"
#include "pcd/design_space.hpp"

namespace pcd {

struct ZStarResult {
  double z_star = 0.0;    // positive maximizer of lambda2(z)^p z^2
  double p_star = 0.0;    // Phi(z_star)
  double exponent = 0.0;  // the power p
  double criterion = 0.0; // lambda2(z*)^p z*^2
};

// Maximizes lambda2(z)^p z^2 over z > 0 (golden section on the
// log-criterion plus one parabolic refinement); |delta z| <= 1e-6.
ZStarResult optimize_zstar(double exponent);

// General-equivalence certificate for the weighted-moment criterion:
//   psi2(z) = lambda2(z) (z^2/m2* + (p-1)/m0*) - p
// must be <= 0 everywhere with equality at +-z*.
struct EquivalenceCertificate {
  double z_star = 0.0;
  double exponent = 0.0;
  double grid_lo = 0.0;
  double grid_hi = 0.0;
  int grid_points = 0;
  double psi_max = 0.0;       // max over the grid
  double psi_at_zstar = 0.0;
  double psi_at_neg_zstar = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

EquivalenceCertificate equivalence_check(double z_star, double exponent,
                                         double grid_lo = -10.0,
                                         double grid_hi = 10.0,
                                         int grid_points = 4001,
                                         double tolerance = 1e-6);

// D-optimal paired-comparison design.  With a quantitative attribute this
// is the product of the uniform full-depth qualitative design with the
// conditional quantitative settings
//   t1*(x) - t2*(x) = (sigma_max z* - f1~(x)' beta1) / beta2,
// which realize preference probability Phi(z*) at every support pair.
// Without one, it is the uniform full-depth design (indifference only).
struct PairedDesignResult {
  Design design;
  double z_star = 0.0;
  double p_star = 0.0;         // realized preference probability
  double sigma_max = 0.0;
  double exponent = 0.0;
};

PairedDesignResult paired_optimal_design(const ModelSpec& spec,
                                         const Beta& beta);

// Maximizes det of the orbit-uniform-times-one-point information over
// (z1, z2) for the standardized two-component model; multi-start
// Nelder-Mead over a fixed 3x3 grid on [-2,2]^2, ties resolved toward
// smaller |z2| then smaller |z1|.  The degenerate orbit (K,K,0) under
// dependent utilities with sharp decision collapses to the paired
// 1D problem.
OrbitResult optimize_orbit_quantitative(const OrbitTriple& d,
                                        const ModelSpec& spec);

struct SweepConfig {
  int n_attributes = 2;
  ModelKind kind = ModelKind::kDependent;
  double sigma0_sq = 0.25;   // rescaled internally so sigma_max = 1
  double sigma_t_sq = 0.0;
  bool quantitative = false; // optimize (z1,z2) per orbit when true
  bool include_partial_profiles = false;
  int max_attributes = 12;   // runtime guard
};

// One OrbitResult per canonical orbit, efficiencies normalized to the
// best, best orbit flagged.  Deterministic: fixed start grids, no RNG.
std::vector<OrbitResult> sweep_orbits(const SweepConfig& cfg);

}  // namespace pcd

#endif  // PCD_OPTIMIZE_HPP
