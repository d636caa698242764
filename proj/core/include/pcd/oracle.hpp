#ifndef PCD_ORACLE_HPP
#define PCD_ORACLE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "pcd/choice_model.hpp"
#include "pcd/design_space.hpp"

namespace pcd {

struct McEstimate {
  Eigen::VectorXd p_hat;
  Eigen::VectorXd std_err;  // sqrt(p_hat (1 - p_hat) / n)
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

// Simulates the utility-maximization choice directly: part-worths are
// drawn per (attribute, level group) under dependent utilities and per
// (attribute, alternative) under independent ones, the quantitative
// part-worth per alternative, and the argmax is recorded.
//
// Sampling is split into fixed shards of 2^16 draws whose generators are
// seeded from (seed, shard index), so estimates do not depend on how the
// shards would be scheduled.  Identical seeds give bit-identical results.
// Exact utility ties (possible with shared draws) are broken uniformly at
// random among the maximizers.
McEstimate mc_preference_probs(const ChoiceSet& cs, const Beta& beta,
                               const ModelSpec& spec, std::int64_t n,
                               std::uint64_t seed);

// Central finite differences of the preference probabilities with respect
// to the mean-utility vector; step in [1e-6, 1e-3].
Eigen::MatrixXd fd_jacobian(const ChoiceSet& cs, const Beta& beta,
                            const ModelSpec& spec, double step = 2e-4);

// The uniform design listing every three-alternative choice set of the
// given comparison depth (v = 2, K <= 5).  Quantitative values z are
// attached to the alternatives when the spec declares them.
Design enumerate_orbit_design(const OrbitTriple& d, const ModelSpec& spec,
                              const std::array<double, 3>& z = {0, 0, 0});

// Paired-comparison counterpart: every ordered pair of comparison depth d.
Design enumerate_pair_orbit_design(
    int depth, const ModelSpec& spec,
    const std::optional<std::array<double, 2>>& t = std::nullopt);

// Second algebraic route to the intensity matrix, via the Moore-Penrose
// pseudo-inverse of the full singular response covariance.  Agrees with
// the reduced-category route whenever the Jacobian rows sum to zero.
Eigen::MatrixXd intensity_matrix_pinv(const ChoiceSet& cs, const Beta& beta,
                                      const ModelSpec& spec);

// A random non-degenerate model/choice-set/parameter triple for the
// structural-identity suites; drawing is fully determined by the
// generator state.
struct RandomInstance {
  ModelSpec spec;
  ChoiceSet cs;
  Beta beta;
};

RandomInstance random_instance(std::mt19937_64& rng);

}  // namespace pcd

#endif  // PCD_ORACLE_HPP
