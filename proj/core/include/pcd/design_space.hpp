#ifndef PCD_DESIGN_SPACE_HPP
#define PCD_DESIGN_SPACE_HPP

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "pcd/choice_model.hpp"

namespace pcd {

struct WeightedChoiceSet {
  ChoiceSet set;
  double weight = 0.0;
};

// Approximate design: finitely many choice sets with weights summing to 1.
struct Design {
  std::vector<WeightedChoiceSet> points;

  void validate() const;
};

// Canonical comparison-depth label of a three-alternative orbit,
// d12 >= d13 >= d23.  odd_counts()[j] is the number of attributes on which
// alternative j carries the minority level; the counts determine the depth
// triple via d_ij = n_i + n_j.
struct OrbitTriple {
  int d12 = 0;
  int d13 = 0;
  int d23 = 0;

  std::array<int, 3> depths() const { return {d12, d13, d23}; }
  std::array<int, 3> odd_counts() const;
  int mean_depth() const { return (d12 + d13 + d23) / 2; }
  bool full_profile(int n_attributes) const {
    return mean_depth() == n_attributes;
  }
  bool canonical() const { return d12 >= d13 && d13 >= d23; }
  bool feasible() const;

  friend bool operator==(const OrbitTriple&, const OrbitTriple&) = default;
};

// One table row: an orbit, its optimal quantitative settings (if any),
// choice probabilities, normalized criterion and efficiency.
struct OrbitResult {
  OrbitTriple depth;
  std::optional<std::array<double, 2>> z_opt;  // z3 = 0 by convention
  Eigen::Vector3d probs = Eigen::Vector3d::Zero();
  bool collapsed_pair = false;  // two alternatives merged/dominated
  double crit = 0.0;            // sigma_max^2 * det(M)^(1/p)
  double eff = 0.0;
  bool best = false;
};

// Comparison depths of paired-comparison orbits: 1..K.
std::vector<int> enumerate_pair_depths(int n_attributes);

// All canonical feasible depth triples, in descending lexicographic order
// (the order the reference tables use).  With full_profile_only = false
// the partial-profile orbits (mean depth < K) are appended.
std::vector<OrbitTriple> enumerate_orbit_triples(int n_attributes,
                                                 bool full_profile_only = true);

// A representative choice set of the orbit: minority levels laid out
// odd-counts-first, quantitative values z (z3 = 0 convention) attached
// when the spec has a quantitative attribute.
ChoiceSet orbit_representative(const OrbitTriple& d, const ModelSpec& spec,
                               const std::array<double, 3>& z = {0, 0, 0});

// Exact information matrix of the uniform-on-orbit design (tensored with
// the one-point design at z when quantitative).  Requires qualitative
// indifference (beta1 = 0); under that invariance the orbit average is
// block diagonal and computable from one representative.
Eigen::MatrixXd orbit_information(const OrbitTriple& d, const ModelSpec& spec,
                                  const Beta& beta,
                                  const std::array<double, 3>& z = {0, 0, 0});

// Same closed form for paired-comparison orbits of depth d; the optional
// t pair attaches quantitative values.
Eigen::MatrixXd pair_orbit_information(
    int depth, const ModelSpec& spec, const Beta& beta,
    const std::optional<std::array<double, 2>>& t = std::nullopt);

// Mean intensity lambda_d: the orbit-averaged qualitative diagonal of the
// information matrix equals 4*lambda_d.
double mean_intensity(const OrbitTriple& d, const ModelSpec& spec,
                      const Beta& beta,
                      const std::array<double, 3>& z = {0, 0, 0});

// Normalized D-criterion sigma_max^2 * det(M)^(1/p); 0 for singular M.
double d_criterion(const Eigen::MatrixXd& m_mat, double sigma_max_sq);

// Weighted information sum over the design's support.
Eigen::MatrixXd design_information(const Design& xi, const Beta& beta,
                                   const ModelSpec& spec);

// Fills eff (relative to the best crit) and flags the maximizer.
void compute_efficiency(std::vector<OrbitResult>& results);

}  // namespace pcd

#endif  // PCD_DESIGN_SPACE_HPP
