#ifndef PCD_CHOICE_MODEL_HPP
#define PCD_CHOICE_MODEL_HPP

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

namespace pcd {

// Utility dependence across alternatives.
//
// Independent: every part-worth utility is drawn independently (the
// standard multinomial probit).  Dependent: alternatives presenting the
// same level of an attribute share that attribute's part-worth draw, so
// equal levels contribute nothing to the comparison.
enum class ModelKind { kIndependent, kDependent };

struct ModelSpec {
  ModelKind kind = ModelKind::kDependent;
  int n_attributes = 1;       // K >= 1 qualitative attributes
  int n_levels = 2;           // v >= 2 levels per attribute
  double sigma0_sq = 0.5;     // part-worth variance, > 0
  double sigma_t_sq = 0.0;    // quantitative part-worth variance, >= 0
  bool has_quantitative = false;

  int qualitative_dim() const { return n_attributes * (n_levels - 1); }
  int parameter_dim() const {
    return qualitative_dim() + (has_quantitative ? 1 : 0);
  }
  // Largest utility-difference variance, attained at full comparison depth.
  double sigma_max_sq() const {
    return 2.0 * (n_attributes * sigma0_sq + sigma_t_sq);
  }

  void validate() const;
};

struct Alternative {
  std::vector<int> levels;       // length K, entries in 1..v
  std::optional<double> t;       // present iff spec.has_quantitative
};

struct ChoiceSet {
  std::vector<Alternative> alternatives;  // m in {2,3}

  int size() const { return static_cast<int>(alternatives.size()); }
};

struct Beta {
  Eigen::VectorXd qualitative;       // length K(v-1)
  std::optional<double> quantitative;

  static Beta zero(const ModelSpec& spec);
  // beta1 = 0, beta2 = 1: the canonical form every sweep runs in.
  static Beta standardized(const ModelSpec& spec);

  Eigen::VectorXd stacked(const ModelSpec& spec) const;
};

// First and second moments of the pairwise utility differences.
struct DiffMoments {
  Eigen::MatrixXd cov_u;      // m x m covariance of (U_1..U_m)
  Eigen::MatrixXd sigma_sq;   // m x m, Var(U_i - U_j), zero diagonal
  Eigen::MatrixXd z;          // standardized mean differences, z_ij = -z_ji
  Eigen::VectorXd rho;        // m=3 only: rho_j = corr(U_i-U_j, U_l-U_j)
  Eigen::VectorXd mu;         // mean utilities F' beta
  std::vector<std::pair<int, int>> degenerate_pairs;  // sigma_ij = 0

  bool degenerate() const { return !degenerate_pairs.empty(); }
};

// Preference probabilities plus the bookkeeping of the collapse rule:
// alternatives that are utility-identical are merged (their probability is
// split equally afterwards) and deterministically dominated alternatives
// get probability zero.
struct PreferenceProbs {
  Eigen::VectorXd p;
  std::vector<std::vector<int>> merged_groups;  // indices sharing one draw
  std::vector<int> dominated;                   // indices with p = 0
  bool collapsed = false;
};

// Effect coding: unit vector for level < v, all -1 for level v.
Eigen::VectorXd effect_code(int level, int n_levels);

// Stacked per-attribute effect codes, with t appended when present.
Eigen::VectorXd regression_vector(const Alternative& a, const ModelSpec& spec);

// p x m matrix whose columns are the regression vectors of the set.
Eigen::MatrixXd regression_matrix(const ChoiceSet& cs, const ModelSpec& spec);

// Number of qualitative attributes on which the two alternatives differ.
int comparison_depth(const Alternative& a, const Alternative& b);

// Pairwise depths (d12, d13, d23) of a three-alternative set.
std::array<int, 3> comparison_depth_triple(const ChoiceSet& cs);

DiffMoments diff_moments(const ChoiceSet& cs, const Beta& beta,
                         const ModelSpec& spec);

PreferenceProbs preference_probs(const ChoiceSet& cs, const Beta& beta,
                                 const ModelSpec& spec);

// m x m Jacobian dp/dmu of the preference probabilities with respect to
// the mean utilities.  Rows sum to zero.  Throws on degenerate sets.
Eigen::MatrixXd jacobian(const ChoiceSet& cs, const Beta& beta,
                         const ModelSpec& spec);

// Intensity matrix Lambda = J' Sigma^- J, computed by dropping one
// response category and inverting the reduced covariance.  Symmetric,
// positive semidefinite, rows sum to zero.  Degenerate sets are collapsed
// to their distinct alternatives first.
Eigen::MatrixXd intensity_matrix(const ChoiceSet& cs, const Beta& beta,
                                 const ModelSpec& spec);

// Fisher information M = F Lambda F' of a single choice set.
Eigen::MatrixXd information_matrix(const ChoiceSet& cs, const Beta& beta,
                                   const ModelSpec& spec);

namespace detail {

// Probabilities as a function of the mean-utility vector for a fixed
// covariance; exposed so finite-difference oracles can perturb mu.
Eigen::VectorXd preference_probs_from_moments(const Eigen::VectorXd& mu,
                                              const Eigen::MatrixXd& cov_u);

// Collapse plan for a degenerate set: which alternatives survive, which
// are merged into a kept representative, which are dominated.
struct Collapse {
  std::vector<int> kept;                        // surviving indices
  std::vector<std::vector<int>> merged_groups;  // groups incl. representative
  std::vector<int> dominated;
  bool trivial() const;
};

Collapse collapse_plan(const DiffMoments& m);

ChoiceSet reduced_set(const ChoiceSet& cs, const Collapse& plan);

}  // namespace detail

}  // namespace pcd

#endif  // PCD_CHOICE_MODEL_HPP
