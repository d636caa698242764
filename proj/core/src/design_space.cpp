#include "pcd/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcd/normal.hpp"

namespace pcd {

namespace {

void require_indifferent_qualitative(const Beta& beta) {
  if (!beta.qualitative.isZero(0.0)) {
    throw std::invalid_argument(
        "orbit averaging is only exact under qualitative indifference "
        "(beta1 = 0)");
  }
}

void require_binary_triple_spec(const ModelSpec& spec) {
  spec.validate();
  if (spec.n_levels != 2) {
    throw std::invalid_argument(
        "three-alternative orbits require v = 2 levels per attribute");
  }
}

// Marginal information of the uniform single-attribute paired design:
// M* = 2/(v-1) (I + 11'); equals the scalar 4 for v = 2.
Eigen::MatrixXd marginal_pair_information(int n_levels) {
  const int q = n_levels - 1;
  return 2.0 / q *
         (Eigen::MatrixXd::Identity(q, q) + Eigen::MatrixXd::Ones(q, q));
}

struct OrbitIntensity {
  double lambda_d = 0.0;   // orbit-averaged qualitative intensity
  double m_quant = 0.0;    // quantitative entry t' Lambda t
};

// Shared kernel of orbit_information / mean_intensity: the 3x3 intensity
// of one representative (collapsed if needed) reduced to the two scalars
// that survive orbit averaging.
OrbitIntensity orbit_intensity(const OrbitTriple& d, const ModelSpec& spec,
                               const Beta& beta,
                               const std::array<double, 3>& z) {
  require_binary_triple_spec(spec);
  require_indifferent_qualitative(beta);
  if (!d.canonical() || !d.feasible()) {
    throw std::invalid_argument("orbit depth must be canonical and feasible");
  }
  if (d.mean_depth() > spec.n_attributes) {
    throw std::invalid_argument("orbit mean depth exceeds attribute count");
  }

  const ChoiceSet rep = orbit_representative(d, spec, z);
  const DiffMoments moments = diff_moments(rep, beta, spec);
  const auto n = d.odd_counts();

  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(3, 3);
  if (!moments.degenerate()) {
    lambda = intensity_matrix(rep, beta, spec);
  } else {
    const detail::Collapse plan = detail::collapse_plan(moments);
    const ChoiceSet reduced = detail::reduced_set(rep, plan);
    if (reduced.size() == 2) {
      const Eigen::MatrixXd lr = intensity_matrix(reduced, beta, spec);
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          lambda(plan.kept[a], plan.kept[b]) = lr(a, b);
        }
      }
    }
    // reduced.size() < 2 leaves Lambda = 0: no comparison left.
  }

  OrbitIntensity out;
  for (int j = 0; j < 3; ++j) {
    out.lambda_d += n[j] * lambda(j, j);
  }
  out.lambda_d /= spec.n_attributes;
  if (spec.has_quantitative) {
    const Eigen::Vector3d t(z[0], z[1], z[2]);
    out.m_quant = t.transpose() * lambda * t;
  }
  return out;
}

}  // namespace

void Design::validate() const {
  if (points.empty()) throw std::invalid_argument("design has no support");
  double total = 0.0;
  for (const auto& pt : points) {
    if (pt.weight < 0.0) throw std::invalid_argument("negative design weight");
    total += pt.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("design weights must sum to 1");
  }
}

std::array<int, 3> OrbitTriple::odd_counts() const {
  return {(d12 + d13 - d23) / 2, (d12 + d23 - d13) / 2,
          (d13 + d23 - d12) / 2};
}

bool OrbitTriple::feasible() const {
  if (d12 < 0 || d13 < 0 || d23 < 0) return false;
  if ((d12 + d13 + d23) % 2 != 0) return false;
  const auto n = odd_counts();
  return n[0] >= 0 && n[1] >= 0 && n[2] >= 0;
}

std::vector<int> enumerate_pair_depths(int n_attributes) {
  if (n_attributes < 1) throw std::invalid_argument("K must be >= 1");
  std::vector<int> depths(n_attributes);
  for (int d = 1; d <= n_attributes; ++d) depths[d - 1] = d;
  return depths;
}

std::vector<OrbitTriple> enumerate_orbit_triples(int n_attributes,
                                                 bool full_profile_only) {
  if (n_attributes < 1) throw std::invalid_argument("K must be >= 1");
  std::vector<OrbitTriple> orbits;
  // Partitions D = n1 + n2 + n3 with n1 >= n2 >= n3 >= 0; the block for
  // each D is sorted descending-lexicographically in the depth triple,
  // which is the reference-table row order.
  auto emit_partitions = [&orbits](int depth_sum) {
    std::vector<OrbitTriple> block;
    for (int n1 = depth_sum; n1 >= (depth_sum + 2) / 3; --n1) {
      for (int n2 = std::min(n1, depth_sum - n1); n2 >= (depth_sum - n1 + 1) / 2;
           --n2) {
        const int n3 = depth_sum - n1 - n2;
        block.push_back(OrbitTriple{n1 + n2, n1 + n3, n2 + n3});
      }
    }
    std::sort(block.begin(), block.end(),
              [](const OrbitTriple& a, const OrbitTriple& b) {
                return a.depths() > b.depths();
              });
    orbits.insert(orbits.end(), block.begin(), block.end());
  };
  emit_partitions(n_attributes);
  if (!full_profile_only) {
    for (int depth_sum = n_attributes - 1; depth_sum >= 1; --depth_sum) {
      emit_partitions(depth_sum);
    }
  }
  return orbits;
}

ChoiceSet orbit_representative(const OrbitTriple& d, const ModelSpec& spec,
                               const std::array<double, 3>& z) {
  require_binary_triple_spec(spec);
  if (!d.canonical() || !d.feasible()) {
    throw std::invalid_argument("orbit depth must be canonical and feasible");
  }
  const auto n = d.odd_counts();
  if (n[0] + n[1] + n[2] > spec.n_attributes) {
    throw std::invalid_argument("orbit mean depth exceeds attribute count");
  }
  ChoiceSet cs;
  cs.alternatives.resize(3);
  for (int j = 0; j < 3; ++j) {
    cs.alternatives[j].levels.assign(spec.n_attributes, 1);
    if (spec.has_quantitative) cs.alternatives[j].t = z[j];
  }
  int attr = 0;
  for (int j = 0; j < 3; ++j) {
    for (int c = 0; c < n[j]; ++c) {
      cs.alternatives[j].levels[attr++] = 2;
    }
  }
  return cs;
}

Eigen::MatrixXd orbit_information(const OrbitTriple& d, const ModelSpec& spec,
                                  const Beta& beta,
                                  const std::array<double, 3>& z) {
  const OrbitIntensity oi = orbit_intensity(d, spec, beta, z);
  const int p = spec.parameter_dim();
  Eigen::MatrixXd m_mat = Eigen::MatrixXd::Zero(p, p);
  m_mat.topLeftCorner(spec.n_attributes, spec.n_attributes) =
      4.0 * oi.lambda_d *
      Eigen::MatrixXd::Identity(spec.n_attributes, spec.n_attributes);
  if (spec.has_quantitative) m_mat(p - 1, p - 1) = oi.m_quant;
  return m_mat;
}

Eigen::MatrixXd pair_orbit_information(
    int depth, const ModelSpec& spec, const Beta& beta,
    const std::optional<std::array<double, 2>>& t) {
  spec.validate();
  require_indifferent_qualitative(beta);
  if (depth < 0 || depth > spec.n_attributes) {
    throw std::invalid_argument("pair depth must lie in 0..K");
  }
  if (t.has_value() != spec.has_quantitative) {
    throw std::invalid_argument(
        "quantitative settings must be given iff the spec declares them");
  }

  const double sigma_sq =
      spec.kind == ModelKind::kIndependent
          ? spec.sigma_max_sq()
          : 2.0 * (depth * spec.sigma0_sq + spec.sigma_t_sq);

  const int p = spec.parameter_dim();
  Eigen::MatrixXd m_mat = Eigen::MatrixXd::Zero(p, p);
  if (sigma_sq <= 0.0) return m_mat;  // identical alternatives, no information

  double t_diff = 0.0;
  if (spec.has_quantitative) {
    t_diff = ((*t)[0] - (*t)[1]) * beta.quantitative.value();
  }
  const double zval = t_diff / std::sqrt(sigma_sq);
  const double lambda = intensity_lambda2(zval) / sigma_sq;

  const Eigen::MatrixXd m_star = marginal_pair_information(spec.n_levels);
  const double frac = static_cast<double>(depth) / spec.n_attributes;
  const int q = spec.n_levels - 1;
  for (int k = 0; k < spec.n_attributes; ++k) {
    m_mat.block(k * q, k * q, q, q) = frac * lambda * m_star;
  }
  if (spec.has_quantitative) {
    const double dt = (*t)[0] - (*t)[1];
    m_mat(p - 1, p - 1) = dt * dt * lambda;
  }
  return m_mat;
}

double mean_intensity(const OrbitTriple& d, const ModelSpec& spec,
                      const Beta& beta, const std::array<double, 3>& z) {
  return orbit_intensity(d, spec, beta, z).lambda_d;
}

double d_criterion(const Eigen::MatrixXd& m_mat, double sigma_max_sq) {
  if (m_mat.rows() != m_mat.cols() || m_mat.rows() == 0) {
    throw std::invalid_argument("d_criterion needs a square matrix");
  }
  const double det = m_mat.determinant();
  if (!(det > 0.0)) return 0.0;
  return sigma_max_sq *
         std::pow(det, 1.0 / static_cast<double>(m_mat.rows()));
}

Eigen::MatrixXd design_information(const Design& xi, const Beta& beta,
                                   const ModelSpec& spec) {
  xi.validate();
  const int p = spec.parameter_dim();
  Eigen::MatrixXd m_mat = Eigen::MatrixXd::Zero(p, p);
  for (const auto& pt : xi.points) {
    m_mat += pt.weight * information_matrix(pt.set, beta, spec);
  }
  return m_mat;
}

void compute_efficiency(std::vector<OrbitResult>& results) {
  if (results.empty()) {
    throw std::invalid_argument("compute_efficiency: empty result list");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].crit > results[best].crit) best = i;
  }
  const double top = results[best].crit;
  for (auto& r : results) {
    r.eff = top > 0.0 ? r.crit / top : 0.0;
    r.best = false;
  }
  results[best].best = true;
}

}  // namespace pcd
