#include "pcd/oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace pcd {

namespace {

constexpr std::int64_t kShardSize = 1 << 16;

// splitmix64 over (seed, shard) gives well-separated shard streams.
std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (shard + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

McEstimate mc_preference_probs(const ChoiceSet& cs, const Beta& beta,
                               const ModelSpec& spec, std::int64_t n,
                               std::uint64_t seed) {
  if (n < 10000) {
    throw std::invalid_argument("mc_preference_probs needs n >= 10^4");
  }
  const DiffMoments moments = diff_moments(cs, beta, spec);  // validates input
  (void)moments;

  const int m = cs.size();
  const int k_attrs = spec.n_attributes;
  const double sigma0 = std::sqrt(spec.sigma0_sq);
  const double sigma_t = std::sqrt(spec.sigma_t_sq);

  // Mean part-worths and, for dependent utilities, the level groups per
  // attribute (ascending level order fixes the draw sequence).
  std::vector<std::vector<double>> mean_pw(k_attrs,
                                           std::vector<double>(m, 0.0));
  for (int k = 0; k < k_attrs; ++k) {
    const int q = spec.n_levels - 1;
    for (int j = 0; j < m; ++j) {
      mean_pw[k][j] = effect_code(cs.alternatives[j].levels[k], spec.n_levels)
                          .dot(beta.qualitative.segment(k * q, q));
    }
  }
  std::vector<std::vector<std::vector<int>>> groups(k_attrs);
  if (spec.kind == ModelKind::kDependent) {
    for (int k = 0; k < k_attrs; ++k) {
      for (int level = 1; level <= spec.n_levels; ++level) {
        std::vector<int> g;
        for (int j = 0; j < m; ++j) {
          if (cs.alternatives[j].levels[k] == level) g.push_back(j);
        }
        if (!g.empty()) groups[k].push_back(std::move(g));
      }
    }
  }

  std::vector<std::int64_t> counts(m, 0);
  std::vector<double> u(m);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::int64_t done = 0;
  for (std::uint64_t shard = 0; done < n; ++shard) {
    std::mt19937_64 rng(shard_seed(seed, shard));
    const std::int64_t todo = std::min<std::int64_t>(kShardSize, n - done);
    for (std::int64_t s = 0; s < todo; ++s) {
      std::fill(u.begin(), u.end(), 0.0);
      for (int k = 0; k < k_attrs; ++k) {
        if (spec.kind == ModelKind::kDependent) {
          for (const auto& g : groups[k]) {
            const double draw = gauss(rng) * sigma0;
            for (int j : g) u[j] += mean_pw[k][j] + draw;
          }
        } else {
          for (int j = 0; j < m; ++j) {
            u[j] += mean_pw[k][j] + gauss(rng) * sigma0;
          }
        }
      }
      if (spec.has_quantitative) {
        for (int j = 0; j < m; ++j) {
          u[j] += *beta.quantitative * *cs.alternatives[j].t +
                  gauss(rng) * sigma_t;
        }
      }
      int argmax = 0;
      int n_ties = 1;
      for (int j = 1; j < m; ++j) {
        if (u[j] > u[argmax]) {
          argmax = j;
          n_ties = 1;
        } else if (u[j] == u[argmax]) {
          // Reservoir pick keeps the tie break uniform.
          ++n_ties;
          if (std::uniform_int_distribution<int>(1, n_ties)(rng) == 1) {
            argmax = j;
          }
        }
      }
      ++counts[argmax];
    }
    done += todo;
  }

  McEstimate est;
  est.p_hat = Eigen::VectorXd(m);
  est.std_err = Eigen::VectorXd(m);
  est.n_samples = n;
  est.seed = seed;
  for (int j = 0; j < m; ++j) {
    const double p = static_cast<double>(counts[j]) / static_cast<double>(n);
    est.p_hat(j) = p;
    est.std_err(j) = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  }
  return est;
}

Eigen::MatrixXd fd_jacobian(const ChoiceSet& cs, const Beta& beta,
                            const ModelSpec& spec, double step) {
  if (step < 1e-6 || step > 1e-3) {
    throw std::invalid_argument("fd_jacobian step must lie in [1e-6, 1e-3]");
  }
  const DiffMoments m = diff_moments(cs, beta, spec);
  if (m.degenerate()) {
    throw std::domain_error("fd_jacobian: degenerate choice set");
  }
  const int n = cs.size();
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd up = m.mu;
    Eigen::VectorXd dn = m.mu;
    up(j) += step;
    dn(j) -= step;
    J.col(j) = (detail::preference_probs_from_moments(up, m.cov_u) -
                detail::preference_probs_from_moments(dn, m.cov_u)) /
               (2.0 * step);
  }
  return J;
}

Design enumerate_orbit_design(const OrbitTriple& d, const ModelSpec& spec,
                              const std::array<double, 3>& z) {
  spec.validate();
  if (spec.n_levels != 2) {
    throw std::invalid_argument("orbit enumeration requires v = 2");
  }
  if (spec.n_attributes > 5) {
    throw std::invalid_argument("orbit enumeration is guarded to K <= 5");
  }
  if (!d.canonical() || !d.feasible() ||
      d.mean_depth() > spec.n_attributes) {
    throw std::invalid_argument("infeasible orbit depth");
  }

  const int k_attrs = spec.n_attributes;
  const auto want = d.depths();
  Design xi;
  const int n_profiles = 1 << k_attrs;
  auto profile = [&](int code) {
    std::vector<int> levels(k_attrs);
    for (int k = 0; k < k_attrs; ++k) levels[k] = ((code >> k) & 1) + 1;
    return levels;
  };
  for (int c1 = 0; c1 < n_profiles; ++c1) {
    for (int c2 = 0; c2 < n_profiles; ++c2) {
      for (int c3 = 0; c3 < n_profiles; ++c3) {
        ChoiceSet cs;
        cs.alternatives.resize(3);
        cs.alternatives[0].levels = profile(c1);
        cs.alternatives[1].levels = profile(c2);
        cs.alternatives[2].levels = profile(c3);
        if (spec.has_quantitative) {
          for (int j = 0; j < 3; ++j) cs.alternatives[j].t = z[j];
        }
        if (comparison_depth_triple(cs) == want) {
          xi.points.push_back({std::move(cs), 1.0});
        }
      }
    }
  }
  if (xi.points.empty()) {
    throw std::invalid_argument("orbit is empty for this attribute count");
  }
  for (auto& pt : xi.points) {
    pt.weight = 1.0 / static_cast<double>(xi.points.size());
  }
  return xi;
}

Eigen::MatrixXd intensity_matrix_pinv(const ChoiceSet& cs, const Beta& beta,
                                      const ModelSpec& spec) {
  const PreferenceProbs pp = preference_probs(cs, beta, spec);
  if (pp.collapsed) {
    throw std::domain_error("intensity_matrix_pinv: degenerate choice set");
  }
  const Eigen::MatrixXd J = jacobian(cs, beta, spec);
  const Eigen::MatrixXd sigma =
      Eigen::MatrixXd(pp.p.asDiagonal()) - pp.p * pp.p.transpose();
  // Moore-Penrose inverse via the spectral decomposition.  Sigma has the
  // all-ones vector in its null space analytically; in floating point that
  // eigenvalue is only ~1e-16, so a relative cutoff is needed to keep its
  // (noise-determined) eigenvector out of the inverse.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (sigma + sigma.transpose()));
  const double cutoff = 1e-12 * eig.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd inv_ev = eig.eigenvalues();
  for (Eigen::Index i = 0; i < inv_ev.size(); ++i) {
    inv_ev(i) = std::fabs(inv_ev(i)) > cutoff ? 1.0 / inv_ev(i) : 0.0;
  }
  const Eigen::MatrixXd pinv = eig.eigenvectors() *
                               inv_ev.asDiagonal() *
                               eig.eigenvectors().transpose();
  return J.transpose() * pinv * J;
}

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_k(1, 5);
  std::uniform_int_distribution<int> pick_m(2, 3);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> var(0.1, 2.0);
  std::uniform_real_distribution<double> coef(-0.8, 0.8);
  std::uniform_real_distribution<double> tval(-1.5, 1.5);

  for (;;) {
    RandomInstance inst;
    inst.spec.n_attributes = pick_k(rng);
    const int m = pick_m(rng);
    inst.spec.n_levels =
        m == 3 ? 2 : std::uniform_int_distribution<int>(2, 3)(rng);
    inst.spec.kind =
        coin(rng) ? ModelKind::kDependent : ModelKind::kIndependent;
    inst.spec.sigma0_sq = var(rng);
    inst.spec.has_quantitative = coin(rng) == 1;
    inst.spec.sigma_t_sq =
        inst.spec.has_quantitative && coin(rng) ? var(rng) : 0.0;

    std::uniform_int_distribution<int> pick_level(1, inst.spec.n_levels);
    inst.cs.alternatives.resize(m);
    for (int j = 0; j < m; ++j) {
      inst.cs.alternatives[j].levels.resize(inst.spec.n_attributes);
      for (int k = 0; k < inst.spec.n_attributes; ++k) {
        inst.cs.alternatives[j].levels[k] = pick_level(rng);
      }
      if (inst.spec.has_quantitative) inst.cs.alternatives[j].t = tval(rng);
    }

    inst.beta.qualitative = Eigen::VectorXd(inst.spec.qualitative_dim());
    for (int i = 0; i < inst.beta.qualitative.size(); ++i) {
      inst.beta.qualitative(i) = coef(rng);
    }
    if (inst.spec.has_quantitative) inst.beta.quantitative = coef(rng);

    const DiffMoments moments = diff_moments(inst.cs, inst.beta, inst.spec);
    // Keep standardized differences moderate: beyond |z| ~ 3 the smallest
    // preference probability underflows toward zero and the response
    // covariance turns numerically singular, which no evaluation route
    // can resolve at testing tolerances.
    if (!moments.degenerate() && moments.z.cwiseAbs().maxCoeff() <= 3.0) {
      return inst;
    }
  }
}

Design enumerate_pair_orbit_design(
    int depth, const ModelSpec& spec,
    const std::optional<std::array<double, 2>>& t) {
  spec.validate();
  if (depth < 0 || depth > spec.n_attributes) {
    throw std::invalid_argument("pair depth must lie in 0..K");
  }
  if (t.has_value() != spec.has_quantitative) {
    throw std::invalid_argument(
        "quantitative settings must be given iff the spec declares them");
  }
  if (spec.n_attributes * std::log2(spec.n_levels) > 16) {
    throw std::invalid_argument("pair orbit enumeration too large");
  }

  const int k_attrs = spec.n_attributes;
  const int v = spec.n_levels;
  std::vector<std::vector<int>> profiles;
  std::vector<int> cur(k_attrs, 1);
  for (;;) {
    profiles.push_back(cur);
    int k = 0;
    while (k < k_attrs && ++cur[k] > v) {
      cur[k] = 1;
      ++k;
    }
    if (k == k_attrs) break;
  }

  Design xi;
  for (const auto& p1 : profiles) {
    for (const auto& p2 : profiles) {
      int diff = 0;
      for (int k = 0; k < k_attrs; ++k) {
        if (p1[k] != p2[k]) ++diff;
      }
      if (diff != depth) continue;
      ChoiceSet cs;
      cs.alternatives.resize(2);
      cs.alternatives[0].levels = p1;
      cs.alternatives[1].levels = p2;
      if (spec.has_quantitative) {
        cs.alternatives[0].t = (*t)[0];
        cs.alternatives[1].t = (*t)[1];
      }
      xi.points.push_back({std::move(cs), 1.0});
    }
  }
  if (xi.points.empty()) {
    throw std::invalid_argument("empty pair orbit");
  }
  for (auto& pt : xi.points) {
    pt.weight = 1.0 / static_cast<double>(xi.points.size());
  }
  return xi;
}

}  // namespace pcd
