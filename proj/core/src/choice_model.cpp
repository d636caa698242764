#include "pcd/choice_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pcd/normal.hpp"

namespace pcd {

namespace {

constexpr double kDegenerateVarTol = 1e-14;

void check_consistency(const ChoiceSet& cs, const Beta& beta,
                       const ModelSpec& spec) {
  spec.validate();
  const int m = cs.size();
  if (m != 2 && m != 3) {
    throw std::invalid_argument("choice set must hold 2 or 3 alternatives");
  }
  for (const auto& a : cs.alternatives) {
    if (static_cast<int>(a.levels.size()) != spec.n_attributes) {
      throw std::invalid_argument("alternative has wrong attribute count");
    }
    for (int lv : a.levels) {
      if (lv < 1 || lv > spec.n_levels) {
        throw std::invalid_argument("attribute level out of range");
      }
    }
    if (a.t.has_value() != spec.has_quantitative) {
      throw std::invalid_argument(
          "quantitative value must be present iff the spec declares one");
    }
  }
  if (beta.qualitative.size() != spec.qualitative_dim()) {
    throw std::invalid_argument("beta1 has wrong length");
  }
  if (beta.quantitative.has_value() != spec.has_quantitative) {
    throw std::invalid_argument(
        "beta2 must be present iff the spec declares a quantitative attribute");
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (n_attributes < 1) throw std::invalid_argument("K must be >= 1");
  if (n_levels < 2) throw std::invalid_argument("v must be >= 2");
  if (!(sigma0_sq > 0.0)) throw std::invalid_argument("sigma0^2 must be > 0");
  if (sigma_t_sq < 0.0) throw std::invalid_argument("sigma_t^2 must be >= 0");
}

Beta Beta::zero(const ModelSpec& spec) {
  Beta b;
  b.qualitative = Eigen::VectorXd::Zero(spec.qualitative_dim());
  if (spec.has_quantitative) b.quantitative = 0.0;
  return b;
}

Beta Beta::standardized(const ModelSpec& spec) {
  Beta b = zero(spec);
  if (!spec.has_quantitative) {
    throw std::invalid_argument(
        "standardized beta needs a quantitative attribute");
  }
  b.quantitative = 1.0;
  return b;
}

Eigen::VectorXd Beta::stacked(const ModelSpec& spec) const {
  Eigen::VectorXd full(spec.parameter_dim());
  full.head(spec.qualitative_dim()) = qualitative;
  if (spec.has_quantitative) full(spec.qualitative_dim()) = *quantitative;
  return full;
}

Eigen::VectorXd effect_code(int level, int n_levels) {
  if (level < 1 || level > n_levels) {
    throw std::invalid_argument("effect_code: level out of range");
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n_levels - 1);
  if (level < n_levels) {
    f(level - 1) = 1.0;
  } else {
    f.setConstant(-1.0);
  }
  return f;
}

Eigen::VectorXd regression_vector(const Alternative& a, const ModelSpec& spec) {
  Eigen::VectorXd f(spec.parameter_dim());
  const int step = spec.n_levels - 1;
  for (int k = 0; k < spec.n_attributes; ++k) {
    f.segment(k * step, step) = effect_code(a.levels[k], spec.n_levels);
  }
  if (spec.has_quantitative) f(spec.qualitative_dim()) = *a.t;
  return f;
}

Eigen::MatrixXd regression_matrix(const ChoiceSet& cs, const ModelSpec& spec) {
  Eigen::MatrixXd F(spec.parameter_dim(), cs.size());
  for (int j = 0; j < cs.size(); ++j) {
    F.col(j) = regression_vector(cs.alternatives[j], spec);
  }
  return F;
}

int comparison_depth(const Alternative& a, const Alternative& b) {
  if (a.levels.size() != b.levels.size()) {
    throw std::invalid_argument("comparison_depth: mismatched attribute count");
  }
  int d = 0;
  for (std::size_t k = 0; k < a.levels.size(); ++k) {
    if (a.levels[k] != b.levels[k]) ++d;
  }
  return d;
}

std::array<int, 3> comparison_depth_triple(const ChoiceSet& cs) {
  if (cs.size() != 3) {
    throw std::invalid_argument("comparison_depth_triple needs m = 3");
  }
  const auto& a = cs.alternatives;
  return {comparison_depth(a[0], a[1]), comparison_depth(a[0], a[2]),
          comparison_depth(a[1], a[2])};
}

DiffMoments diff_moments(const ChoiceSet& cs, const Beta& beta,
                         const ModelSpec& spec) {
  check_consistency(cs, beta, spec);
  const int m = cs.size();

  // Covariance of the utility vector, built attribute by attribute.  Under
  // dependent utilities alternatives sharing a level share the draw, so the
  // attribute contributes sigma0^2 to that off-diagonal entry.
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < spec.n_attributes; ++k) {
    for (int i = 0; i < m; ++i) {
      V(i, i) += spec.sigma0_sq;
      if (spec.kind == ModelKind::kDependent) {
        for (int j = i + 1; j < m; ++j) {
          if (cs.alternatives[i].levels[k] == cs.alternatives[j].levels[k]) {
            V(i, j) += spec.sigma0_sq;
            V(j, i) += spec.sigma0_sq;
          }
        }
      }
    }
  }
  if (spec.has_quantitative) {
    // The quantitative part-worths are independent in both models.
    V.diagonal().array() += spec.sigma_t_sq;
  }

  DiffMoments out;
  out.cov_u = V;
  const Eigen::MatrixXd F = regression_matrix(cs, spec);
  out.mu = F.transpose() * beta.stacked(spec);

  out.sigma_sq = Eigen::MatrixXd::Zero(m, m);
  out.z = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const double var = V(i, i) + V(j, j) - 2.0 * V(i, j);
      out.sigma_sq(i, j) = std::max(var, 0.0);
      if (out.sigma_sq(i, j) > kDegenerateVarTol) {
        out.z(i, j) = (out.mu(i) - out.mu(j)) / std::sqrt(out.sigma_sq(i, j));
      } else if (i < j) {
        out.degenerate_pairs.emplace_back(i, j);
      }
    }
  }

  if (m == 3) {
    out.rho = Eigen::VectorXd::Zero(3);
    for (int j = 0; j < 3; ++j) {
      const int i = (j + 1) % 3;
      const int l = (j + 2) % 3;
      const double cov = V(i, l) - V(i, j) - V(l, j) + V(j, j);
      const double denom =
          std::sqrt(out.sigma_sq(i, j) * out.sigma_sq(l, j));
      out.rho(j) = denom > 0.0 ? cov / denom : 1.0;
    }
  }
  return out;
}

namespace detail {

bool Collapse::trivial() const {
  return merged_groups.empty() && dominated.empty();
}

Collapse collapse_plan(const DiffMoments& m) {
  const int n = static_cast<int>(m.mu.size());
  Collapse plan;

  auto degenerate = [&](int i, int j) {
    return m.sigma_sq(std::min(i, j), std::max(i, j)) <= kDegenerateVarTol;
  };

  std::vector<int> group_of(n, -1);
  std::vector<bool> dropped(n, false);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!degenerate(i, j)) continue;
      const double mean_gap = m.mu(i) - m.mu(j);
      if (std::fabs(mean_gap) <= 1e-12) {
        // Utility-identical: keep i as the representative of the group.
        if (group_of[i] < 0) {
          group_of[i] = i;
          plan.merged_groups.push_back({i});
        }
        if (group_of[j] < 0) {
          group_of[j] = group_of[i];
          for (auto& g : plan.merged_groups) {
            if (g.front() == group_of[i]) g.push_back(j);
          }
          dropped[j] = true;
        }
      } else {
        // Deterministic difference: the smaller mean can never win.
        const int loser = mean_gap > 0.0 ? j : i;
        if (!dropped[loser]) {
          dropped[loser] = true;
          plan.dominated.push_back(loser);
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!dropped[i]) plan.kept.push_back(i);
  }
  return plan;
}

ChoiceSet reduced_set(const ChoiceSet& cs, const Collapse& plan) {
  ChoiceSet r;
  for (int idx : plan.kept) r.alternatives.push_back(cs.alternatives[idx]);
  return r;
}

Eigen::VectorXd preference_probs_from_moments(const Eigen::VectorXd& mu,
                                              const Eigen::MatrixXd& cov_u) {
  const int m = static_cast<int>(mu.size());
  Eigen::VectorXd p(m);
  if (m == 1) {
    p(0) = 1.0;
    return p;
  }
  if (m == 2) {
    const double var = cov_u(0, 0) + cov_u(1, 1) - 2.0 * cov_u(0, 1);
    if (var <= kDegenerateVarTol) {
      throw std::domain_error("degenerate pair reached probability kernel");
    }
    const double z = (mu(0) - mu(1)) / std::sqrt(var);
    p(0) = std_normal_cdf(z);
    p(1) = std_normal_sf(z);
    return p;
  }
  for (int j = 0; j < 3; ++j) {
    const int i = (j + 1) % 3;
    const int l = (j + 2) % 3;
    const double var_ij = cov_u(i, i) + cov_u(j, j) - 2.0 * cov_u(i, j);
    const double var_lj = cov_u(l, l) + cov_u(j, j) - 2.0 * cov_u(l, j);
    if (var_ij <= kDegenerateVarTol || var_lj <= kDegenerateVarTol) {
      throw std::domain_error("degenerate triple reached probability kernel");
    }
    const double cov =
        cov_u(i, l) - cov_u(i, j) - cov_u(l, j) + cov_u(j, j);
    const double rho = cov / std::sqrt(var_ij * var_lj);
    const double zji = (mu(j) - mu(i)) / std::sqrt(var_ij);
    const double zjl = (mu(j) - mu(l)) / std::sqrt(var_lj);
    p(j) = bvn_cdf(zji, zjl, Correlation(rho));
  }
  return p;
}

}  // namespace detail

PreferenceProbs preference_probs(const ChoiceSet& cs, const Beta& beta,
                                 const ModelSpec& spec) {
  const DiffMoments m = diff_moments(cs, beta, spec);
  PreferenceProbs out;
  out.p = Eigen::VectorXd::Zero(cs.size());

  if (!m.degenerate()) {
    out.p = detail::preference_probs_from_moments(m.mu, m.cov_u);
    return out;
  }

  const detail::Collapse plan = detail::collapse_plan(m);
  out.collapsed = true;
  out.merged_groups = plan.merged_groups;
  out.dominated = plan.dominated;

  const ChoiceSet reduced = detail::reduced_set(cs, plan);
  if (reduced.size() == 1) {
    out.p(plan.kept.front()) = 1.0;
  } else {
    const DiffMoments rm = diff_moments(reduced, beta, spec);
    if (rm.degenerate()) {
      throw std::domain_error("collapse left a degenerate choice set");
    }
    const Eigen::VectorXd rp =
        detail::preference_probs_from_moments(rm.mu, rm.cov_u);
    for (std::size_t r = 0; r < plan.kept.size(); ++r) {
      out.p(plan.kept[r]) = rp(static_cast<int>(r));
    }
  }
  // A merged group's members are indistinguishable, so its probability is
  // shared equally among them.
  for (const auto& g : plan.merged_groups) {
    const double share = out.p(g.front()) / static_cast<double>(g.size());
    for (int idx : g) out.p(idx) = share;
  }
  return out;
}

Eigen::MatrixXd jacobian(const ChoiceSet& cs, const Beta& beta,
                         const ModelSpec& spec) {
  const DiffMoments m = diff_moments(cs, beta, spec);
  if (m.degenerate()) {
    throw std::domain_error(
        "jacobian: choice set has a zero-variance utility difference; "
        "collapse it first");
  }
  const int n = cs.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  if (n == 2) {
    const double h = std_normal_pdf(m.z(0, 1)) / std::sqrt(m.sigma_sq(0, 1));
    J(0, 0) = h;
    J(0, 1) = -h;
    J(1, 0) = -h;
    J(1, 1) = h;
    return J;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const int l = 3 - i - j;
      const double rho = m.rho(i);
      if (std::fabs(rho) >= 1.0) {
        throw std::domain_error(
            "jacobian: |rho| = 1 requires collapsing the choice set");
      }
      const double h =
          std_normal_pdf(m.z(i, j)) *
          std_normal_cdf((m.z(i, l) - rho * m.z(i, j)) /
                         std::sqrt(1.0 - rho * rho)) /
          std::sqrt(m.sigma_sq(i, j));
      J(i, j) = -h;
      J(i, i) += h;
    }
  }
  return J;
}

namespace {

Eigen::MatrixXd intensity_from_parts(const Eigen::VectorXd& p,
                                     const Eigen::MatrixXd& J) {
  const int n = static_cast<int>(p.size());
  for (int j = 0; j < n; ++j) {
    if (p(j) <= 0.0 || p(j) >= 1.0) {
      throw std::domain_error(
          "intensity_matrix: a preference probability hit {0,1}; the "
          "information is unbounded");
    }
  }
  // Drop the last response category; the remaining covariance is regular.
  const Eigen::MatrixXd Jr = J.topRows(n - 1);
  const Eigen::VectorXd pr = p.head(n - 1);
  const Eigen::MatrixXd sigma_r =
      Eigen::MatrixXd(pr.asDiagonal()) - pr * pr.transpose();
  return Jr.transpose() * sigma_r.inverse() * Jr;
}

}  // namespace

Eigen::MatrixXd intensity_matrix(const ChoiceSet& cs, const Beta& beta,
                                 const ModelSpec& spec) {
  const DiffMoments m = diff_moments(cs, beta, spec);
  if (!m.degenerate()) {
    const Eigen::VectorXd p =
        detail::preference_probs_from_moments(m.mu, m.cov_u);
    return intensity_from_parts(p, jacobian(cs, beta, spec));
  }

  const detail::Collapse plan = detail::collapse_plan(m);
  const ChoiceSet reduced = detail::reduced_set(cs, plan);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(cs.size(), cs.size());
  if (reduced.size() < 2) return lambda;  // nothing left to compare

  const Eigen::MatrixXd lr = intensity_matrix(reduced, beta, spec);
  for (std::size_t a = 0; a < plan.kept.size(); ++a) {
    for (std::size_t b = 0; b < plan.kept.size(); ++b) {
      lambda(plan.kept[a], plan.kept[b]) =
          lr(static_cast<int>(a), static_cast<int>(b));
    }
  }
  return lambda;
}

Eigen::MatrixXd information_matrix(const ChoiceSet& cs, const Beta& beta,
                                   const ModelSpec& spec) {
  const DiffMoments m = diff_moments(cs, beta, spec);
  if (!m.degenerate()) {
    const Eigen::MatrixXd F = regression_matrix(cs, spec);
    return F * intensity_matrix(cs, beta, spec) * F.transpose();
  }
  const detail::Collapse plan = detail::collapse_plan(m);
  const ChoiceSet reduced = detail::reduced_set(cs, plan);
  if (reduced.size() < 2) {
    const int p = spec.parameter_dim();
    return Eigen::MatrixXd::Zero(p, p);
  }
  return information_matrix(reduced, beta, spec);
}

}  // namespace pcd
