#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pcd/choice_model.hpp"
#include "pcd/design_space.hpp"
#include "pcd/normal.hpp"
#include "pcd/oracle.hpp"

using namespace pcd;

namespace {

ModelSpec binary_spec(ModelKind kind, int k_attrs, double sigma0_sq,
                      bool quant = false, double sigma_t_sq = 0.0) {
  ModelSpec spec;
  spec.kind = kind;
  spec.n_attributes = k_attrs;
  spec.n_levels = 2;
  spec.sigma0_sq = sigma0_sq;
  spec.sigma_t_sq = sigma_t_sq;
  spec.has_quantitative = quant;
  return spec;
}

ChoiceSet triple(std::vector<std::vector<int>> levels) {
  ChoiceSet cs;
  for (auto& lv : levels) {
    cs.alternatives.push_back(Alternative{std::move(lv), std::nullopt});
  }
  return cs;
}

}  // namespace

TEST_CASE("effect coding") {
  CHECK(effect_code(1, 2)(0) == 1.0);
  CHECK(effect_code(2, 2)(0) == -1.0);
  const Eigen::VectorXd last = effect_code(3, 3);
  CHECK(last(0) == -1.0);
  CHECK(last(1) == -1.0);
  CHECK(effect_code(2, 3)(1) == 1.0);
  CHECK(effect_code(2, 3)(0) == 0.0);
  CHECK_THROWS_AS(effect_code(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(effect_code(4, 3), std::invalid_argument);
}

TEST_CASE("regression vectors stack effect codes and the quantitative value") {
  {
    const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 1.0);
    const Eigen::VectorXd f =
        regression_vector(Alternative{{1, 2}, std::nullopt}, spec);
    CHECK(f.size() == 2);
    CHECK(f(0) == 1.0);
    CHECK(f(1) == -1.0);
  }
  {
    const ModelSpec spec = binary_spec(ModelKind::kDependent, 1, 1.0, true);
    const Eigen::VectorXd f = regression_vector(Alternative{{1}, 0.7}, spec);
    CHECK(f.size() == 2);
    CHECK(f(0) == 1.0);
    CHECK(f(1) == 0.7);
  }
  {
    const ModelSpec spec = binary_spec(ModelKind::kDependent, 3, 1.0);
    const Eigen::VectorXd f =
        regression_vector(Alternative{{2, 2, 2}, std::nullopt}, spec);
    CHECK(f == Eigen::VectorXd::Constant(3, -1.0));
  }
}

TEST_CASE("comparison depth") {
  const Alternative a{{1, 1}, std::nullopt};
  const Alternative b{{2, 2}, std::nullopt};
  CHECK(comparison_depth(a, b) == 2);
  CHECK(comparison_depth(a, a) == 0);
  const ChoiceSet cs = triple({{1, 1}, {2, 2}, {1, 2}});
  const auto d = comparison_depth_triple(cs);
  CHECK(d[0] == 2);
  CHECK(d[1] == 1);
  CHECK(d[2] == 1);
}

TEST_CASE("difference moments: dependent pair, zero depth is degenerate") {
  const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 1.0);
  ChoiceSet cs;
  cs.alternatives = {Alternative{{1, 2}, std::nullopt},
                     Alternative{{1, 2}, std::nullopt}};
  const DiffMoments m = diff_moments(cs, Beta::zero(spec), spec);
  CHECK(m.degenerate());
  CHECK(m.sigma_sq(0, 1) == 0.0);
}

TEST_CASE("difference moments: dependent triple correlations") {
  const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 0.25);
  // depth (2,1,1)
  const ChoiceSet cs = triple({{2, 1}, {1, 2}, {1, 1}});
  const auto d = comparison_depth_triple(cs);
  REQUIRE(d == std::array<int, 3>{2, 1, 1});
  const DiffMoments m = diff_moments(cs, Beta::zero(spec), spec);
  CHECK(m.rho(0) == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-12));
  CHECK(m.rho(1) == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-12));
  CHECK(m.rho(2) == doctest::Approx(0.0).epsilon(1e-12));
  // sigma_ij^2 = d_ij sigma_max^2 / K with sigma_max^2 = 2K sigma0^2 = 1.
  CHECK(m.sigma_sq(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.sigma_sq(0, 2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("difference moments: independent triple") {
  const ModelSpec spec =
      binary_spec(ModelKind::kIndependent, 3, 0.4, true, 0.3);
  ChoiceSet cs = triple({{1, 1, 1}, {2, 2, 1}, {1, 2, 2}});
  for (int j = 0; j < 3; ++j) cs.alternatives[j].t = 0.2 * j;
  Beta beta = Beta::zero(spec);
  beta.quantitative = 0.5;
  const DiffMoments m = diff_moments(cs, beta, spec);
  const double expected = 2.0 * (3 * 0.4 + 0.3);
  for (int i = 0; i < 3; ++i) {
    CHECK(m.rho(i) == doctest::Approx(0.5).epsilon(1e-12));
    for (int j = 0; j < 3; ++j) {
      if (i != j) {
        CHECK(m.sigma_sq(i, j) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("difference moments match the two-component closed forms") {
  // Dependent utilities with a quantitative attribute:
  //   sigma_ij^2 = (d_ij sigma_max^2 + 2 (K - d_ij) sigma_t^2) / K
  //   rho_j = ((K - d_il) sigma_max^2 - (K - 2 d_il) sigma_t^2)
  //           / (K sigma_ij sigma_jl)
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> var(0.05, 1.5);
  for (int c = 0; c < 50; ++c) {
    const int k_attrs = std::uniform_int_distribution<int>(2, 6)(rng);
    ModelSpec spec = binary_spec(ModelKind::kDependent, k_attrs, var(rng),
                                 true, var(rng));
    const auto orbits = enumerate_orbit_triples(k_attrs);
    const OrbitTriple d =
        orbits[std::uniform_int_distribution<std::size_t>(
            0, orbits.size() - 1)(rng)];
    ChoiceSet cs = orbit_representative(d, spec, {0.3, -0.1, 0.0});
    const DiffMoments m = diff_moments(cs, Beta::standardized(spec), spec);
    const double smax_sq = spec.sigma_max_sq();
    const auto depths = comparison_depth_triple(cs);
    auto depth_of = [&](int i, int j) {
      if ((i == 0 && j == 1) || (i == 1 && j == 0)) return depths[0];
      if ((i == 0 && j == 2) || (i == 2 && j == 0)) return depths[1];
      return depths[2];
    };
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        const double want =
            (depth_of(i, j) * smax_sq +
             2.0 * (k_attrs - depth_of(i, j)) * spec.sigma_t_sq) /
            k_attrs;
        CHECK(m.sigma_sq(i, j) == doctest::Approx(want).epsilon(1e-10));
      }
    }
    for (int j = 0; j < 3; ++j) {
      const int i = (j + 1) % 3;
      const int l = (j + 2) % 3;
      const double want =
          ((k_attrs - depth_of(i, l)) * smax_sq -
           (k_attrs - 2.0 * depth_of(i, l)) * spec.sigma_t_sq) /
          (k_attrs * std::sqrt(m.sigma_sq(i, j) * m.sigma_sq(l, j)));
      CHECK(m.rho(j) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("preference probabilities at indifference") {
  {
    const ModelSpec spec = binary_spec(ModelKind::kIndependent, 2, 0.25);
    const ChoiceSet cs = triple({{2, 1}, {1, 2}, {1, 1}});
    const PreferenceProbs pp = preference_probs(cs, Beta::zero(spec), spec);
    for (int j = 0; j < 3; ++j) {
      CHECK(pp.p(j) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  }
  {
    const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 0.25);
    const ChoiceSet cs = triple({{2, 1}, {1, 2}, {1, 1}});
    const PreferenceProbs pp = preference_probs(cs, Beta::zero(spec), spec);
    CHECK(pp.p(0) == doctest::Approx(0.375).epsilon(1e-10));
    CHECK(pp.p(1) == doctest::Approx(0.375).epsilon(1e-10));
    CHECK(pp.p(2) == doctest::Approx(0.250).epsilon(1e-10));
  }
  {
    const ModelSpec spec = binary_spec(ModelKind::kDependent, 3, 0.25);
    const ChoiceSet cs = triple({{2, 2, 1}, {1, 1, 2}, {1, 1, 1}});
    REQUIRE(comparison_depth_triple(cs) == std::array<int, 3>{3, 2, 1});
    // (2,2,2) representative: all pairwise depths 2.
    const ChoiceSet balanced = triple({{2, 1, 1}, {1, 2, 1}, {1, 1, 2}});
    REQUIRE(comparison_depth_triple(balanced) == std::array<int, 3>{2, 2, 2});
    const PreferenceProbs pp =
        preference_probs(balanced, Beta::zero(spec), spec);
    for (int j = 0; j < 3; ++j) {
      CHECK(pp.p(j) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("preference probabilities sum to one on random instances") {
  std::mt19937_64 rng(2024);
  for (int c = 0; c < 200; ++c) {
    const RandomInstance inst = random_instance(rng);
    const PreferenceProbs pp =
        preference_probs(inst.cs, inst.beta, inst.spec);
    CHECK(std::fabs(pp.p.sum() - 1.0) < 1e-10);
    CHECK(pp.p.minCoeff() >= 0.0);
  }
}

TEST_CASE("degenerate sets collapse with an equal split") {
  const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 0.25);
  const ChoiceSet cs = triple({{2, 2}, {1, 1}, {1, 1}});
  const PreferenceProbs pp = preference_probs(cs, Beta::zero(spec), spec);
  CHECK(pp.collapsed);
  REQUIRE(pp.merged_groups.size() == 1);
  CHECK(pp.merged_groups[0] == std::vector<int>{1, 2});
  CHECK(pp.p(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pp.p(1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(pp.p(2) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("dominated duplicates get probability zero") {
  ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 0.25, true, 0.0);
  ChoiceSet cs = triple({{2, 2}, {1, 1}, {1, 1}});
  cs.alternatives[0].t = 0.0;
  cs.alternatives[1].t = 0.4;  // dominates its duplicate
  cs.alternatives[2].t = 0.0;
  const Beta beta = Beta::standardized(spec);
  const PreferenceProbs pp = preference_probs(cs, beta, spec);
  CHECK(pp.collapsed);
  CHECK(pp.dominated == std::vector<int>{2});
  CHECK(pp.p(2) == 0.0);
  // Remaining pair: depth 2, sigma^2 = 1, mean gap -0.4.
  CHECK(pp.p(0) ==
        doctest::Approx(double(std_normal_cdf(-0.4))).epsilon(1e-12));
  CHECK(pp.p.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("jacobian closed form at independence and indifference") {
  const ModelSpec spec = binary_spec(ModelKind::kIndependent, 2, 0.25);
  const ChoiceSet cs = triple({{2, 1}, {1, 2}, {1, 1}});
  const Eigen::MatrixXd J = jacobian(cs, Beta::zero(spec), spec);
  const double h = std_normal_pdf(0.0) * 0.5 / 1.0;  // sigma_max = 1
  Eigen::MatrixXd expected(3, 3);
  expected << 2 * h, -h, -h, -h, 2 * h, -h, -h, -h, 2 * h;
  CHECK((J - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("jacobian rows sum to zero and match finite differences") {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 100; ++c) {
    const RandomInstance inst = random_instance(rng);
    const Eigen::MatrixXd J = jacobian(inst.cs, inst.beta, inst.spec);
    CHECK(J.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd fd = fd_jacobian(inst.cs, inst.beta, inst.spec);
    CHECK((J - fd).cwiseAbs().maxCoeff() < 1e-6);
  }
  const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 0.25);
  const ChoiceSet degenerate = triple({{2, 2}, {1, 1}, {1, 1}});
  CHECK_THROWS_AS(jacobian(degenerate, Beta::zero(spec), spec),
                  std::domain_error);
}

TEST_CASE("intensity matrix closed form under independence") {
  const ModelSpec spec = binary_spec(ModelKind::kIndependent, 2, 0.25);
  const ChoiceSet cs = triple({{2, 1}, {1, 2}, {1, 1}});
  const Eigen::MatrixXd lambda = intensity_matrix(cs, Beta::zero(spec), spec);
  Eigen::MatrixXd expected =
      9.0 / (8.0 * std::numbers::pi) *
      (3.0 * Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Ones(3, 3));
  CHECK((lambda - expected).cwiseAbs().maxCoeff() < 1e-12);

  // The same closed form carries the 1/sigma_max^2 factor.
  const ModelSpec scaled = binary_spec(ModelKind::kIndependent, 2, 1.0);
  const Eigen::MatrixXd lambda2 =
      intensity_matrix(cs, Beta::zero(scaled), scaled);
  CHECK((lambda2 - expected / scaled.sigma_max_sq()).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("pair intensity matches the marginal form") {
  const ModelSpec spec = binary_spec(ModelKind::kIndependent, 3, 0.5);
  ChoiceSet cs;
  cs.alternatives = {Alternative{{1, 1, 1}, std::nullopt},
                     Alternative{{2, 2, 2}, std::nullopt}};
  const Eigen::MatrixXd lambda = intensity_matrix(cs, Beta::zero(spec), spec);
  const double sigma_sq = 2.0 * 3 * 0.5;
  CHECK(lambda(0, 0) ==
        doctest::Approx(2.0 / std::numbers::pi / sigma_sq).epsilon(1e-12));
  CHECK(lambda(0, 1) == doctest::Approx(-lambda(0, 0)).epsilon(1e-12));
}

TEST_CASE("intensity structural identities on random instances") {
  std::mt19937_64 rng(17);
  for (int c = 0; c < 150; ++c) {
    const RandomInstance inst = random_instance(rng);
    const Eigen::MatrixXd lambda =
        intensity_matrix(inst.cs, inst.beta, inst.spec);
    const int m = inst.cs.size();
    CHECK(lambda.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    CHECK((lambda - lambda.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    if (m == 3) {
      for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
          const int l = 3 - i - j;
          CHECK(std::fabs(2.0 * lambda(i, j) -
                          (lambda(l, l) - lambda(i, i) - lambda(j, j))) <
                1e-9);
        }
      }
    }
    const Eigen::MatrixXd pinv =
        intensity_matrix_pinv(inst.cs, inst.beta, inst.spec);
    CHECK((lambda - pinv).cwiseAbs().maxCoeff() < 1e-9);

    const Eigen::MatrixXd m_mat =
        information_matrix(inst.cs, inst.beta, inst.spec);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (m_mat + m_mat.transpose()));
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("information matrix examples") {
  {
    // Pair, K = 1, v = 2, indifference: M = 4 lambda2(0) / sigma^2.
    const ModelSpec spec = binary_spec(ModelKind::kIndependent, 1, 0.5);
    ChoiceSet cs;
    cs.alternatives = {Alternative{{1}, std::nullopt},
                       Alternative{{2}, std::nullopt}};
    const Eigen::MatrixXd m_mat =
        information_matrix(cs, Beta::zero(spec), spec);
    CHECK(m_mat.rows() == 1);
    CHECK(m_mat(0, 0) ==
          doctest::Approx(8.0 / std::numbers::pi).epsilon(1e-12));
  }
  {
    // Independent triple, orbit (2,1,1) representative: diagonal 4*Lambda_jj.
    const ModelSpec spec = binary_spec(ModelKind::kIndependent, 2, 0.25);
    const ChoiceSet cs = triple({{2, 1}, {1, 2}, {1, 1}});
    const Eigen::MatrixXd m_mat =
        information_matrix(cs, Beta::zero(spec), spec);
    const double c = 9.0 / (8.0 * std::numbers::pi);
    CHECK(m_mat(0, 0) == doctest::Approx(8.0 * c).epsilon(1e-10));
    CHECK(m_mat(1, 1) == doctest::Approx(8.0 * c).epsilon(1e-10));
  }
  {
    // Degenerate triple equals the paired information of the distinct pair.
    const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 0.25);
    const ChoiceSet degenerate = triple({{2, 2}, {1, 1}, {1, 1}});
    ChoiceSet pair;
    pair.alternatives = {Alternative{{2, 2}, std::nullopt},
                         Alternative{{1, 1}, std::nullopt}};
    const Eigen::MatrixXd m3 =
        information_matrix(degenerate, Beta::zero(spec), spec);
    const Eigen::MatrixXd m2 =
        information_matrix(pair, Beta::zero(spec), spec);
    CHECK((m3 - m2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("information scales inversely with the variance scale") {
  std::mt19937_64 rng(23);
  for (int c = 0; c < 40; ++c) {
    RandomInstance inst = random_instance(rng);
    const Beta beta0 = Beta::zero(inst.spec);
    Beta b = beta0;
    const Eigen::MatrixXd m1 =
        information_matrix(inst.cs, b, inst.spec);
    ModelSpec scaled = inst.spec;
    const double factor = 2.25;  // c^2
    scaled.sigma0_sq *= factor;
    scaled.sigma_t_sq *= factor;
    const Eigen::MatrixXd m2 = information_matrix(inst.cs, b, scaled);
    CHECK((m2 * factor - m1).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, m1.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("pair information is invariant under swapping the alternatives") {
  std::mt19937_64 rng(31);
  for (int c = 0; c < 60; ++c) {
    RandomInstance inst = random_instance(rng);
    if (inst.cs.size() != 2) continue;
    const Eigen::MatrixXd m1 =
        information_matrix(inst.cs, inst.beta, inst.spec);
    std::swap(inst.cs.alternatives[0], inst.cs.alternatives[1]);
    const Eigen::MatrixXd m2 =
        information_matrix(inst.cs, inst.beta, inst.spec);
    CHECK((m1 - m2).cwiseAbs().maxCoeff() <
          1e-11 * std::max(1.0, m1.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("input validation") {
  const ModelSpec spec = binary_spec(ModelKind::kDependent, 2, 0.25);
  ChoiceSet bad = triple({{1, 1}, {1, 3}});  // level 3 with v = 2
  CHECK_THROWS_AS(diff_moments(bad, Beta::zero(spec), spec),
                  std::invalid_argument);
  ChoiceSet wrong_k = triple({{1}, {2}});
  CHECK_THROWS_AS(diff_moments(wrong_k, Beta::zero(spec), spec),
                  std::invalid_argument);
  ModelSpec bad_spec = spec;
  bad_spec.sigma0_sq = 0.0;
  CHECK_THROWS_AS(bad_spec.validate(), std::invalid_argument);
}
