#include "pcd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "pcd/normal.hpp"

namespace pcd {

namespace {

constexpr double kGoldenRatio = 0.6180339887498949;  // (sqrt(5)-1)/2

// Golden-section maximization of a unimodal function on [lo, hi].
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol) {
  double a = lo, b = hi;
  double x1 = b - kGoldenRatio * (b - a);
  double x2 = a + kGoldenRatio * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGoldenRatio * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGoldenRatio * (b - a);
      f1 = f(x1);
    }
  }
  return (a + b) / 2.0;
}

// One parabolic fit through (x-h, x, x+h); falls back to x when the fit
// is not a proper maximum.
double parabolic_refine(const std::function<double(double)>& f, double x,
                        double h) {
  const double fm = f(x - h), f0 = f(x), fp = f(x + h);
  const double denom = fm - 2.0 * f0 + fp;
  if (!(denom < 0.0)) return x;
  const double shift = 0.5 * h * (fm - fp) / denom;
  const double cand = x + shift;
  return f(cand) >= f0 ? cand : x;
}

double log_zstar_criterion(double z, double exponent) {
  return exponent * std::log(intensity_lambda2(z)) + 2.0 * std::log(z);
}

// --- 2D Nelder-Mead ------------------------------------------------------

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }

// Standard simplex search (maximization); deterministic for fixed starts.
Point2 nelder_mead_max(const std::function<double(Point2)>& f, Point2 start,
                       double scale, int max_iter, double ftol, double xtol) {
  std::array<Point2, 3> v = {start, start + Point2{scale, 0.0},
                             start + Point2{0.0, scale}};
  std::array<double, 3> fv;
  for (int i = 0; i < 3; ++i) fv[i] = f(v[i]);

  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return fv[a] > fv[b]; });
    const int hi = idx[2], mid = idx[1], lo = idx[0];

    const double spread = std::max(
        {std::fabs(v[0].x - v[1].x), std::fabs(v[0].x - v[2].x),
         std::fabs(v[0].y - v[1].y), std::fabs(v[0].y - v[2].y)});
    if (std::fabs(fv[lo] - fv[hi]) <
            ftol * (1.0 + std::fabs(fv[lo])) &&
        spread < xtol) {
      break;
    }

    const Point2 centroid = 0.5 * (v[lo] + v[mid]);
    const Point2 refl = centroid + 1.0 * (centroid - v[hi]);
    const double f_refl = f(refl);
    if (f_refl > fv[lo]) {
      const Point2 expa = centroid + 2.0 * (centroid - v[hi]);
      const double f_expa = f(expa);
      if (f_expa > f_refl) {
        v[hi] = expa;
        fv[hi] = f_expa;
      } else {
        v[hi] = refl;
        fv[hi] = f_refl;
      }
    } else if (f_refl > fv[mid]) {
      v[hi] = refl;
      fv[hi] = f_refl;
    } else {
      const Point2 contr = centroid + 0.5 * (v[hi] - centroid);
      const double f_contr = f(contr);
      if (f_contr > fv[hi]) {
        v[hi] = contr;
        fv[hi] = f_contr;
      } else {
        for (int i : {mid, hi}) {
          v[i] = v[lo] + 0.5 * (v[i] - v[lo]);
          fv[i] = f(v[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (fv[i] > fv[best]) best = i;
  }
  return v[best];
}

ModelSpec normalized_spec(const SweepConfig& cfg) {
  ModelSpec spec;
  spec.kind = cfg.kind;
  spec.n_attributes = cfg.n_attributes;
  spec.n_levels = 2;
  spec.has_quantitative = cfg.quantitative;
  // Rescale the variance split so sigma_max^2 = 1; criterion and z values
  // are reported in this normalized problem, as the reference tables do.
  const double sigma_t_sq = cfg.quantitative ? cfg.sigma_t_sq : 0.0;
  const double total =
      2.0 * (cfg.n_attributes * cfg.sigma0_sq + sigma_t_sq);
  if (!(total > 0.0)) {
    throw std::invalid_argument("sigma_max^2 must be positive");
  }
  spec.sigma0_sq = cfg.sigma0_sq / total;
  spec.sigma_t_sq = sigma_t_sq / total;
  return spec;
}

}  // namespace

ZStarResult optimize_zstar(double exponent) {
  if (exponent < 1.0) {
    throw std::invalid_argument("optimize_zstar needs exponent >= 1");
  }
  auto logf = [exponent](double z) { return log_zstar_criterion(z, exponent); };
  double z = golden_max(logf, 1e-6, 10.0, 1e-10);
  z = parabolic_refine(logf, z, 1e-5);

  ZStarResult r;
  r.z_star = z;
  r.p_star = std_normal_cdf(z);
  r.exponent = exponent;
  r.criterion = std::exp(logf(z));
  return r;
}

EquivalenceCertificate equivalence_check(double z_star, double exponent,
                                         double grid_lo, double grid_hi,
                                         int grid_points, double tolerance) {
  if (grid_points < 2 || !(grid_hi > grid_lo)) {
    throw std::invalid_argument("equivalence_check: bad grid");
  }
  const double lam = intensity_lambda2(z_star);
  const double m0 = lam;
  const double m2 = z_star * z_star * lam;
  auto psi = [&](double z) {
    return intensity_lambda2(z) *
               (z * z / m2 + (exponent - 1.0) / m0) -
           exponent;
  };

  EquivalenceCertificate cert;
  cert.z_star = z_star;
  cert.exponent = exponent;
  cert.grid_lo = grid_lo;
  cert.grid_hi = grid_hi;
  cert.grid_points = grid_points;
  cert.tolerance = tolerance;
  cert.psi_at_zstar = psi(z_star);
  cert.psi_at_neg_zstar = psi(-z_star);
  cert.psi_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double z =
        grid_lo + (grid_hi - grid_lo) * i / (grid_points - 1.0);
    cert.psi_max = std::max(cert.psi_max, psi(z));
  }
  cert.passed = cert.psi_max <= tolerance &&
                std::fabs(cert.psi_at_zstar) <= tolerance &&
                std::fabs(cert.psi_at_neg_zstar) <= tolerance;
  return cert;
}

PairedDesignResult paired_optimal_design(const ModelSpec& spec,
                                         const Beta& beta) {
  spec.validate();
  PairedDesignResult out;
  out.sigma_max = std::sqrt(spec.sigma_max_sq());

  // Uniform design on the full-depth qualitative orbit: the product of
  // per-attribute balanced pair designs over the v(v-1) ordered level
  // pairs, weight (v(v-1))^-K each.
  const int k_attrs = spec.n_attributes;
  const int v = spec.n_levels;
  std::vector<std::pair<int, int>> level_pairs;
  for (int i = 1; i <= v; ++i) {
    for (int j = 1; j <= v; ++j) {
      if (i != j) level_pairs.emplace_back(i, j);
    }
  }
  std::vector<ChoiceSet> support;
  std::vector<int> pick(k_attrs, 0);
  for (;;) {
    ChoiceSet cs;
    cs.alternatives.resize(2);
    cs.alternatives[0].levels.resize(k_attrs);
    cs.alternatives[1].levels.resize(k_attrs);
    for (int k = 0; k < k_attrs; ++k) {
      cs.alternatives[0].levels[k] = level_pairs[pick[k]].first;
      cs.alternatives[1].levels[k] = level_pairs[pick[k]].second;
    }
    support.push_back(std::move(cs));
    int k = 0;
    while (k < k_attrs && ++pick[k] == static_cast<int>(level_pairs.size())) {
      pick[k] = 0;
      ++k;
    }
    if (k == k_attrs) break;
  }
  const double w = 1.0 / static_cast<double>(support.size());

  if (!spec.has_quantitative) {
    if (!beta.qualitative.isZero(0.0)) {
      throw std::invalid_argument(
          "without a quantitative attribute only the indifference design "
          "(beta = 0) is available");
    }
    for (auto& cs : support) out.design.points.push_back({std::move(cs), w});
    out.z_star = 0.0;
    out.p_star = 0.5;
    out.exponent = 0.0;
    return out;
  }

  if (!beta.quantitative.has_value() || *beta.quantitative == 0.0) {
    throw std::invalid_argument(
        "beta2 = 0 admits no finite optimal quantitative settings");
  }

  const double exponent = spec.qualitative_dim() + 1;
  const ZStarResult zr = optimize_zstar(exponent);
  out.z_star = zr.z_star;
  out.p_star = zr.p_star;
  out.exponent = exponent;

  const double beta2 = *beta.quantitative;
  for (auto& cs : support) {
    // Conditional settings keep the standardized difference at z*.
    Eigen::VectorXd f1 =
        regression_vector(
            Alternative{cs.alternatives[0].levels, std::nullopt},
            ModelSpec{spec.kind, spec.n_attributes, spec.n_levels,
                      spec.sigma0_sq, 0.0, false}) -
        regression_vector(
            Alternative{cs.alternatives[1].levels, std::nullopt},
            ModelSpec{spec.kind, spec.n_attributes, spec.n_levels,
                      spec.sigma0_sq, 0.0, false});
    const double t_diff =
        (out.sigma_max * zr.z_star - f1.dot(beta.qualitative)) / beta2;
    cs.alternatives[0].t = t_diff;
    cs.alternatives[1].t = 0.0;
    out.design.points.push_back({std::move(cs), w});
  }
  return out;
}

namespace {

// det of the orbit information as a function of the free settings z1, z2.
double orbit_log_det(const OrbitTriple& d, const ModelSpec& spec,
                     const Beta& beta, double z1, double z2) {
  const Eigen::MatrixXd m =
      orbit_information(d, spec, beta, {z1, z2, 0.0});
  const double det = m.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    return -std::numeric_limits<double>::infinity();
  }
  return std::log(det);
}

bool orbit_collapses_sharp(const OrbitTriple& d, const ModelSpec& spec) {
  // Along the orbit, only a pair with zero comparison depth can lose its
  // utility-difference variance, and only when dependence holds and the
  // quantitative decision is sharp.
  return spec.kind == ModelKind::kDependent && spec.sigma_t_sq == 0.0 &&
         d.d23 == 0;
}

}  // namespace

OrbitResult optimize_orbit_quantitative(const OrbitTriple& d,
                                        const ModelSpec& spec) {
  spec.validate();
  if (!spec.has_quantitative) {
    throw std::invalid_argument(
        "optimize_orbit_quantitative needs a quantitative attribute");
  }
  const Beta beta = Beta::standardized(spec);
  const double sigma_max_sq = spec.sigma_max_sq();

  OrbitResult res;
  res.depth = d;

  if (orbit_collapses_sharp(d, spec)) {
    // Alternatives 2 and 3 share every qualitative draw; the problem is
    // the paired one in w = z1 - z2, scaled by the surviving pair's
    // standard deviation (equal to sigma_max only for full profiles).
    // Both signs of w* are optimal and the negative root is reported,
    // matching the reference tables.
    const ZStarResult zr =
        optimize_zstar(static_cast<double>(spec.n_attributes) + 1.0);
    const double sigma_pair_sq = 2.0 * d.d12 * spec.sigma0_sq;
    const double w = -zr.z_star * std::sqrt(sigma_pair_sq);
    res.z_opt = {{w, 0.0}};
    const ChoiceSet rep = orbit_representative(d, spec, {w, 0.0, 0.0});
    const PreferenceProbs pp = preference_probs(rep, beta, spec);
    res.probs = pp.p;
    res.collapsed_pair = true;
    res.crit = d_criterion(orbit_information(d, spec, beta, {w, 0.0, 0.0}),
                           sigma_max_sq);
    return res;
  }

  auto objective = [&](Point2 pt) {
    return orbit_log_det(d, spec, beta, pt.x, pt.y);
  };

  const double span = std::sqrt(sigma_max_sq);
  Point2 best{0.0, 0.0};
  double best_f = -std::numeric_limits<double>::infinity();
  for (double gx : {-2.0, 0.0, 2.0}) {
    for (double gy : {-2.0, 0.0, 2.0}) {
      const Point2 start{gx * span, gy * span};
      Point2 cand =
          nelder_mead_max(objective, start, 0.5 * span, 400, 1e-12, 1e-9);
      cand = nelder_mead_max(objective, cand, 1e-3 * span, 200, 1e-13, 1e-10);
      const double f = objective(cand);
      const bool tie = std::fabs(f - best_f) <= 1e-7;
      const bool better =
          f > best_f + 1e-7 ||
          (tie && (std::fabs(cand.y) < std::fabs(best.y) - 1e-9 ||
                   (std::fabs(std::fabs(cand.y) - std::fabs(best.y)) <= 1e-9 &&
                    std::fabs(cand.x) < std::fabs(best.x) - 1e-9)));
      if (better) {
        best = cand;
        best_f = f;
      }
    }
  }

  res.z_opt = {{best.x, best.y}};
  const ChoiceSet rep = orbit_representative(d, spec, {best.x, best.y, 0.0});
  const PreferenceProbs pp = preference_probs(rep, beta, spec);
  res.probs = pp.p;
  res.collapsed_pair = pp.collapsed;
  res.crit = d_criterion(
      orbit_information(d, spec, beta, {best.x, best.y, 0.0}), sigma_max_sq);
  return res;
}

std::vector<OrbitResult> sweep_orbits(const SweepConfig& cfg) {
  if (cfg.n_attributes < 1 || cfg.n_attributes > cfg.max_attributes) {
    throw std::invalid_argument("sweep_orbits: K out of configured range");
  }
  const ModelSpec spec = normalized_spec(cfg);
  const Beta beta =
      cfg.quantitative ? Beta::standardized(spec) : Beta::zero(spec);
  const double sigma_max_sq = spec.sigma_max_sq();

  std::vector<OrbitResult> results;
  for (const OrbitTriple& d :
       enumerate_orbit_triples(cfg.n_attributes,
                               !cfg.include_partial_profiles)) {
    if (cfg.quantitative) {
      results.push_back(optimize_orbit_quantitative(d, spec));
      continue;
    }
    OrbitResult r;
    r.depth = d;
    const ChoiceSet rep = orbit_representative(d, spec);
    const PreferenceProbs pp = preference_probs(rep, beta, spec);
    r.probs = pp.p;
    r.collapsed_pair = pp.collapsed;
    r.crit = d_criterion(orbit_information(d, spec, beta), sigma_max_sq);
    results.push_back(std::move(r));
  }
  compute_efficiency(results);
  return results;
}

}  // namespace pcd
