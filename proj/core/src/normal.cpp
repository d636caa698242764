#include "pcd/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pcd {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;  // 1/sqrt(2*pi)
constexpr double kSnapTol = 1e-9;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

double snap_into(double v, double lo, double hi, const char* what) {
  if (v >= lo && v <= hi) return v;
  if (v > hi && v - hi <= kSnapTol) return hi;
  if (v < lo && lo - v <= kSnapTol) return lo;
  throw std::domain_error(std::string(what) + " out of range: " +
                          std::to_string(v));
}

}  // namespace

Probability::Probability(double v) : value(snap_into(v, 0.0, 1.0, "Probability")) {}

Correlation::Correlation(double v)
    : value(snap_into(v, -1.0, 1.0, "Correlation")) {}

double std_normal_pdf(double z) {
  require_finite(z, "std_normal_pdf argument");
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

Probability std_normal_cdf(double z) {
  require_finite(z, "std_normal_cdf argument");
  return Probability(0.5 * std::erfc(-z / kSqrt2));
}

double std_normal_sf(double z) {
  require_finite(z, "std_normal_sf argument");
  return 0.5 * std::erfc(z / kSqrt2);
}

namespace {

// Unnormalized CDF without the strong-type wrapper, +-inf allowed.
double phid(double z) {
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-z / kSqrt2);
}

// Gauss-Legendre abscissas/weights on [-1,1], positive half.
constexpr double kGlX6[3] = {0.9324695142031522, 0.6612093864662647,
                             0.2386191860831970};
constexpr double kGlW6[3] = {0.1713244923791705, 0.3607615730481384,
                             0.4679139345726904};
constexpr double kGlX12[6] = {0.9815606342467191, 0.9041172563704750,
                              0.7699026741943050, 0.5873179542866171,
                              0.3678314989981802, 0.1252334085114692};
constexpr double kGlW12[6] = {0.04717533638651177, 0.1069393259953183,
                              0.1600783285433464,  0.2031674267230659,
                              0.2334925365383547,  0.2491470458134029};
constexpr double kGlX20[10] = {0.9931285991850949,  0.9639719272779138,
                               0.9122344282513259,  0.8391169718222188,
                               0.7463319064601508,  0.6360536807265150,
                               0.5108670019508271,  0.3737060887154196,
                               0.2277858511416451,  0.07652652113349733};
constexpr double kGlW20[10] = {0.01761400713915212, 0.04060142980038694,
                               0.06267204833410906, 0.08327674157670475,
                               0.1019301198172404,  0.1181945319615184,
                               0.1316886384491766,  0.1420961093183821,
                               0.1491729864726037,  0.1527533871307259};

// Upper-quadrant probability P(X > dh, Y > dk) for correlation r,
// following Genz's reorganization of Drezner & Wesolowsky.
double bvn_upper(double dh, double dk, double r) {
  const double* x = kGlX20;
  const double* w = kGlW20;
  int lg = 10;
  const double ar = std::fabs(r);
  if (ar < 0.3) {
    x = kGlX6;
    w = kGlW6;
    lg = 3;
  } else if (ar < 0.75) {
    x = kGlX12;
    w = kGlW12;
    lg = 6;
  }

  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;

  if (ar < 0.925) {
    if (ar > 0.0) {
      const double hs = (h * h + k * k) / 2.0;
      const double asr = std::asin(r);
      for (int i = 0; i < lg; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double sn = std::sin(asr * (is * x[i] + 1.0) / 2.0);
          bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn = bvn * asr / (2.0 * kTwoPi);
    }
    return bvn + phid(-h) * phid(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
             c * d * as * as / 5.0);
    }
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * phid(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double xs = (a * (is * x[i] + 1.0)) * (a * (is * x[i] + 1.0));
        const double rs = std::sqrt(1.0 - xs);
        asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + d * xs);
          const double ep =
              std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
          bvn += a * w[i] * std::exp(asr) * (ep - sp);
        }
      }
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) {
    bvn += phid(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) bvn += phid(k) - phid(h);
  }
  return bvn;
}

}  // namespace

Probability bvn_cdf(double x, double y, Correlation rho) {
  const double r = rho.value;
  if (std::isnan(x) || std::isnan(y)) {
    throw std::invalid_argument("bvn_cdf arguments must not be NaN");
  }
  if (std::isinf(x) || std::isinf(y)) {
    if (x < 0.0 || y < 0.0) return Probability(0.0);
    if (std::isinf(x) && std::isinf(y)) return Probability(1.0);
    return std::isinf(x) ? std_normal_cdf(y) : std_normal_cdf(x);
  }
  // Perfect correlation collapses to a univariate statement.
  if (r == 1.0) return std_normal_cdf(std::min(x, y));
  if (r == -1.0) {
    return Probability(
        std::max(0.0, phid(x) + phid(y) - 1.0));
  }
  return Probability(std::clamp(bvn_upper(-x, -y, r), 0.0, 1.0));
}

double bvn_cdf_dx(double x, double y, Correlation rho) {
  require_finite(x, "bvn_cdf_dx x");
  require_finite(y, "bvn_cdf_dx y");
  const double r = rho.value;
  if (std::fabs(r) >= 1.0) {
    throw std::domain_error(
        "bvn_cdf_dx: |rho| = 1 is a degenerate correlation; collapse the "
        "pair before differentiating");
  }
  return std_normal_pdf(x) * phid((y - r * x) / std::sqrt(1.0 - r * r));
}

double intensity_lambda2(double z) {
  require_finite(z, "intensity_lambda2 argument");
  const double za = std::fabs(z);
  const double pdf = std_normal_pdf(za);
  if (za > 37.0) {
    // sf underflows before pdf; switch to the Mills-ratio asymptote.
    const double z2 = za * za;
    const double mills =
        1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return pdf * za / mills;
  }
  const double sf = std_normal_sf(za);
  const double cdf = 1.0 - sf;  // za >= 0, so sf <= 1/2: no cancellation
  return (pdf / cdf) * (pdf / sf);
}

double inverse_intensity_h(double z) {
  require_finite(z, "inverse_intensity_h argument");
  const double za = std::fabs(z);
  const double pdf = std_normal_pdf(za);
  if (za > 37.0) {
    const double z2 = za * za;
    const double mills =
        1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return mills / (pdf * za);
  }
  const double sf = std_normal_sf(za);
  const double cdf = 1.0 - sf;
  return (cdf / pdf) * (sf / pdf);
}

double h_third_derivative(double z) {
  require_finite(z, "h_third_derivative argument");
  const double h = inverse_intensity_h(z);
  const double pdf = std_normal_pdf(z);
  // (Phi(z) - 1/2)/phi(z), odd in z; written via the lower half tail so it
  // stays accurate for small |z|.
  const double centered = (z >= 0.0 ? 0.5 - std_normal_sf(z)
                                    : -(0.5 - std_normal_sf(-z)));
  return (8.0 * z * z * z + 12.0 * z) * h -
         (14.0 * z * z + 10.0) * centered / pdf - 6.0 * z;
}

Lemma1Bounds lemma1_bounds(double z) {
  require_finite(z, "lemma1_bounds argument");
  if (z < 0.0) {
    throw std::invalid_argument("lemma1_bounds requires z >= 0");
  }
  Lemma1Bounds b;
  b.tail_lower =
      (1.0 - (z * z + 7.0) / (8.0 * z * z + 12.0)) * std_normal_pdf(z) / z;
  b.center_upper =
      (z - z * z * z / 6.0 + std::pow(z, 5) / 40.0) * kInvSqrt2Pi;
  return b;
}

}  // namespace pcd
