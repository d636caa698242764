#ifndef PCD_NORMAL_HPP
#define PCD_NORMAL_HPP

#include <utility>

namespace pcd {

// Value in [0,1].  Construction snaps tiny numerical overshoot (<=1e-9)
// back into the interval and rejects anything worse.
struct Probability {
  double value = 0.0;

  Probability() = default;
  explicit Probability(double v);

  operator double() const noexcept { return value; }
};

// Value in [-1,1], same snapping rule as Probability.
struct Correlation {
  double value = 0.0;

  Correlation() = default;
  explicit Correlation(double v);

  operator double() const noexcept { return value; }
};

// Standard normal density phi(z) = exp(-z^2/2)/sqrt(2*pi).
double std_normal_pdf(double z);

// Standard normal distribution function Phi(z), absolute error <= 1e-14.
Probability std_normal_cdf(double z);

// Upper tail P(Z > z) evaluated without forming 1 - Phi(z), so it keeps
// full relative accuracy far into the tail.
double std_normal_sf(double z);

// Bivariate standard normal CDF P(X <= x, Y <= y) with correlation rho.
// Drezner-Wesolowsky quadrature with the Genz reformulation near |rho|=1;
// absolute error below 1e-12 over the whole range.  x and y may be +-inf.
Probability bvn_cdf(double x, double y, Correlation rho);

// d/dx of bvn_cdf: phi(x) * Phi((y - rho*x)/sqrt(1-rho^2)).
// Requires |rho| < 1; at |rho| = 1 the derivative degenerates and the
// caller must collapse the pair instead.
double bvn_cdf_dx(double x, double y, Correlation rho);

// Marginal intensity lambda2(z) = phi(z)^2 / (Phi(z)(1-Phi(z))).
// Even, positive, decreasing in |z|; evaluated tail-stably.
double intensity_lambda2(double z);

// Inverse intensity h(z) = Phi(z)(1-Phi(z))/phi(z)^2 = 1/lambda2(z),
// computed directly (not as a reciprocal) so the identity h*lambda2 = 1
// is a genuine consistency check.
double inverse_intensity_h(double z);

// Closed-form third derivative of h:
//   h'''(z) = (8z^3+12z) h(z) - (14z^2+10) (Phi(z)-1/2)/phi(z) - 6z.
// Vanishes at 0 and is strictly positive for z > 0.
double h_third_derivative(double z);

// Classical normal-tail bounds used as numeric verification targets:
//   tail_lower:   1 - Phi(z) >= (1 - (z^2+7)/(8z^2+12)) phi(z)/z   (z >= 1)
//   center_upper: Phi(z) - 1/2 <= (z - z^3/6 + z^5/40)/sqrt(2*pi)  (0<=z<=1)
struct Lemma1Bounds {
  double tail_lower = 0.0;
  double center_upper = 0.0;
};
Lemma1Bounds lemma1_bounds(double z);

}  // namespace pcd

#endif  // PCD_NORMAL_HPP
