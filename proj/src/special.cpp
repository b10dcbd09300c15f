#include "silo/special.hpp"

#include <cmath>
#include <stdexcept>

namespace silo {
namespace {

// W. J. Cody, "Rational Chebyshev approximation for the error function",
// Math. Comp. 23 (1969). Three intervals; the erfc branches keep the
// exp(-x^2) factor split as exp(-q^2)*exp(-(x-q)(x+q)) with q = trunc(16x)/16
// so the argument reduction stays exact.

constexpr double kA[5] = {3.1611237438705656, 113.864154151050156,
                          377.485237685302021, 3209.37758913846947,
                          0.185777706184603153};
constexpr double kB[4] = {23.6012909523441209, 244.024637934444173,
                          1282.61652607737228, 2844.23683343917062};
constexpr double kC[9] = {0.564188496988670089, 8.88314979438837594,
                          66.1191906371416295,  298.635138197400131,
                          881.95222124176909,   1712.04761263407058,
                          2051.07837782607147,  1230.33935479799725,
                          2.15311535474403846e-8};
constexpr double kD[8] = {15.7449261107098347, 117.693950891312499,
                          537.181101862009858, 1621.38957456669019,
                          3290.79923573345963, 4362.61909014324716,
                          3439.36767414372164, 1230.33935480374942};
constexpr double kP[6] = {0.305326634961232344, 0.360344899949804439,
                          0.125781726111229246, 0.0160837851487422766,
                          6.58749161529837803e-4, 0.0163153871373020978};
constexpr double kQ[5] = {2.56852019228982242, 1.87295284992346047,
                          0.527905102951428412, 0.0605183413124413191,
                          0.00233520497626869185};

constexpr double kInvSqrtPi = 0.56418958354775628695;
constexpr double kSqrtPi = 1.7724538509055160273;

// erf on |x| <= 0.46875.
double erf_small(double x) {
  const double y = std::fabs(x);
  double ysq = 0.0;
  if (y > 1.11e-16) ysq = y * y;
  double xnum = kA[4] * ysq;
  double xden = ysq;
  for (int i = 0; i < 3; ++i) {
    xnum = (xnum + kA[i]) * ysq;
    xden = (xden + kB[i]) * ysq;
  }
  return x * (xnum + kA[3]) / (xden + kB[3]);
}

// erfc on 0.46875 < y <= 4.
double erfc_mid(double y) {
  double xnum = kC[8] * y;
  double xden = y;
  for (int i = 0; i < 7; ++i) {
    xnum = (xnum + kC[i]) * y;
    xden = (xden + kD[i]) * y;
  }
  const double r = (xnum + kC[7]) / (xden + kD[7]);
  const double q = std::trunc(y * 16.0) / 16.0;
  const double del = (y - q) * (y + q);
  return std::exp(-q * q) * std::exp(-del) * r;
}

// erfc on y > 4.
double erfc_far(double y) {
  if (y >= 26.543) return 0.0;
  const double ysq = 1.0 / (y * y);
  double xnum = kP[5] * ysq;
  double xden = ysq;
  for (int i = 0; i < 4; ++i) {
    xnum = (xnum + kP[i]) * ysq;
    xden = (xden + kQ[i]) * ysq;
  }
  double r = ysq * (xnum + kP[4]) / (xden + kQ[4]);
  r = (kInvSqrtPi - r) / y;
  const double q = std::trunc(y * 16.0) / 16.0;
  const double del = (y - q) * (y + q);
  return std::exp(-q * q) * std::exp(-del) * r;
}

double erfc_positive(double y) { return y <= 4.0 ? erfc_mid(y) : erfc_far(y); }

// Inverse normal CDF, P. J. Acklam's rational approximation (relative error
// ~1.15e-9); only used as the starting point for the Newton refinement.
double norm_quantile_estimate(double prob) {
  constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                           -2.759285104469687e+02, 1.383577518672690e+02,
                           -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                           -1.556989798598866e+02, 6.680131188771972e+01,
                           -1.328068155288572e+01};
  constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                           -2.400758277161838e+00, -2.549732539343734e+00,
                           4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (prob > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = prob - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double erf(double x) {
  const double y = std::fabs(x);
  if (y <= 0.46875) return erf_small(x);
  const double r = erfc_positive(y);
  const double e = (0.5 - r) + 0.5;
  return x < 0.0 ? -e : e;
}

double erfc(double x) {
  if (x < -0.46875) return 2.0 - erfc_positive(-x);
  if (x <= 0.46875) return (0.5 - erf_small(x)) + 0.5;
  return erfc_positive(x);
}

double erfinv(double y) {
  if (!(std::fabs(y) < 1.0)) {
    throw std::domain_error("erfinv: argument must satisfy |y| < 1");
  }
  if (y == 0.0) return 0.0;

  // Evaluate on |y| and mirror the sign, so the function is exactly odd.
  // erfinv(a) = Phi^{-1}((1+a)/2) / sqrt(2).
  const double a = std::fabs(y);
  double x = norm_quantile_estimate(0.5 * (1.0 + a)) / std::sqrt(2.0);

  // Newton on f(x) = erf(x) - a; skipped where erf(x) can no longer resolve
  // the target (the initial estimate is already ~1e-9 accurate there).
  if (1.0 - a > 4e-16) {
    for (int i = 0; i < 3; ++i) {
      const double f = erf(x) - a;
      x -= f * (kSqrtPi / 2.0) * std::exp(x * x);
    }
  }
  return y < 0.0 ? -x : x;
}

}  // namespace silo
