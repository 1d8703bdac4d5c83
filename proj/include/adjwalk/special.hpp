#pragma once

// Scalar special functions used by the distributions, hydro and mixing modules.

namespace adjwalk::special {

// log(1+x) - x without cancellation for small |x|; x > -1.
double log1pmx(double x);

double log_add_exp(double a, double b);

// log Gamma(z) minus its Stirling approximation (z - 1/2) log z - z + log(2 pi)/2.
double log_gamma_correction(double z);

// log B(a, b), stable for very large shapes.
double log_beta(double a, double b);

// a log(x/x0) + b log((1-x)/(1-x0)) with x0 = a/(a+b), computed without cancellation.
double beta_log_kernel(double a, double b, double x);

// Regularized incomplete beta I_x(a,b) and its complement 1 - I_x(a,b).
double inc_beta(double a, double b, double x);
double inc_beta_complement(double a, double b, double x);

// Uniform asymptotic expansion (large a+b); exposed for tests.
double inc_beta_asymptotic(double a, double b, double x, bool complement);

// Shape threshold above which the asymptotic expansion replaces the library routine.
inline constexpr double kAsymptoticShape = 1e5;

// Inverse of x -> I_x(a,b) on [0,1].
double inc_beta_inverse(double a, double b, double p);

// Regularized lower incomplete gamma P(a, x).
double inc_gamma_lower(double a, double x);

double normal_cdf(double z);

// Survival function of the Kolmogorov distribution, P(K > t).
double kolmogorov_sf(double t);

}  // namespace adjwalk::special
