#pragma once

#include <utility>

// Log-space tail probabilities. Everything returns natural logs so that
// p-values far below machine epsilon stay comparable (finite down to
// log p ~ -700 and beyond, limited only by the double exponent range of
// the log itself).

namespace gomp::special {

// log of the regularized lower incomplete gamma P(s, x).
// P(s, 0) = 0 is reported as -infinity.
double log_reg_inc_gamma_lower(double s, double x);

// log of the regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
double log_reg_inc_gamma_upper(double s, double x);

// log of the regularized incomplete beta I_x(a, b).
// I_0 = 0 -> -infinity, I_1 = 1 -> 0.
double log_reg_inc_beta(double a, double b, double x);

// log upper tail of the chi-squared distribution with df degrees of freedom.
double log_chi2_upper(double x, double df);

// log two-sided tail P(|T| >= |t|) for Student's t with df degrees of freedom.
double log_t_two_sided(double t, double df);

// log upper tail of the F distribution with (d1, d2) degrees of freedom.
double log_f_upper(double f, double d1, double d2);

// Quantile x with P(chi2_df <= x) = p, solved to ~1e-12.
double chi2_quantile(double p, double df);

}  // namespace gomp::special
