#pragma once

namespace fde {

// Upper incomplete Beta integral
//   beta_z(alpha, beta) = integral_z^1 s^(alpha-1) (1-s)^(beta-1) ds
// for 0 <= z <= 1, alpha > 0, beta > 0. Continued-fraction evaluation of the
// regularized function; absolute error <= 1e-12 over moderate parameter
// ranges (value bounded by the complete Beta function).
double incomplete_beta(double z, double alpha, double beta);

// Regularized lower incomplete Beta I_x(a, b).
double regularized_beta(double x, double a, double b);

// Complete Beta function B(a, b).
double beta_function(double a, double b);

} // namespace fde
