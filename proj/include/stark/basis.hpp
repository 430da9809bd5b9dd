#pragma once

namespace stark {

/// Unperturbed solutions of -f'' + x f = z f at (z, x):
/// psi0 = sqrt(pi) Ai(x - z), theta0 = sqrt(pi) Bi(x - z), normalized so that
/// psi0 theta0' - psi0' theta0 = 1, and the fundamental pair s0, c0 fixed by
/// s0(0) = c0'(0) = 0, s0'(0) = c0(0) = 1.
struct BasisValues {
    double z = 0.0;
    double x = 0.0;
    double psi0 = 0.0, psi0_prime = 0.0;
    double theta0 = 0.0, theta0_prime = 0.0;
    double s0 = 0.0, s0_prime = 0.0;
    double c0 = 0.0, c0_prime = 0.0;
    double s0_dot = 0.0;  ///< d s0 / dz = c0 - s0'
};

/// Throws NumericError when Bi(x - z) or Bi(-z) is not representable.
BasisValues basis_eval(double z, double x);

/// Green kernel J0(z, x, y) = theta0(x) psi0(y) - psi0(x) theta0(y), with the
/// exponential factors combined before exponentiation.
double green0(double z, double x, double y);

}  // namespace stark
