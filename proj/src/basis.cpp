#include "stark/basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "stark/airy.hpp"
#include "stark/error.hpp"

namespace stark {
namespace {

const double sqrt_pi = std::sqrt(std::numbers::pi);

AiryValues unscaled(double w, double z, double x) {
    const AiryValues v = airy_eval(w);
    if (v.scaled) {
        std::ostringstream msg;
        msg << "basis_eval(z=" << z << ", x=" << x << "): Bi(" << w << ") overflows";
        throw NumericError(msg.str());
    }
    return v;
}

}  // namespace

BasisValues basis_eval(double z, double x) {
    const AiryValues at_x = unscaled(x - z, z, x);
    const AiryValues at_0 = unscaled(-z, z, x);
    BasisValues b;
    b.z = z;
    b.x = x;
    b.psi0 = sqrt_pi * at_x.ai;
    b.psi0_prime = sqrt_pi * at_x.ai_prime;
    b.theta0 = sqrt_pi * at_x.bi;
    b.theta0_prime = sqrt_pi * at_x.bi_prime;

    const double psi0_0 = sqrt_pi * at_0.ai, psi0p_0 = sqrt_pi * at_0.ai_prime;
    const double theta0_0 = sqrt_pi * at_0.bi, theta0p_0 = sqrt_pi * at_0.bi_prime;
    b.s0 = -theta0_0 * b.psi0 + psi0_0 * b.theta0;
    b.s0_prime = -theta0_0 * b.psi0_prime + psi0_0 * b.theta0_prime;
    b.c0 = theta0p_0 * b.psi0 - psi0p_0 * b.theta0;
    b.c0_prime = theta0p_0 * b.psi0_prime - psi0p_0 * b.theta0_prime;
    b.s0_dot = b.c0 - b.s0_prime;
    return b;
}

double green0(double z, double x, double y) {
    const AiryValues ax = airy_eval_scaled(x - z);
    const AiryValues ay = airy_eval_scaled(y - z);
    const double pi = std::numbers::pi;
    const double first = pi * ax.bi * ay.ai * std::exp(ax.exponent - ay.exponent);
    const double second = pi * ax.ai * ay.bi * std::exp(ay.exponent - ax.exponent);
    return first - second;
}

}  // namespace stark
