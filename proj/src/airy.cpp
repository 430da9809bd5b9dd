#include "stark/airy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "stark/error.hpp"

namespace stark {
namespace {

using boost::multiprecision::cpp_bin_float_50;

constexpr double pi = std::numbers::pi;

// Taylor centers cover [-taylor_limit, taylor_limit] with this spacing; the
// local expansion variable never exceeds half a spacing.
constexpr double taylor_limit = 10.0;
constexpr double center_spacing = 0.25;
constexpr int center_count = static_cast<int>(2 * taylor_limit / center_spacing) + 1;
constexpr int taylor_terms = 22;

// Past this exponent Bi(w) is no longer representable unscaled.
constexpr double unscaled_exponent_limit = 690.0;

struct CenterValues {
    double ai, ai_prime, bi, bi_prime;
};

// Maclaurin series of a solution of y'' = w y about 0, summed in 50 digits.
// The coefficients obey c_{k+3} = c_k / ((k+3)(k+2)).
std::array<cpp_bin_float_50, 2> maclaurin(const cpp_bin_float_50& w, const cpp_bin_float_50& y0,
                                          const cpp_bin_float_50& y1) {
    cpp_bin_float_50 value = 0, deriv = 0;
    // Two independent chains: powers 3k (seeded by y0) and 3k+1 (seeded by y1).
    cpp_bin_float_50 term_a = y0;  // coefficient of w^{3k}
    cpp_bin_float_50 term_b = y1;  // coefficient of w^{3k+1}
    const cpp_bin_float_50 w3 = w * w * w;
    cpp_bin_float_50 power = 1;     // w^{3k}
    cpp_bin_float_50 previous = 0;  // w^{3k-3}
    const cpp_bin_float_50 w2 = w * w;
    const cpp_bin_float_50 eps = std::numeric_limits<cpp_bin_float_50>::epsilon();
    for (int k = 0; k < 400; ++k) {
        const cpp_bin_float_50 pa = term_a * power;
        const cpp_bin_float_50 pb = term_b * power * w;
        value += pa + pb;
        // d/dw of c w^{3k} is 3k c w^{3k-1}; of c w^{3k+1} is (3k+1) c w^{3k}.
        if (k > 0) deriv += 3 * k * term_a * previous * w2;
        deriv += (3 * k + 1) * term_b * power;
        if (k > 4 && abs(pa) + abs(pb) < eps * 1e-6 * (abs(value) + 1)) break;
        term_a /= cpp_bin_float_50((3 * k + 3) * (3 * k + 2));
        term_b /= cpp_bin_float_50((3 * k + 4) * (3 * k + 3));
        previous = power;
        power *= w3;
    }
    return {value, deriv};
}

std::vector<CenterValues> build_center_table() {
    using boost::math::tgamma;
    const cpp_bin_float_50 third = cpp_bin_float_50(1) / 3;
    const cpp_bin_float_50 three = 3;
    const cpp_bin_float_50 g13 = tgamma(third);
    const cpp_bin_float_50 g23 = tgamma(2 * third);
    const cpp_bin_float_50 ai0 = 1 / (pow(three, 2 * third) * g23);
    const cpp_bin_float_50 aip0 = -1 / (pow(three, third) * g13);
    const cpp_bin_float_50 bi0 = 1 / (pow(three, third / 2) * g23);
    const cpp_bin_float_50 bip0 = pow(three, third / 2) / g13;

    std::vector<CenterValues> table(center_count);
    for (int j = 0; j < center_count; ++j) {
        const cpp_bin_float_50 w = cpp_bin_float_50(-taylor_limit) + cpp_bin_float_50(j) / 4;
        const auto a = maclaurin(w, ai0, aip0);
        const auto b = maclaurin(w, bi0, bip0);
        table[j] = {static_cast<double>(a[0]), static_cast<double>(a[1]), static_cast<double>(b[0]),
                    static_cast<double>(b[1])};
    }
    return table;
}

const std::vector<CenterValues>& center_table() {
    static const std::vector<CenterValues> table = build_center_table();
    return table;
}

// Local Taylor expansion about the nearest tabulated center.
AiryValues taylor_eval(double w) {
    const auto& table = center_table();
    const int j = std::clamp(static_cast<int>(std::lround((w + taylor_limit) / center_spacing)), 0,
                             center_count - 1);
    const double w0 = -taylor_limit + center_spacing * j;
    const double h = w - w0;
    const CenterValues& c = table[j];

    // y = sum c_k h^k with (k+2)(k+1) c_{k+2} = w0 c_k + c_{k-1}.
    std::array<double, taylor_terms + 2> ca{}, cb{};
    ca[0] = c.ai;
    ca[1] = c.ai_prime;
    cb[0] = c.bi;
    cb[1] = c.bi_prime;
    ca[2] = 0.5 * w0 * ca[0];
    cb[2] = 0.5 * w0 * cb[0];
    for (int k = 1; k + 2 < static_cast<int>(ca.size()); ++k) {
        const double denom = static_cast<double>((k + 2) * (k + 1));
        ca[k + 2] = (w0 * ca[k] + ca[k - 1]) / denom;
        cb[k + 2] = (w0 * cb[k] + cb[k - 1]) / denom;
    }
    double ai = 0, aip = 0, bi = 0, bip = 0;
    // Horner from the top.
    for (int k = static_cast<int>(ca.size()) - 1; k >= 0; --k) {
        ai = ai * h + ca[k];
        bi = bi * h + cb[k];
        if (k >= 1) {
            aip = aip * h + k * ca[k];
            bip = bip * h + k * cb[k];
        }
    }
    AiryValues v;
    v.w = w;
    v.ai = ai;
    v.ai_prime = aip;
    v.bi = bi;
    v.bi_prime = bip;
    return v;
}

struct AsymptoticCoefficients {
    std::array<double, 40> u{}, v{};
    AsymptoticCoefficients() {
        u[0] = 1.0;
        v[0] = 1.0;
        for (std::size_t k = 1; k < u.size(); ++k) {
            const double kk = static_cast<double>(k);
            u[k] = u[k - 1] * (6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1) / ((2 * kk - 1) * 216 * kk);
            v[k] = -(6 * kk + 1) / (6 * kk - 1) * u[k];
        }
    }
};

const AsymptoticCoefficients& coefficients() {
    static const AsymptoticCoefficients c;
    return c;
}

// sum_k sign^k c_k zeta^{-k}, truncated at the smallest term.
double asymptotic_sum(const std::array<double, 40>& c, double inv_zeta, double sign) {
    double sum = 0.0, power = 1.0, previous = INFINITY;
    double s = 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double term = s * c[k] * power;
        if (std::abs(term) > previous) break;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        previous = std::abs(term);
        power *= inv_zeta;
        s *= sign;
    }
    return sum;
}

// Even/odd partial sums sum_k (-1)^k c_{2k+parity} zeta^{-2k-parity}.
double oscillatory_sum(const std::array<double, 40>& c, double inv_zeta, int parity) {
    double sum = 0.0, previous = INFINITY;
    double power = parity == 0 ? 1.0 : inv_zeta;
    const double inv2 = inv_zeta * inv_zeta;
    double s = 1.0;
    for (std::size_t k = parity; k < c.size(); k += 2) {
        const double term = s * c[k] * power;
        if (std::abs(term) > previous) break;
        sum += term;
        if (std::abs(term) < 1e-17 * (std::abs(sum) + 1e-300)) break;
        previous = std::abs(term);
        power *= inv2;
        s = -s;
    }
    return sum;
}

// Scaled values for w > taylor_limit.
AiryValues positive_asymptotic(double w) {
    const auto& c = coefficients();
    const double zeta = airy_exponent(w);
    const double inv = 1.0 / zeta;
    const double w14 = std::pow(w, 0.25);
    const double rsp = 1.0 / std::sqrt(pi);
    AiryValues v;
    v.w = w;
    v.scaled = true;
    v.exponent = zeta;
    v.ai = 0.5 * rsp / w14 * asymptotic_sum(c.u, inv, -1.0);
    v.ai_prime = -0.5 * rsp * w14 * asymptotic_sum(c.v, inv, -1.0);
    v.bi = rsp / w14 * asymptotic_sum(c.u, inv, 1.0);
    v.bi_prime = rsp * w14 * asymptotic_sum(c.v, inv, 1.0);
    return v;
}

// Modulus/phase form for w < -taylor_limit.
AiryValues negative_asymptotic(double w) {
    const auto& c = coefficients();
    const double x = -w;
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const double inv = 1.0 / zeta;
    const double x14 = std::pow(x, 0.25);
    const double rsp = 1.0 / std::sqrt(pi);
    const double phase = zeta - 0.25 * pi;
    const double cs = std::cos(phase), sn = std::sin(phase);
    const double ue = oscillatory_sum(c.u, inv, 0), uo = oscillatory_sum(c.u, inv, 1);
    const double ve = oscillatory_sum(c.v, inv, 0), vo = oscillatory_sum(c.v, inv, 1);
    AiryValues v;
    v.w = w;
    v.ai = rsp / x14 * (cs * ue + sn * uo);
    v.ai_prime = rsp * x14 * (sn * ve - cs * vo);
    v.bi = rsp / x14 * (-sn * ue + cs * uo);
    v.bi_prime = rsp * x14 * (cs * ve + sn * vo);
    return v;
}

void check_argument(double w) {
    if (std::isnan(w)) throw DomainError("airy: NaN argument");
    if (std::abs(w) > airy_max_argument) {
        std::ostringstream msg;
        msg << "airy: |w| = " << std::abs(w) << " exceeds " << airy_max_argument;
        throw DomainError(msg.str());
    }
}

}  // namespace

double airy_exponent(double w) {
    if (w <= 0.0) return 0.0;
    return 2.0 / 3.0 * w * std::sqrt(w);
}

AiryValues airy_eval_scaled(double w) {
    check_argument(w);
    if (w > taylor_limit) return positive_asymptotic(w);
    AiryValues v = w < -taylor_limit ? negative_asymptotic(w) : taylor_eval(w);
    if (w > 0.0) {
        const double zeta = airy_exponent(w);
        const double up = std::exp(zeta), down = std::exp(-zeta);
        v.ai *= up;
        v.ai_prime *= up;
        v.bi *= down;
        v.bi_prime *= down;
        v.exponent = zeta;
    }
    v.scaled = true;
    return v;
}

AiryValues airy_eval(double w) {
    check_argument(w);
    if (w < -taylor_limit) return negative_asymptotic(w);
    if (w <= taylor_limit) return taylor_eval(w);
    AiryValues v = positive_asymptotic(w);
    if (v.exponent > unscaled_exponent_limit) return v;
    const double up = std::exp(v.exponent), down = std::exp(-v.exponent);
    v.ai *= down;
    v.ai_prime *= down;
    v.bi *= up;
    v.bi_prime *= up;
    v.scaled = false;
    v.exponent = 0.0;
    return v;
}

double airy_zero_seed(int n) {
    if (n < 1) throw DomainError("airy_zero: index must be >= 1");
    return -std::pow(1.5 * pi * (n - 0.25), 2.0 / 3.0);
}

AiryZero airy_zero(int n) {
    const double seed = airy_zero_seed(n);
    // Half-width from the O(n^{-4/3}) seed error, capped below half the local
    // zero spacing pi / sqrt(|a_n|) so the bracket isolates one zero.
    const double width = std::min(5.0 * std::pow(static_cast<double>(n), -4.0 / 3.0),
                                  0.25 * pi / std::sqrt(-seed));
    double lo = seed - width, hi = seed + width;
    double f_lo = airy_eval(lo).ai, f_hi = airy_eval(hi).ai;
    if (f_lo * f_hi > 0.0) {
        std::ostringstream msg;
        msg << "airy_zero(" << n << "): seed bracket [" << lo << ", " << hi << "] has no sign change";
        throw NumericError(msg.str());
    }
    double a = seed;
    for (int iter = 0; iter < 100; ++iter) {
        const AiryValues v = airy_eval(a);
        if (v.ai == 0.0) return {n, a, 0.0};
        if ((v.ai < 0.0) == (f_lo < 0.0)) {
            lo = a;
        } else {
            hi = a;
        }
        double next = a - v.ai / v.ai_prime;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = next - a;
        a = next;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(a)) {
            return {n, a, airy_eval(a).ai};
        }
    }
    std::ostringstream msg;
    msg << "airy_zero(" << n << "): no convergence in 100 steps, bracket [" << lo << ", " << hi << "]";
    throw NumericError(msg.str());
}

Envelope envelope(double w) {
    if (std::isnan(w)) throw DomainError("envelope: NaN argument");
    Envelope e;
    e.w = w;
    e.sigma = 1.0 + std::pow(std::abs(w), 0.25);
    e.log_g_a = -airy_exponent(w);
    e.g_a = std::exp(e.log_g_a);
    e.g_b = 1.0 / e.g_a;
    return e;
}

double envelope_margin(std::span<const double> grid) {
    double margin = 0.0;
    for (double w : grid) {
        const AiryValues v = airy_eval_scaled(w);
        const double sigma = 1.0 + std::pow(std::abs(w), 0.25);
        margin = std::max({margin, std::abs(v.ai) * sigma, std::abs(v.ai_prime) / sigma});
    }
    return margin;
}

}  // namespace stark
