#include "stark/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "stark/airy.hpp"
#include "stark/error.hpp"

namespace stark {
namespace {

struct AiPair {
    double ai = 0.0, ai_prime = 0.0;
};

AiPair ai_at(double w) {
    if (w > 100.0) return {};
    const AiryValues v = airy_eval_scaled(w);
    const double decay = std::exp(-v.exponent);
    return {v.ai * decay, v.ai_prime * decay};
}

// Split points for an integrand oscillating on [0, -a_n] and decaying past it.
std::vector<double> airy_breaks(double turning) {
    std::vector<double> pts;
    for (double x = 2.0; x < turning; x += 2.0) pts.push_back(x);
    pts.push_back(turning);
    pts.push_back(turning + 4.0);
    pts.push_back(turning + 12.0);
    return pts;
}

void check_index(int n, const char* what) {
    if (n < 1) throw DomainError(std::string(what) + ": n must be >= 1");
}

}  // namespace

double lambda_prediction(const Potential& q, int n) {
    check_index(n, "lambda_prediction");
    const double a = airy_zero(n).a_n;
    const double integral = integrate_against(
        q,
        [&](double x) {
            const double ai = ai_at(x + a).ai;
            return ai * ai * q(x);
        },
        airy_breaks(-a), 1e-11);
    return -a + std::numbers::pi * integral / std::sqrt(-a);
}

double kappa_prediction(const Potential& q, int n) {
    check_index(n, "kappa_prediction");
    const double a = airy_zero(n).a_n;
    const double integral = integrate_against(
        q,
        [&](double x) {
            const AiPair p = ai_at(x + a);
            return p.ai * p.ai_prime * q(x);
        },
        airy_breaks(-a), 1e-11);
    return -2.0 * std::numbers::pi * integral / std::sqrt(-a);
}

double kappa_prediction_by_parts(const Potential& q, int n) {
    check_index(n, "kappa_prediction_by_parts");
    const double a = airy_zero(n).a_n;
    const double integral = integrate_against(
        q,
        [&](double x) {
            const double ai = ai_at(x + a).ai;
            return ai * ai * q.derivative(x);
        },
        airy_breaks(-a), 1e-11);
    return std::numbers::pi * integral / std::sqrt(-a);
}

SlopeFit decay_rate_fit(const std::vector<double>& resid, const std::vector<int>& n, double floor) {
    if (resid.size() != n.size()) throw DomainError("decay_rate_fit: resid and n differ in length");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < resid.size(); ++i) {
        if (n[i] < 1) throw DomainError("decay_rate_fit: indices must be >= 1");
        if (std::isfinite(resid[i]) && std::abs(resid[i]) >= floor && resid[i] != 0.0) {
            xs.push_back(std::log(static_cast<double>(n[i])));
            ys.push_back(std::log(std::abs(resid[i])));
        }
    }
    const int m = static_cast<int>(xs.size());
    if (m < 8) {
        std::ostringstream msg;
        msg << "decay_rate_fit: " << m << " residuals at or above the floor " << floor << ", need 8";
        throw InsufficientDataError(msg.str());
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < m; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("decay_rate_fit: all usable points share one index");
    SlopeFit fit;
    fit.points = m;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (int i = 0; i < m; ++i) {
        const double e = ys[i] - fit.intercept - fit.slope * xs[i];
        sse += e * e;
    }
    const double se = std::sqrt(sse / (m - 2) / sxx);
    const boost::math::students_t dist(m - 2);
    fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
    return fit;
}

AsymptoticsReport asymptotics_report(const Potential& q, const std::vector<int>& n, const std::vector<double>& lambda,
                                     const std::vector<double>& kappa, double floor, int fit_min_n) {
    if (lambda.size() != n.size() || kappa.size() != n.size())
        throw DomainError("asymptotics_report: arrays must match the index list");
    AsymptoticsReport rep;
    rep.n = n;
    std::vector<double> fit_l, fit_k;
    std::vector<int> fit_n;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double lp = lambda_prediction(q, n[i]);
        const double kp = kappa_prediction(q, n[i]);
        rep.lambda_pred.push_back(lp);
        rep.kappa_pred.push_back(kp);
        rep.lambda_resid.push_back(lambda[i] - lp);
        rep.kappa_resid.push_back(kappa[i] - kp);
        rep.omega_r_values.push_back(omega_r(q.r(), n[i]));
        if (n[i] >= fit_min_n) {
            fit_n.push_back(n[i]);
            fit_l.push_back(rep.lambda_resid.back());
            fit_k.push_back(rep.kappa_resid.back());
            rep.lambda_constant = std::max(rep.lambda_constant, std::abs(rep.lambda_resid.back()) * n[i]);
            rep.kappa_constant = std::max(rep.kappa_constant, std::abs(rep.kappa_resid.back()) * n[i]);
        }
    }
    try {
        rep.lambda_fit = decay_rate_fit(fit_l, fit_n, floor);
        rep.lambda_fit_ok = true;
    } catch (const InsufficientDataError&) {
    }
    try {
        rep.kappa_fit = decay_rate_fit(fit_k, fit_n, floor);
        rep.kappa_fit_ok = true;
    } catch (const InsufficientDataError&) {
    }
    return rep;
}

}  // namespace stark
