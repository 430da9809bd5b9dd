#include "stark/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stark/error.hpp"
#include "stark/quadrature.hpp"

namespace stark {
namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

// exp(1 - 1/(1 - t^2)) on |t| < 1; equals 1 at t = 0.
double bump_shape(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

}  // namespace

// ---------------------------------------------------------------- NaturalSpline

NaturalSpline::NaturalSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    require(n >= 2 && y_.size() == n, "table: need at least two (x, y) samples of equal length");
    for (std::size_t i = 0; i < n; ++i) require(std::isfinite(x_[i]) && std::isfinite(y_[i]), "table: non-finite sample");
    for (std::size_t i = 1; i < n; ++i) require(x_[i] > x_[i - 1], "table: x must be strictly increasing");

    // Tridiagonal system for the second derivatives, natural end conditions.
    m_.assign(n, 0.0);
    if (n > 2) {
        std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            diag[i - 1] = (h0 + h1) / 3.0;
            upper[i - 1] = h1 / 6.0;
            rhs[i - 1] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        }
        // Thomas algorithm (the matrix is diagonally dominant).
        for (std::size_t i = 1; i < diag.size(); ++i) {
            const double lower = (x_[i + 1] - x_[i]) / 6.0;
            const double factor = lower / diag[i - 1];
            diag[i] -= factor * upper[i - 1];
            rhs[i] -= factor * rhs[i - 1];
        }
        for (std::size_t i = diag.size(); i-- > 0;) {
            const double next = i + 1 < diag.size() ? m_[i + 2] : 0.0;
            m_[i + 1] = (rhs[i] - upper[i] * next) / diag[i];
        }
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (int k = 0; k <= 16; ++k) {
            const double t = x_[i] + (x_[i + 1] - x_[i]) * k / 16.0;
            sup_ = std::max(sup_, std::abs(value(t)));
        }
    }
    sup_ *= 1.05;
}

std::size_t NaturalSpline::segment(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double NaturalSpline::value(double x) const {
    if (x > x_.back()) return 0.0;
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double NaturalSpline::derivative(double x) const {
    if (x > x_.back()) return 0.0;
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h - (3 * a * a - 1) * h / 6.0 * m_[i] + (3 * b * b - 1) * h / 6.0 * m_[i + 1];
}

// ---------------------------------------------------------------- PotentialTerm

double PotentialTerm::value(double x) const {
    switch (family) {
    case Family::exp_decay: return c * std::exp(-rate * x);
    case Family::alg_decay: return c * std::pow(1.0 + x, -rate);
    case Family::bump: return c * bump_shape((x - center) / width);
    case Family::tabulated: return c * table->value(x);
    }
    return 0.0;
}

double PotentialTerm::derivative(double x) const {
    switch (family) {
    case Family::exp_decay: return -rate * c * std::exp(-rate * x);
    case Family::alg_decay: return -rate * c * std::pow(1.0 + x, -rate - 1.0);
    case Family::bump: {
        const double t = (x - center) / width;
        if (std::abs(t) >= 1.0) return 0.0;
        const double d = 1.0 - t * t;
        return c * bump_shape(t) * (-2.0 * t / (d * d)) / width;
    }
    case Family::tabulated: return c * table->derivative(x);
    }
    return 0.0;
}

double PotentialTerm::tail_bound(double x) const {
    x = std::max(x, 0.0);
    switch (family) {
    case Family::exp_decay: return std::abs(c) * std::exp(-rate * x);
    case Family::alg_decay: return std::abs(c) * std::pow(1.0 + x, -rate);
    case Family::bump: return x < center + width ? std::abs(c) : 0.0;
    case Family::tabulated: return x < table->last() ? std::abs(c) * table->sup_abs() : 0.0;
    }
    return 0.0;
}

// ---------------------------------------------------------------- Potential

Potential::Potential(double r) : r_(r) {
    require(r > 1.0 && std::isfinite(r), "potential: weight exponent r must be finite and > 1");
}

Potential::Potential(std::vector<PotentialTerm> terms, double r) : r_(r) {
    require(r > 1.0 && std::isfinite(r), "potential: weight exponent r must be finite and > 1");
    for (auto& term : terms) {
        require(std::isfinite(term.c), "potential: amplitude must be finite");
        switch (term.family) {
        case Family::exp_decay:
            require(term.rate > 0.0 && std::isfinite(term.rate), "exp: decay rate a must be > 0");
            break;
        case Family::alg_decay: {
            std::ostringstream msg;
            msg << "alg: exponent p = " << term.rate << " must exceed (r+1)/2 = " << (r + 1) / 2
                << " for q to lie in A_r";
            require(term.rate > (r + 1.0) / 2.0 && std::isfinite(term.rate), msg.str());
            break;
        }
        case Family::bump:
            require(term.width > 0.0 && std::isfinite(term.width), "bump: width w must be > 0");
            require(std::isfinite(term.center), "bump: center x0 must be finite");
            break;
        case Family::tabulated:
            require(term.table != nullptr, "table: missing samples");
            break;
        }
        if (term.c != 0.0) terms_.push_back(std::move(term));
    }
}

double Potential::operator()(double x) const {
    double sum = 0.0;
    for (const auto& t : terms_) sum += t.value(x);
    return sum;
}

double Potential::derivative(double x) const {
    double sum = 0.0;
    for (const auto& t : terms_) sum += t.derivative(x);
    return sum;
}

double Potential::tail_bound(double x) const {
    double sum = 0.0;
    for (const auto& t : terms_) sum += t.tail_bound(x);
    return sum;
}

double Potential::support_end() const {
    double end = 0.0;
    for (const auto& t : terms_) {
        switch (t.family) {
        case Family::bump: end = std::max(end, t.center + t.width); break;
        case Family::tabulated: end = std::max(end, t.table->last()); break;
        default: return infinity;
        }
    }
    return end;
}

std::vector<double> Potential::breakpoints() const {
    std::vector<double> pts;
    for (const auto& t : terms_) {
        if (t.family == Family::bump) {
            for (double p : {t.center - t.width, t.center, t.center + t.width})
                if (p > 0.0) pts.push_back(p);
        } else if (t.family == Family::tabulated) {
            for (double p : t.table->knots())
                if (p > 0.0) pts.push_back(p);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

Potential Potential::scaled(double factor) const {
    std::vector<PotentialTerm> terms = terms_;
    for (auto& t : terms) t.c *= factor;
    return Potential(std::move(terms), r_);
}

Potential Potential::plus(const Potential& other) const {
    std::vector<PotentialTerm> terms = terms_;
    terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
    return Potential(std::move(terms), std::min(r_, other.r_));
}

std::string Potential::describe() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& t : terms_) {
        if (!first) out << " + ";
        first = false;
        switch (t.family) {
        case Family::exp_decay: out << t.c << "*exp(-" << t.rate << "x)"; break;
        case Family::alg_decay: out << t.c << "*(1+x)^-" << t.rate; break;
        case Family::bump: out << "bump(" << t.c << ", " << t.center << ", " << t.width << ")"; break;
        case Family::tabulated: out << t.c << "*table[" << t.table->knots().size() << "]"; break;
        }
    }
    return out.str();
}

// ---------------------------------------------------------------- construction

Potential make_potential(const PotentialSpec& spec) {
    auto param = [&](const char* name) {
        const auto it = spec.params.find(name);
        if (it == spec.params.end()) throw ValidationError(spec.family + ": missing parameter '" + name + "'");
        return it->second;
    };
    PotentialTerm term;
    if (spec.family == "exp") {
        term.family = Family::exp_decay;
        term.c = param("c");
        term.rate = param("a");
    } else if (spec.family == "alg") {
        term.family = Family::alg_decay;
        term.c = param("c");
        term.rate = param("p");
    } else if (spec.family == "bump") {
        term.family = Family::bump;
        term.c = param("c");
        term.center = param("x0");
        term.width = param("w");
    } else if (spec.family == "table") {
        term.family = Family::tabulated;
        term.c = 1.0;
        require(!spec.table_x.empty() && spec.table_x.front() == 0.0, "table: first node must be x = 0");
        double ymax = 0.0;
        for (double y : spec.table_y) ymax = std::max(ymax, std::abs(y));
        require(!spec.table_y.empty() && std::abs(spec.table_y.back()) <= 1e-12 * (1.0 + ymax),
                "table: samples must decay to 0 at the last node");
        term.table = std::make_shared<const NaturalSpline>(spec.table_x, spec.table_y);
    } else {
        throw ValidationError("unknown potential family '" + spec.family + "'");
    }
    return Potential({term}, spec.r);
}

PotentialSpec potential_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("potential: descriptor must be a JSON object");
    PotentialSpec spec;
    if (!j.contains("family") || !j["family"].is_string()) throw ValidationError("potential.family: missing or not a string");
    spec.family = j["family"].get<std::string>();
    if (j.contains("r")) {
        if (!j["r"].is_number()) throw ValidationError("potential.r: must be a number");
        spec.r = j["r"].get<double>();
    }
    if (j.contains("params")) {
        const auto& params = j["params"];
        if (!params.is_object()) throw ValidationError("potential.params: must be an object");
        for (const auto& [key, value] : params.items()) {
            if (value.is_number()) {
                spec.params[key] = value.get<double>();
            } else if (value.is_array() && (key == "x" || key == "y")) {
                auto& target = key == "x" ? spec.table_x : spec.table_y;
                for (const auto& v : value) {
                    if (!v.is_number()) throw ValidationError("potential.params." + key + ": entries must be numbers");
                    target.push_back(v.get<double>());
                }
            } else {
                throw ValidationError("potential.params." + key + ": unsupported value");
            }
        }
    }
    return spec;
}

nlohmann::json potential_spec_to_json(const PotentialSpec& spec) {
    nlohmann::json j;
    j["family"] = spec.family;
    j["r"] = spec.r;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : spec.params) params[k] = v;
    if (spec.family == "table") {
        params["x"] = spec.table_x;
        params["y"] = spec.table_y;
    }
    j["params"] = params;
    return j;
}

Potential potential_from_json(const nlohmann::json& j) { return make_potential(potential_spec_from_json(j)); }

Potential exp_decay(double c, double a, double r) {
    return make_potential({"exp", {{"c", c}, {"a", a}}, {}, {}, r});
}

Potential alg_decay(double c, double p, double r) {
    return make_potential({"alg", {{"c", c}, {"p", p}}, {}, {}, r});
}

Potential bump(double c, double x0, double w, double r) {
    return make_potential({"bump", {{"c", c}, {"x0", x0}, {"w", w}}, {}, {}, r});
}

// ---------------------------------------------------------------- norms

double integrate_against(const Potential& q, const std::function<double(double)>& f, std::vector<double> extra,
                         double rel_tol) {
    if (q.is_zero()) return 0.0;
    std::vector<double> pts = q.breakpoints();
    pts.insert(pts.end(), extra.begin(), extra.end());
    pts.push_back(0.0);
    std::erase_if(pts, [](double p) { return !(p >= 0.0) || !std::isfinite(p); });
    double x_far = std::max(1.0, *std::max_element(pts.begin(), pts.end()));
    pts.push_back(x_far);
    QuadratureOptions opt;
    opt.rel_tol = rel_tol;
    double total = integrate_pieces(f, pts, opt);
    if (q.support_end() > x_far) total += integrate_to_infinity(f, x_far, opt);
    return total;
}

NormBundle norms(const Potential& q) {
    NormBundle nb;
    if (q.is_zero()) return nb;
    const double r = q.r();
    auto weighted = [r](double v, double x) { return v == 0.0 ? 0.0 : v * std::pow(1.0 + x, 0.5 * r); };
    const double ar2 = integrate_against(q, [&](double x) {
        const double v = weighted(q(x), x);
        return v * v;
    });
    const double dar2 = integrate_against(q, [&](double x) {
        const double v = weighted(q.derivative(x), x);
        return v * v;
    });
    const double afr2 = integrate_against(q, [&](double x) {
        const double a = weighted(q(x), x), b = weighted(q.derivative(x), x);
        return a * a + b * b;
    });
    nb.ar_norm = std::sqrt(ar2);
    nb.derivative_ar_norm = std::sqrt(dar2);
    nb.afr_norm = std::sqrt(afr2);
    nb.l1_norm = integrate_against(q, [&](double x) { return std::abs(q(x)); });
    nb.l1_bar = nb.l1_norm + integrate_against(q, [&](double x) { return std::abs(q.derivative(x)); });
    return nb;
}

double omega(const Potential& q, double z, bool with_derivative) {
    if (!std::isfinite(z)) throw DomainError("omega: z must be finite");
    if (q.is_zero()) return 0.0;
    std::vector<double> extra;
    if (z > 0.0) extra.push_back(z);
    auto kernel = [z](double x) { return 1.0 / std::sqrt(1.0 + std::abs(x - z)); };
    double value = integrate_against(q, [&](double x) { return std::abs(q(x)) * kernel(x); }, extra);
    if (with_derivative)
        value += integrate_against(q, [&](double x) { return std::abs(q.derivative(x)) * kernel(x); }, extra);
    return value;
}

double omega_r(double r, int n) {
    if (!(r > 1.0)) throw DomainError("omega_r: r must exceed 1");
    if (n < 1) throw DomainError("omega_r: n must be >= 1");
    const double base = std::pow(static_cast<double>(n), -1.0 / 3.0);
    if (r < 2.0) return base * std::sqrt(std::log(static_cast<double>(n)));
    return base;
}

}  // namespace stark
