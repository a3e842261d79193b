// Heat kernel on the hyperbolic space H^m, m = 2k+1 and m = 2k+2.
//
// Both parities apply the radial operator D = (1/sinh r) d/dr k times. D is
// differentiation with respect to u = cosh r, which gives two evaluation
// routes: exact symbolic differentiation of terms r^a sinh^-b(r) cosh^c(r)
// exp(-r^2/4t) away from the origin, and a Taylor expansion in w = cosh r - 1
// near it, where the symbolic terms cancel.

#include "diffmean/errors.hpp"
#include "diffmean/heat_kernel.hpp"
#include "power_series.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

namespace diffmean {

namespace {

using detail::PowerSeries;

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
constexpr std::size_t kTaylorOrder = 48;

struct RadialTerm {
    double coef;
    int rho_pow;
    int sinh_inv_pow;
    int cosh_pow;
};

// Terms of D^k applied to rho^a sinh^-b cosh^c exp(-rho^2 / 4t).
std::vector<RadialTerm> apply_radial_operator(std::vector<RadialTerm> terms, int k, double t) {
    for (int step = 0; step < k; ++step) {
        std::map<std::tuple<int, int, int>, double> acc;
        for (const auto& term : terms) {
            const auto [c, a, b, ch] = term;
            if (a > 0) acc[{a - 1, b, ch}] += c * a;
            if (b != 0) acc[{a, b + 1, ch + 1}] -= c * b;
            if (ch > 0) acc[{a, b - 1, ch - 1}] += c * ch;
            acc[{a + 1, b, ch}] -= c / (2.0 * t);
        }
        terms.clear();
        for (const auto& [key, c] : acc) {
            if (c == 0.0) continue;
            const auto [a, b, ch] = key;
            terms.push_back({c, a, b + 1, ch});  // trailing factor 1/sinh
        }
    }
    return terms;
}

double log_sinh(double r) {
    if (r > 0.5) return r + std::log1p(-std::exp(-2.0 * r)) - kLn2;
    return std::log(std::sinh(r));
}

double log_cosh(double r) { return r + std::log1p(std::exp(-2.0 * r)) - kLn2; }

// Signed value in log form: value = sign * exp(log_abs).
struct SignedLog {
    double sign;
    double log_abs;
};

SignedLog evaluate_terms(const std::vector<RadialTerm>& terms, double rho, double t) {
    const double lr = std::log(rho);
    const double ls = log_sinh(rho);
    const double lc = log_cosh(rho);
    const double lg = -rho * rho / (4.0 * t);
    std::vector<double> logs;
    logs.reserve(terms.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& term : terms) {
        const double v = std::log(std::abs(term.coef)) + term.rho_pow * lr - term.sinh_inv_pow * ls +
                         term.cosh_pow * lc + lg;
        logs.push_back(v);
        peak = std::max(peak, v);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        sum += std::copysign(std::exp(logs[i] - peak), terms[i].coef);
    }
    return {sum < 0.0 ? -1.0 : 1.0, std::log(std::abs(sum)) + peak};
}

// arcosh(1+w)^2 = sum_{n>=1} (-1)^(n+1) 2^(n+1) ((n-1)!)^2 / (2n)! w^n
PowerSeries arcosh_squared_series() {
    PowerSeries h(kTaylorOrder);
    double c = 2.0;
    for (std::size_t n = 1; n < kTaylorOrder; ++n) {
        h[n] = c;
        const double nn = double(n);
        c *= -nn * nn / ((nn + 1.0) * (2.0 * nn + 1.0));
    }
    return h;
}

// exp(-arcosh(1+w)^2 / 4t) as a series in w.
PowerSeries gaussian_series(double t) { return arcosh_squared_series().scaled(-1.0 / (4.0 * t)).exp(); }

// (r / sinh r) exp(-r^2 / 4t) with r = arcosh(1+w).
PowerSeries ratio_gaussian_series(double t) {
    const PowerSeries h = arcosh_squared_series();
    PowerSeries h_over_w(kTaylorOrder);
    for (std::size_t n = 0; n + 1 < kTaylorOrder; ++n) h_over_w[n] = h[n + 1];
    PowerSeries two_plus_w(kTaylorOrder);
    two_plus_w[0] = 2.0;
    two_plus_w[1] = 1.0;
    return (h_over_w / two_plus_w).sqrt() * gaussian_series(t);
}

double taylor_radius(double t) { return std::min(0.5, 0.5 * std::sqrt(t)); }

// D^k f at rho, switching between the Taylor and symbolic routes.
class RadialDerivative {
public:
    RadialDerivative(std::vector<RadialTerm> base, PowerSeries base_series, int k, double t)
        : terms_(apply_radial_operator(std::move(base), k, t)),
          series_(std::move(base_series)),
          k_(k),
          t_(t),
          cutoff_(taylor_radius(t)) {}

    SignedLog operator()(double rho) const {
        if (rho < cutoff_) {
            const double w = 2.0 * std::sinh(0.5 * rho) * std::sinh(0.5 * rho);
            const double v = series_.derivative_at(k_, w);
            return {v < 0.0 ? -1.0 : 1.0, std::log(std::abs(v))};
        }
        return evaluate_terms(terms_, rho, t_);
    }

private:
    std::vector<RadialTerm> terms_;
    PowerSeries series_;
    int k_;
    double t_;
    double cutoff_;
};

double odd_log_kernel(double rho, int k, double t) {
    const RadialDerivative deriv({{1.0, 0, 0, 0}}, gaussian_series(t), k, t);
    const SignedLog d = deriv(rho);
    const double sign = (k % 2 == 0 ? 1.0 : -1.0) * d.sign;
    if (!(sign > 0.0) || !std::isfinite(d.log_abs)) {
        throw AccuracyError("hyperbolic kernel: radial derivative lost all precision");
    }
    return -k * std::log(2.0 * kPi) - 0.5 * std::log(4.0 * kPi * t) - double(k) * k * t + d.log_abs;
}

double even_log_kernel(double rho, int k, double t, const KernelConfig& cfg) {
    // D^k of int_rho^inf s e^{-s^2/4t} (cosh s - cosh rho)^{-1/2} ds equals
    // int_rho^inf sinh(s) [D^k F](s) (cosh s - cosh rho)^{-1/2} ds, F(s) = (s / sinh s) e^{-s^2/4t}.
    const RadialDerivative deriv({{1.0, 1, 1, 0}}, ratio_gaussian_series(t), k, t);

    // s = rho + u^2 removes the endpoint singularity; the integrand becomes
    // 2u sinh(s) D^kF(s) / sqrt(2 sinh((s+rho)/2) sinh(u^2/2)).
    auto log_integrand = [&](double u) -> SignedLog {
        const double s = rho + u * u;
        const SignedLog d = deriv(s);
        const double log_den = 0.5 * (kLn2 + log_sinh(0.5 * (s + rho)) + std::log(std::sinh(0.5 * u * u)));
        return {d.sign, std::log(2.0 * u) + log_sinh(s) + d.log_abs - log_den};
    };

    const double upper = std::sqrt(cfg.quad_upper_sigma * std::sqrt(t));
    const double offset = log_integrand(1e-3 * upper).log_abs;
    auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const SignedLog v = log_integrand(u);
        return v.sign * std::exp(v.log_abs - offset);
    };

    double error = 0.0;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 20, cfg.quad_rel_tol,
                                                                      &error);
    const double signed_integral = (k % 2 == 0 ? 1.0 : -1.0) * integral;
    if (!(signed_integral > 0.0) || !(error <= cfg.quad_rel_tol * std::abs(integral))) {
        throw AccuracyError("hyperbolic kernel: quadrature did not reach quad_rel_tol (error estimate " +
                            std::to_string(error / std::abs(integral)) + ")");
    }
    return -(k + 2.5) * kLn2 - (k + 1.5) * std::log(kPi) - 1.5 * std::log(t) - (2.0 * k + 1.0) * (2.0 * k + 1.0) * t / 4.0 +
           offset + std::log(signed_integral);
}

}  // namespace

double hyperbolic_log_kernel(double rho, int dim, Diffusivity t, const KernelConfig& cfg) {
    if (dim < 2) throw DomainError("hyperbolic kernel requires dimension >= 2");
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("hyperbolic kernel: distance must be >= 0");
    if (dim % 2 == 1) return odd_log_kernel(rho, (dim - 1) / 2, t.value());
    return even_log_kernel(rho, (dim - 2) / 2, t.value(), cfg);
}

}  // namespace diffmean
