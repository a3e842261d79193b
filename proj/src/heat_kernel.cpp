#include "diffmean/heat_kernel.hpp"

#include "diffmean/errors.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

namespace diffmean {

namespace {

using BigFloat = boost::multiprecision::mpfr_float;

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr unsigned kMaxDigits = 20000;

// Relative accuracy on p below which a double-precision series is re-run in
// extended precision.
constexpr double kCancellationTol = 1e-13;

// mpfr_float keeps its default precision in a process-wide static; every
// extended-precision evaluation holds this lock while it runs.
std::mutex& extended_precision_mutex() {
    static std::mutex m;
    return m;
}

class PrecisionScope {
public:
    explicit PrecisionScope(unsigned digits)
        : lock_(extended_precision_mutex()), saved_(BigFloat::default_precision()) {
        BigFloat::default_precision(digits);
    }
    ~PrecisionScope() { BigFloat::default_precision(saved_); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    std::lock_guard<std::mutex> lock_;
    unsigned saved_;
};

double signed_arc(double a, double b) {
    double d = std::remainder(b - a, kTwoPi);
    if (d <= -kPi) d += kTwoPi;
    return d;
}

double checked_arc(double arc) {
    if (!(arc >= -1e-12 && arc <= kPi + 1e-12)) {
        throw DomainError("circle kernel: arc " + std::to_string(arc) + " outside [0, pi]");
    }
    return std::clamp(arc, 0.0, kPi);
}

double log_sphere_area(int dim) {
    const double h = 0.5 * (dim + 1);
    return std::log(2.0) + h * std::log(kPi) - std::lgamma(h);
}

// Wrapped-Gaussian weights exp(e_k - e_0), e_k = -(arc + 2 pi k)^2 / 4t, with
// the image terms k != 0 accumulated into `rest` and sum_k w_k (arc + 2 pi k)
// into `moment`.
struct WrappedSum {
    double rest = 0.0;
    double moment = 0.0;
};

WrappedSum wrapped_sum(double arc, double t, const KernelConfig& cfg) {
    WrappedSum s;
    s.moment = arc;
    const double log_lead = -0.5 * std::log(4.0 * kPi * t) - arc * arc / (4.0 * t);
    int terms = 1;
    for (int dir : {1, -1}) {
        for (int k = dir;; k += dir) {
            const double shifted = arc + kTwoPi * k;
            const double rel = std::exp(-(shifted * shifted - arc * arc) / (4.0 * t));
            s.rest += rel;
            s.moment += rel * shifted;
            if (++terms > cfg.max_terms) {
                throw AccuracyError("circle kernel: wrapped sum exceeded max_terms");
            }
            const double absolute = std::exp(log_lead) * rel;
            if (absolute < cfg.tail_tol && rel < kEps * (1.0 + s.rest)) break;
        }
    }
    return s;
}

double spectral_log_kernel_extended(double arc, double t, const KernelConfig& cfg) {
    for (unsigned digits = 50; digits <= kMaxDigits; digits *= 2) {
        PrecisionScope scope(digits);
        const BigFloat delta(arc);
        const BigFloat step = boost::multiprecision::exp(BigFloat(-2.0 * t));
        const BigFloat floor_ = boost::multiprecision::pow(BigFloat(10), -static_cast<int>(digits));
        BigFloat q = boost::multiprecision::exp(BigFloat(-t));  // exp(-(2k-1)t)
        BigFloat decay = 1;                                     // exp(-k^2 t)
        BigFloat sum = 1;
        BigFloat abs_sum = 1;
        int k = 1;
        for (;; ++k) {
            decay *= q;
            q *= step;
            sum += 2 * decay * boost::multiprecision::cos(k * delta);
            abs_sum += 2 * decay;
            if (k > cfg.max_terms) throw AccuracyError("circle kernel: spectral sum exceeded max_terms");
            if (2 * decay < floor_ * abs_sum) break;
        }
        const BigFloat noise = floor_ * abs_sum * (k + 1);
        if (sum > 0 && noise < BigFloat(1e-15) * sum) {
            return static_cast<double>(boost::multiprecision::log(sum)) - std::log(kTwoPi);
        }
    }
    throw AccuracyError("circle kernel: spectral sum cancels beyond extended precision");
}

double sphere_log_kernel_extended(double c, int dim, double t, const KernelConfig& cfg,
                                  unsigned start_digits) {
    const double alpha = 0.5 * (dim - 1);
    const double log_area = log_sphere_area(dim);
    for (unsigned digits = start_digits; digits <= kMaxDigits; digits *= 2) {
        PrecisionScope scope(digits);
        const BigFloat s(c);
        const BigFloat step = boost::multiprecision::exp(BigFloat(-2.0 * t));
        const BigFloat base = boost::multiprecision::exp(BigFloat(-dim * t));
        const double log_floor = -std::log(10.0) * digits;
        BigFloat c_prev = 0;
        BigFloat c_cur = 1;
        BigFloat decay = 1;  // exp(-l(l+m-1)t)
        BigFloat g = 1;      // exp(-2(l-1)t)
        BigFloat sum = 1;
        double abs_sum = 1.0;
        double prev_log_bound = 0.0;
        int l = 1;
        for (;; ++l) {
            BigFloat c_next = (l == 1) ? BigFloat(2 * alpha * s)
                                       : (2 * s * (l + alpha - 1) * c_cur - (l + 2 * alpha - 2) * c_prev) / l;
            c_prev = c_cur;
            c_cur = c_next;
            if (l > 1) g *= step;
            decay *= base * g;
            const double weight = (2.0 * l + dim - 1) / (dim - 1);
            sum += decay * weight * c_cur;
            const double log_bound = -l * (l + dim - 1.0) * t + std::log(weight) + std::lgamma(l + 2 * alpha) -
                                     std::lgamma(2 * alpha) - std::lgamma(l + 1.0);
            abs_sum += std::exp(log_bound);
            if (l > cfg.max_terms) {
                throw AccuracyError("sphere kernel: truncation needs more than max_terms=" +
                                    std::to_string(cfg.max_terms) + " terms; raise max_terms or t");
            }
            if (log_bound < prev_log_bound && log_bound < log_floor + std::log(abs_sum)) break;
            prev_log_bound = log_bound;
        }
        const double log_noise = log_floor + std::log(abs_sum * 8.0 * (l + 1));
        if (sum > 0 && log_noise < std::log(1e-15) + static_cast<double>(boost::multiprecision::log(sum))) {
            return static_cast<double>(boost::multiprecision::log(sum)) - log_area;
        }
    }
    throw AccuracyError("sphere kernel: series cancels beyond extended precision");
}

}  // namespace

void KernelConfig::validate() const {
    if (!(tail_tol > 0.0)) throw DomainError("tail_tol must be positive");
    if (max_terms < 8) throw DomainError("max_terms must be >= 8");
    if (!(quad_rel_tol > 0.0)) throw DomainError("quad_rel_tol must be positive");
    if (!(quad_upper_sigma > 0.0)) throw DomainError("quad_upper_sigma must be positive");
}

Diffusivity::Diffusivity(double t) : t_(t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("diffusivity t must be positive and finite");
}

double euclidean_log_kernel(double distance, int dim, Diffusivity t) {
    const double tt = t.value();
    return -0.5 * dim * std::log(4.0 * kPi * tt) - distance * distance / (4.0 * tt);
}

double circle_log_kernel_wrapped(double arc, Diffusivity t, const KernelConfig& cfg) {
    arc = checked_arc(arc);
    const double tt = t.value();
    const WrappedSum s = wrapped_sum(arc, tt, cfg);
    return -0.5 * std::log(4.0 * kPi * tt) - arc * arc / (4.0 * tt) + std::log1p(s.rest);
}

double circle_log_kernel_spectral(double arc, Diffusivity t, const KernelConfig& cfg) {
    arc = checked_arc(arc);
    const double tt = t.value();
    double sum = 1.0;
    double abs_sum = 1.0;
    for (int k = 1;; ++k) {
        const double decay = std::exp(-double(k) * k * tt);
        sum += 2.0 * decay * std::cos(k * arc);
        abs_sum += 2.0 * decay;
        if (k > cfg.max_terms) throw AccuracyError("circle kernel: spectral sum exceeded max_terms");
        if (2.0 * decay < cfg.tail_tol * kTwoPi && 2.0 * decay < kEps * abs_sum) break;
    }
    if (sum <= 0.0 || 4.0 * kEps * abs_sum > kCancellationTol * sum) {
        return spectral_log_kernel_extended(arc, tt, cfg);
    }
    return std::log(sum) - std::log(kTwoPi);
}

double circle_log_kernel(double arc, Diffusivity t, const KernelConfig& cfg) {
    if (t.value() <= 1.0) return circle_log_kernel_wrapped(arc, t, cfg);
    return circle_log_kernel_spectral(arc, t, cfg);
}

double circle_dlog_kernel(double delta, Diffusivity t, const KernelConfig& cfg) {
    const double sign = delta < 0.0 ? -1.0 : 1.0;
    const double arc = checked_arc(std::abs(delta));
    const double tt = t.value();
    if (tt <= 1.0) {
        const WrappedSum s = wrapped_sum(arc, tt, cfg);
        return -sign * s.moment / (2.0 * tt * (1.0 + s.rest));
    }
    double num = 0.0;
    double den = 1.0;
    for (int k = 1;; ++k) {
        const double decay = std::exp(-double(k) * k * tt);
        num -= 2.0 * k * decay * std::sin(k * arc);
        den += 2.0 * decay * std::cos(k * arc);
        if (k > cfg.max_terms) throw AccuracyError("circle kernel: spectral sum exceeded max_terms");
        if (2.0 * k * decay < kEps * std::abs(den) && 2.0 * decay < cfg.tail_tol) break;
    }
    return sign * num / den;
}

double gegenbauer(int l, double alpha, double s) {
    if (l < 0) throw DomainError("gegenbauer: degree must be >= 0");
    if (l == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * alpha * s;
    for (int n = 2; n <= l; ++n) {
        const double next = (2.0 * s * (n + alpha - 1.0) * cur - (n + 2.0 * alpha - 2.0) * prev) / n;
        prev = cur;
        cur = next;
    }
    return cur;
}

double sphere_log_kernel(double c, int dim, Diffusivity t, const KernelConfig& cfg) {
    if (dim < 2) throw DomainError("sphere kernel requires dimension >= 2");
    if (!(c >= -1.0 - 1e-12 && c <= 1.0 + 1e-12)) throw DomainError("sphere kernel: <x,y> outside [-1, 1]");
    c = std::clamp(c, -1.0, 1.0);
    const double tt = t.value();
    const double alpha = 0.5 * (dim - 1);
    const double log_area = log_sphere_area(dim);

    // Truncation uses the envelope C_l(1) = binom(l + 2 alpha - 1, l) >= |C_l(c)|.
    double c_prev = 0.0;
    double c_cur = 1.0;
    double sum = 1.0;
    double abs_sum = 1.0;
    double prev_log_bound = 0.0;
    for (int l = 1;; ++l) {
        const double c_next =
            (l == 1) ? 2.0 * alpha * c : (2.0 * c * (l + alpha - 1.0) * c_cur - (l + 2.0 * alpha - 2.0) * c_prev) / l;
        c_prev = c_cur;
        c_cur = c_next;
        const double log_decay = -l * (l + dim - 1.0) * tt;
        const double weight = (2.0 * l + dim - 1) / (dim - 1);
        sum += std::exp(log_decay) * weight * c_cur;
        const double log_bound = log_decay + std::log(weight) + std::lgamma(l + 2 * alpha) - std::lgamma(2 * alpha) -
                                 std::lgamma(l + 1.0);
        const double bound = std::exp(log_bound);
        abs_sum += bound;
        if (l > cfg.max_terms) {
            throw AccuracyError("sphere kernel: truncation needs more than max_terms=" +
                                std::to_string(cfg.max_terms) + " terms; raise max_terms or t");
        }
        if (log_bound < prev_log_bound && bound < cfg.tail_tol * std::exp(log_area) &&
            bound < kEps * abs_sum) {
            break;
        }
        prev_log_bound = log_bound;
    }
    if (sum > 0.0 && 16.0 * kEps * abs_sum <= kCancellationTol * sum) return std::log(sum) - log_area;

    // Cancellation: choose a starting precision from the Gaussian size estimate of p.
    const double theta = std::acos(c);
    const double log_p_guess = -theta * theta / (4.0 * tt) - 0.5 * dim * std::log(4.0 * kPi * tt);
    const double digits_lost = (std::log(abs_sum) - log_p_guess) / std::log(10.0);
    const unsigned start = static_cast<unsigned>(std::clamp(digits_lost + 40.0, 40.0, double(kMaxDigits)));
    return sphere_log_kernel_extended(c, dim, tt, cfg, start);
}

double log_heat_kernel(const ManifoldSpec& manifold, const Point& x, const Point& y, Diffusivity t,
                       const KernelConfig& cfg) {
    if (!(x.manifold() == manifold) || !(y.manifold() == manifold)) {
        throw DomainError("log_heat_kernel: points do not lie on " + to_string(manifold));
    }
    switch (manifold.kind()) {
    case ManifoldKind::Euclidean: return euclidean_log_kernel(dist(manifold, x, y), manifold.dim(), t);
    case ManifoldKind::Circle: return circle_log_kernel(dist(manifold, x, y), t, cfg);
    case ManifoldKind::Sphere: return sphere_log_kernel(x.coords().dot(y.coords()), manifold.dim(), t, cfg);
    case ManifoldKind::Hyperbolic: return hyperbolic_log_kernel(dist(manifold, x, y), manifold.dim(), t, cfg);
    }
    throw DomainError("log_heat_kernel: unsupported manifold kind");
}

Tangent log_kernel_grad_fd(const ManifoldSpec& manifold, const Point& x, const Point& y, Diffusivity t,
                           const KernelConfig& cfg) {
    const double h = std::cbrt(kEps) * std::max(1.0, dist(manifold, x, y));
    const Eigen::MatrixXd basis = tangent_basis(manifold, y);
    Eigen::VectorXd coeffs(basis.cols());
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        const Point plus = exp_map(manifold, y, Tangent(y, h * basis.col(j)));
        const Point minus = exp_map(manifold, y, Tangent(y, -h * basis.col(j)));
        coeffs[j] = (log_heat_kernel(manifold, x, plus, t, cfg) - log_heat_kernel(manifold, x, minus, t, cfg)) /
                    (2.0 * h);
    }
    return Tangent(y, basis * coeffs);
}

Tangent log_kernel_grad(const ManifoldSpec& manifold, const Point& x, const Point& y, Diffusivity t,
                        const KernelConfig& cfg) {
    switch (manifold.kind()) {
    case ManifoldKind::Euclidean:
        if (!(x.manifold() == manifold) || !(y.manifold() == manifold)) {
            throw DomainError("log_kernel_grad: points do not lie on " + to_string(manifold));
        }
        return Tangent(y, (x.coords() - y.coords()) / (2.0 * t.value()));
    case ManifoldKind::Circle: {
        if (!(x.manifold() == manifold) || !(y.manifold() == manifold)) {
            throw DomainError("log_kernel_grad: points do not lie on " + to_string(manifold));
        }
        const double delta = signed_arc(x.angle(), y.angle());
        return Tangent(y, Eigen::VectorXd::Constant(1, circle_dlog_kernel(delta, t, cfg)));
    }
    default: return log_kernel_grad_fd(manifold, x, y, t, cfg);
    }
}

}  // namespace diffmean
