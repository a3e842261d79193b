#pragma once

// Reference computations used as test oracles. None of these call into the
// library's kernel or optimizer code; they are deliberately simple, slow and
// done in long double or multiprecision where it helps.

#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

inline constexpr long double kPi = std::numbers::pi_v<long double>;

/// Legendre P_l(s) via Bonnet's recursion (n+1) P_{n+1} = (2n+1) s P_n - n P_{n-1}.
inline long double legendre(int l, long double s) {
    long double p0 = 1.0L;
    if (l == 0) return p0;
    long double p1 = s;
    for (int n = 1; n < l; ++n) {
        const long double p2 = ((2.0L * n + 1.0L) * s * p1 - n * p0) / (n + 1.0L);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/**
 * Heat kernel on S^2 by direct summation, sum (2l+1)/(4 pi) e^{-l(l+1)t} P_l(c),
 * in 160-digit arithmetic: near the antipode at t = 0.01 the terms cancel
 * down to about e^-250.
 * Returns ln p.
 */
inline double sphere2_log_kernel(double c, double t, int terms = 400) {
    using mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<160>>;
    const mp s = c;
    mp p0 = 1, p1 = s;
    mp sum = 1;
    for (int l = 1; l < terms; ++l) {
        sum += (2 * l + 1) * exp(-mp(l) * (l + 1) * t) * p1;
        const mp p2 = ((2 * l + 1) * s * p1 - l * p0) / (l + 1);
        p0 = p1;
        p1 = p2;
    }
    return static_cast<double>(log(sum / (4 * boost::math::constants::pi<mp>())));
}

/// Circle heat kernel as a wrapped Gaussian; 8 images each side reach e^-126 relative for t <= 5.
inline long double circle_kernel(long double delta, long double t, int images = 8) {
    long double sum = 0.0L;
    for (int k = -images; k <= images; ++k) {
        const long double d = delta + 2.0L * kPi * k;
        sum += std::exp(-d * d / (4.0L * t));
    }
    return sum / std::sqrt(4.0L * kPi * t);
}

/// Shorter arc length between two angles.
inline double arc(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
    return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

inline double circle_nll(const std::vector<double>& angles, double y, double t) {
    long double acc = 0.0L;
    for (double a : angles) acc -= std::log(circle_kernel(arc(a, y), t));
    return double(acc / angles.size());
}

inline double circle_frechet(const std::vector<double>& angles, double y) {
    long double acc = 0.0L;
    for (double a : angles) acc += (long double)arc(a, y) * arc(a, y);
    return double(acc / angles.size());
}

/**
 * Global minimizer of a function of one angle: exhaustive scan on `nodes`
 * equally spaced points, then Brent refinement in the bracket around the best
 * node. Returns (angle in [0, 2pi), value).
 */
inline std::pair<double, double> grid_minimize(const std::function<double(double)>& f, int nodes = 10000) {
    const double h = 2.0 * std::numbers::pi / nodes;
    int best = 0;
    double best_val = f(0.0);
    for (int i = 1; i < nodes; ++i) {
        const double v = f(i * h);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const auto [x, v] = boost::math::tools::brent_find_minima(f, (best - 1) * h, (best + 1) * h, 52);
    double a = std::fmod(x, 2.0 * std::numbers::pi);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return {a, v};
}

/// Euclidean kernel in one dimension.
inline double gaussian_log_kernel(double d, double t) {
    return -0.5 * std::log(4.0 * std::numbers::pi * t) - d * d / (4.0 * t);
}

/// Least-squares slope of ys against xs.
inline double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace oracle
