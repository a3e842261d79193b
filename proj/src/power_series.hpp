#pragma once

// Truncated power series arithmetic used for small-argument expansions of the
// hyperbolic radial operator.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace diffmean::detail {

class PowerSeries {
public:
    explicit PowerSeries(std::size_t order) : c_(order, 0.0) {}
    explicit PowerSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

    std::size_t order() const noexcept { return c_.size(); }
    double& operator[](std::size_t i) { return c_[i]; }
    double operator[](std::size_t i) const { return c_[i]; }

    PowerSeries operator*(const PowerSeries& o) const {
        PowerSeries r(order());
        for (std::size_t i = 0; i < order(); ++i) {
            for (std::size_t j = 0; i + j < order(); ++j) r[i + j] += c_[i] * o[j];
        }
        return r;
    }

    PowerSeries operator/(const PowerSeries& o) const {
        if (o[0] == 0.0) throw std::domain_error("power series division by a series vanishing at 0");
        PowerSeries r(order());
        for (std::size_t n = 0; n < order(); ++n) {
            double acc = c_[n];
            for (std::size_t j = 1; j <= n; ++j) acc -= o[j] * r[n - j];
            r[n] = acc / o[0];
        }
        return r;
    }

    PowerSeries scaled(double s) const {
        PowerSeries r(*this);
        for (auto& v : r.c_) v *= s;
        return r;
    }

    /// exp(f) via n b_n = sum_{j=1}^n j f_j b_{n-j}.
    PowerSeries exp() const {
        PowerSeries r(order());
        r[0] = std::exp(c_[0]);
        for (std::size_t n = 1; n < order(); ++n) {
            double acc = 0.0;
            for (std::size_t j = 1; j <= n; ++j) acc += double(j) * c_[j] * r[n - j];
            r[n] = acc / double(n);
        }
        return r;
    }

    /// sqrt(f) for f(0) > 0 via r^2 = f.
    PowerSeries sqrt() const {
        if (!(c_[0] > 0.0)) throw std::domain_error("power series sqrt needs a positive constant term");
        PowerSeries r(order());
        r[0] = std::sqrt(c_[0]);
        for (std::size_t n = 1; n < order(); ++n) {
            double acc = c_[n];
            for (std::size_t j = 1; j < n; ++j) acc -= r[j] * r[n - j];
            r[n] = acc / (2.0 * r[0]);
        }
        return r;
    }

    /// k-th derivative evaluated at w.
    double derivative_at(int k, double w) const {
        double acc = 0.0;
        for (std::size_t n = order(); n-- > static_cast<std::size_t>(k);) {
            double falling = 1.0;
            for (int j = 0; j < k; ++j) falling *= double(n - j);
            acc = acc * w + falling * c_[n];
        }
        return acc;
    }

private:
    std::vector<double> c_;
};

}  // namespace diffmean::detail
