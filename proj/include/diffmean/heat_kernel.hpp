#pragma once

#include "diffmean/manifold.hpp"

namespace diffmean {

/**
 * @brief Accuracy controls for heat kernel evaluation.
 *
 * Series are truncated once the next term is below tail_tol in absolute value
 * and below machine precision relative to the partial sum. max_terms caps the
 * number of series terms. The even-dimensional hyperbolic kernel integrates up
 * to rho + quad_upper_sigma * sqrt(t) with relative tolerance quad_rel_tol.
 */
struct KernelConfig {
    double tail_tol = 1e-12;
    int max_terms = 10000;
    double quad_rel_tol = 1e-10;
    double quad_upper_sigma = 12.0;

    /// Throws DomainError naming the offending field.
    void validate() const;
};

/// Strictly positive diffusion time t.
class Diffusivity {
public:
    explicit Diffusivity(double t);
    double value() const noexcept { return t_; }

private:
    double t_;
};

/**
 * @brief ln p(x, y, t) for the heat kernel of the Laplace-Beltrami operator.
 *
 * Kernels solve d/dt p = Delta p, so the Euclidean kernel is
 * (4 pi t)^(-m/2) exp(-|x-y|^2 / 4t). The result is symmetric in x and y and
 * depends on them only through their geodesic distance (or inner product on
 * the sphere).
 */
double log_heat_kernel(const ManifoldSpec& manifold, const Point& x, const Point& y, Diffusivity t,
                       const KernelConfig& cfg = {});

double euclidean_log_kernel(double distance, int dim, Diffusivity t);

/// Circle kernel at arc length `arc` in [0, pi]; wrapped sum for t <= 1, spectral sum above.
double circle_log_kernel(double arc, Diffusivity t, const KernelConfig& cfg = {});

/// ln of (4 pi t)^(-1/2) sum_k exp(-(arc + 2 pi k)^2 / 4t).
double circle_log_kernel_wrapped(double arc, Diffusivity t, const KernelConfig& cfg = {});

/**
 * @brief ln of (1/2pi)(1 + 2 sum_{k>=1} exp(-k^2 t) cos(k arc)).
 *
 * When the sum cancels below double resolution (small t, arc near pi) it is
 * re-evaluated in extended precision.
 */
double circle_log_kernel_spectral(double arc, Diffusivity t, const KernelConfig& cfg = {});

/// d/d(delta) ln p for the circle kernel as a function of the signed offset delta = y - x.
double circle_dlog_kernel(double delta, Diffusivity t, const KernelConfig& cfg = {});

/**
 * @brief Sphere S^m kernel as a function of c = <x, y>.
 *
 * Sums the Gegenbauer eigenfunction expansion. Throws AccuracyError when the
 * truncation point lies beyond cfg.max_terms.
 */
double sphere_log_kernel(double c, int dim, Diffusivity t, const KernelConfig& cfg = {});

/// Gegenbauer polynomial C_l^alpha(s) by the three-term recurrence.
double gegenbauer(int l, double alpha, double s);

/// Hyperbolic H^m kernel at geodesic distance rho.
double hyperbolic_log_kernel(double rho, int dim, Diffusivity t, const KernelConfig& cfg = {});

/**
 * @brief Riemannian gradient of y -> ln p(x, y, t), as a tangent vector at y.
 *
 * Euclidean and Circle use closed forms. Sphere and Hyperbolic use central
 * differences along geodesics through y in an orthonormal tangent basis.
 */
Tangent log_kernel_grad(const ManifoldSpec& manifold, const Point& x, const Point& y, Diffusivity t,
                        const KernelConfig& cfg = {});

/// Central-difference gradient for any manifold; cross-check for the closed forms.
Tangent log_kernel_grad_fd(const ManifoldSpec& manifold, const Point& x, const Point& y, Diffusivity t,
                           const KernelConfig& cfg = {});

}  // namespace diffmean
