#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace diffmean {

enum class ManifoldKind { Euclidean, Circle, Sphere, Hyperbolic };

std::string to_string(ManifoldKind kind);

/**
 * @brief Tagged description of a data space with its intrinsic dimension.
 *
 * Circle always has dimension 1. Sphere and Hyperbolic require dim >= 2;
 * construction throws DomainError otherwise.
 */
class ManifoldSpec {
public:
    ManifoldSpec(ManifoldKind kind, int dim);

    static ManifoldSpec euclidean(int dim) { return {ManifoldKind::Euclidean, dim}; }
    static ManifoldSpec circle() { return {ManifoldKind::Circle, 1}; }
    static ManifoldSpec sphere(int dim) { return {ManifoldKind::Sphere, dim}; }
    static ManifoldSpec hyperbolic(int dim) { return {ManifoldKind::Hyperbolic, dim}; }

    ManifoldKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }

    /// Length of the coordinate vector: m for Euclidean, 1 for Circle, m+1 otherwise.
    int ambient_dim() const noexcept;

    /// Injectivity radius of the exponential map (pi on Circle/Sphere, +inf otherwise).
    double injectivity_radius() const noexcept;

    bool operator==(const ManifoldSpec&) const = default;

private:
    ManifoldKind kind_;
    int dim_;
};

std::string to_string(const ManifoldSpec& spec);

/**
 * @brief A point on a manifold in its canonical coordinates.
 *
 * Coordinates are projected onto the manifold on construction: circle angles
 * are wrapped into [0, 2pi), sphere vectors are normalized, and hyperboloid
 * vectors get x0 = sqrt(1 + |x_spatial|^2).
 */
class Point {
public:
    Point(const ManifoldSpec& manifold, Eigen::VectorXd coords);

    static Point circle(double angle);
    static Point euclidean(std::initializer_list<double> coords);

    const ManifoldSpec& manifold() const noexcept { return manifold_; }
    const Eigen::VectorXd& coords() const noexcept { return coords_; }

    /// Circle only: the wrapped angle.
    double angle() const;

private:
    ManifoldSpec manifold_;
    Eigen::VectorXd coords_;
};

/// A tangent vector at `base`, stored in the ambient representation.
class Tangent {
public:
    /// Projects `vec` onto the tangent space at `base`.
    Tangent(Point base, Eigen::VectorXd vec);

    const Point& base() const noexcept { return base_; }
    const Eigen::VectorXd& vec() const noexcept { return vec_; }

    /// Riemannian norm (Minkowski norm on the hyperboloid).
    double norm() const;

private:
    Point base_;
    Eigen::VectorXd vec_;
};

/// Minkowski bilinear form -a0*b0 + sum_i ai*bi.
double minkowski_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double dist(const ManifoldSpec& manifold, const Point& x, const Point& y);
Point exp_map(const ManifoldSpec& manifold, const Point& x, const Tangent& v);

/// Throws CutLocusError when y is within 1e-8 of the cut locus of x.
Tangent log_map(const ManifoldSpec& manifold, const Point& x, const Point& y);

/// Orthonormal basis of the tangent space at x, one ambient vector per column.
Eigen::MatrixXd tangent_basis(const ManifoldSpec& manifold, const Point& x);

/// Tangent vector sum_j coeffs[j] * basis_j at x.
Tangent tangent_from_coeffs(const ManifoldSpec& manifold, const Point& x,
                            const Eigen::VectorXd& coeffs);

/**
 * @brief Deterministic random points for property tests.
 *
 * Circle and Sphere draw from the uniform law. Euclidean draws standard normal
 * coordinates; Hyperbolic maps a standard normal tangent vector at the origin
 * (1, 0, ..., 0) through the exponential map.
 */
std::vector<Point> uniform_sample(const ManifoldSpec& manifold, std::uint64_t rng_seed, std::size_t n);

/// Canonical base point: zero vector, angle 0, north pole e0, or hyperboloid origin.
Point origin(const ManifoldSpec& manifold);

}  // namespace diffmean
