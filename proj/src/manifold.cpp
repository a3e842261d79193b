#include "diffmean/manifold.hpp"

#include "diffmean/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace diffmean {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCutLocusTol = 1e-8;

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// Signed difference b - a mapped into (-pi, pi].
double signed_arc(double a, double b) {
    double d = std::remainder(b - a, kTwoPi);
    if (d <= -std::numbers::pi) d += kTwoPi;
    return d;
}

void require_on(const ManifoldSpec& m, const Point& p) {
    if (!(p.manifold() == m)) {
        throw DomainError("point on " + to_string(p.manifold()) + " used with " + to_string(m));
    }
}

}  // namespace

std::string to_string(ManifoldKind kind) {
    switch (kind) {
    case ManifoldKind::Euclidean: return "euclidean";
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Sphere: return "sphere";
    case ManifoldKind::Hyperbolic: return "hyperbolic";
    }
    return "unknown";
}

std::string to_string(const ManifoldSpec& spec) {
    return to_string(spec.kind()) + "(" + std::to_string(spec.dim()) + ")";
}

ManifoldSpec::ManifoldSpec(ManifoldKind kind, int dim) : kind_(kind), dim_(dim) {
    if (dim < 1) throw DomainError("manifold dimension must be >= 1");
    if (kind == ManifoldKind::Circle && dim != 1) throw DomainError("circle has dimension 1");
    if ((kind == ManifoldKind::Sphere || kind == ManifoldKind::Hyperbolic) && dim < 2) {
        throw DomainError(to_string(kind) + " requires dimension >= 2");
    }
}

int ManifoldSpec::ambient_dim() const noexcept {
    switch (kind_) {
    case ManifoldKind::Euclidean: return dim_;
    case ManifoldKind::Circle: return 1;
    default: return dim_ + 1;
    }
}

double ManifoldSpec::injectivity_radius() const noexcept {
    if (kind_ == ManifoldKind::Circle || kind_ == ManifoldKind::Sphere) return std::numbers::pi;
    return std::numeric_limits<double>::infinity();
}

Point::Point(const ManifoldSpec& manifold, Eigen::VectorXd coords)
    : manifold_(manifold), coords_(std::move(coords)) {
    if (coords_.size() != manifold_.ambient_dim()) {
        throw DomainError("expected " + std::to_string(manifold_.ambient_dim()) + " coordinates for " +
                          to_string(manifold_) + ", got " + std::to_string(coords_.size()));
    }
    if (!coords_.allFinite()) throw DomainError("non-finite point coordinates");
    switch (manifold_.kind()) {
    case ManifoldKind::Euclidean: break;
    case ManifoldKind::Circle: coords_[0] = wrap_angle(coords_[0]); break;
    case ManifoldKind::Sphere: {
        const double n = coords_.norm();
        if (n == 0.0) throw DomainError("zero vector is not on the sphere");
        coords_ /= n;
        break;
    }
    case ManifoldKind::Hyperbolic: {
        const auto spatial = coords_.tail(coords_.size() - 1);
        coords_[0] = std::sqrt(1.0 + spatial.squaredNorm());
        break;
    }
    }
}

Point Point::circle(double angle) {
    return Point(ManifoldSpec::circle(), Eigen::VectorXd::Constant(1, angle));
}

Point Point::euclidean(std::initializer_list<double> coords) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) v[i++] = c;
    return Point(ManifoldSpec::euclidean(static_cast<int>(coords.size())), std::move(v));
}

double Point::angle() const {
    if (manifold_.kind() != ManifoldKind::Circle) throw DomainError("angle() on a non-circle point");
    return coords_[0];
}

double minkowski_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.tail(a.size() - 1).dot(b.tail(b.size() - 1)) - a[0] * b[0];
}

Tangent::Tangent(Point base, Eigen::VectorXd vec) : base_(std::move(base)), vec_(std::move(vec)) {
    const auto& x = base_.coords();
    if (vec_.size() != x.size()) throw DomainError("tangent vector has wrong dimension");
    switch (base_.manifold().kind()) {
    case ManifoldKind::Sphere: vec_ -= vec_.dot(x) * x; break;
    case ManifoldKind::Hyperbolic: vec_ += minkowski_dot(vec_, x) * x; break;
    default: break;
    }
}

double Tangent::norm() const {
    if (base_.manifold().kind() == ManifoldKind::Hyperbolic) {
        return std::sqrt(std::max(0.0, minkowski_dot(vec_, vec_)));
    }
    return vec_.norm();
}

double dist(const ManifoldSpec& manifold, const Point& x, const Point& y) {
    require_on(manifold, x);
    require_on(manifold, y);
    const auto& a = x.coords();
    const auto& b = y.coords();
    switch (manifold.kind()) {
    case ManifoldKind::Euclidean: return (a - b).norm();
    case ManifoldKind::Circle: return std::abs(signed_arc(a[0], b[0]));
    case ManifoldKind::Sphere: {
        // atan2 of chord and antichord stays accurate near 0 and near pi
        const double chord = (a - b).norm();
        const double sum = (a + b).norm();
        return 2.0 * std::atan2(chord, sum);
    }
    case ManifoldKind::Hyperbolic: {
        const double c = -minkowski_dot(a, b);
        if (c > 2.0) return std::acosh(c);
        // near the diagonal use the Minkowski chord |a-b|_M = 2 sinh(rho/2)
        const Eigen::VectorXd d = a - b;
        const double chord2 = std::max(0.0, minkowski_dot(d, d));
        return 2.0 * std::asinh(0.5 * std::sqrt(chord2));
    }
    }
    throw DomainError("unsupported manifold");
}

Point exp_map(const ManifoldSpec& manifold, const Point& x, const Tangent& v) {
    require_on(manifold, x);
    require_on(manifold, v.base());
    const auto& p = x.coords();
    const auto& u = v.vec();
    switch (manifold.kind()) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::Circle: return Point(manifold, p + u);
    case ManifoldKind::Sphere: {
        const double n = u.norm();
        if (n == 0.0) return x;
        return Point(manifold, std::cos(n) * p + (std::sin(n) / n) * u);
    }
    case ManifoldKind::Hyperbolic: {
        const double n = v.norm();
        if (n == 0.0) return x;
        return Point(manifold, std::cosh(n) * p + (std::sinh(n) / n) * u);
    }
    }
    throw DomainError("unsupported manifold");
}

Tangent log_map(const ManifoldSpec& manifold, const Point& x, const Point& y) {
    require_on(manifold, x);
    require_on(manifold, y);
    const auto& p = x.coords();
    const auto& q = y.coords();
    switch (manifold.kind()) {
    case ManifoldKind::Euclidean: return Tangent(x, q - p);
    case ManifoldKind::Circle: {
        const double d = signed_arc(p[0], q[0]);
        if (std::abs(d) > std::numbers::pi - kCutLocusTol) {
            throw CutLocusError("log_map: point is at the antipode on the circle");
        }
        return Tangent(x, Eigen::VectorXd::Constant(1, d));
    }
    case ManifoldKind::Sphere: {
        const double theta = dist(manifold, x, y);
        if (theta > std::numbers::pi - kCutLocusTol) {
            throw CutLocusError("log_map: point is at the antipode on the sphere");
        }
        Eigen::VectorXd u = q - p.dot(q) * p;
        const double n = u.norm();
        if (n == 0.0 || theta == 0.0) return Tangent(x, Eigen::VectorXd::Zero(p.size()));
        return Tangent(x, (theta / n) * u);
    }
    case ManifoldKind::Hyperbolic: {
        const double rho = dist(manifold, x, y);
        Eigen::VectorXd u = q + minkowski_dot(p, q) * p;
        const double n = std::sqrt(std::max(0.0, minkowski_dot(u, u)));
        if (n == 0.0 || rho == 0.0) return Tangent(x, Eigen::VectorXd::Zero(p.size()));
        return Tangent(x, (rho / n) * u);
    }
    }
    throw DomainError("unsupported manifold");
}

Eigen::MatrixXd tangent_basis(const ManifoldSpec& manifold, const Point& x) {
    require_on(manifold, x);
    const int m = manifold.dim();
    const auto& p = x.coords();
    switch (manifold.kind()) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::Circle: return Eigen::MatrixXd::Identity(m, m);
    case ManifoldKind::Sphere: {
        // Householder reflection H with H e0 = p; columns 1..m of H span p^perp.
        Eigen::VectorXd w = p;
        w[0] += (p[0] >= 0.0 ? 1.0 : -1.0);
        const double wn2 = w.squaredNorm();
        Eigen::MatrixXd h = Eigen::MatrixXd::Identity(m + 1, m + 1) - (2.0 / wn2) * w * w.transpose();
        return h.rightCols(m);
    }
    case ManifoldKind::Hyperbolic: {
        // Lorentz boost taking the origin to p, applied to e1..em.
        const auto spatial = p.tail(m);
        Eigen::MatrixXd basis(m + 1, m);
        basis.row(0) = spatial.transpose();
        basis.bottomRows(m) =
            Eigen::MatrixXd::Identity(m, m) + spatial * spatial.transpose() / (1.0 + p[0]);
        return basis;
    }
    }
    throw DomainError("unsupported manifold");
}

Tangent tangent_from_coeffs(const ManifoldSpec& manifold, const Point& x, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != manifold.dim()) throw DomainError("tangent coefficient vector has wrong size");
    return Tangent(x, tangent_basis(manifold, x) * coeffs);
}

Point origin(const ManifoldSpec& manifold) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(manifold.ambient_dim());
    if (manifold.kind() == ManifoldKind::Sphere || manifold.kind() == ManifoldKind::Hyperbolic) c[0] = 1.0;
    return Point(manifold, std::move(c));
}

std::vector<Point> uniform_sample(const ManifoldSpec& manifold, std::uint64_t rng_seed, std::size_t n) {
    if (n == 0) throw DomainError("uniform_sample: n must be >= 1");
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point> out;
    out.reserve(n);
    const int m = manifold.dim();
    for (std::size_t i = 0; i < n; ++i) {
        switch (manifold.kind()) {
        case ManifoldKind::Circle: out.push_back(Point::circle(kTwoPi * unit(rng))); break;
        case ManifoldKind::Euclidean:
        case ManifoldKind::Sphere: {
            Eigen::VectorXd v(manifold.ambient_dim());
            for (auto& c : v) c = normal(rng);
            out.emplace_back(manifold, std::move(v));
            break;
        }
        case ManifoldKind::Hyperbolic: {
            Eigen::VectorXd coeffs(m);
            for (auto& c : coeffs) c = normal(rng);
            const Point o = origin(manifold);
            out.push_back(exp_map(manifold, o, tangent_from_coeffs(manifold, o, coeffs)));
            break;
        }
        }
    }
    return out;
}

}  // namespace diffmean
