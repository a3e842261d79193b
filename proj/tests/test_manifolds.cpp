#include "diffmean/errors.hpp"
#include "diffmean/manifold.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace diffmean;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<ManifoldSpec> all_specs() {
    return {ManifoldSpec::euclidean(1), ManifoldSpec::euclidean(3), ManifoldSpec::circle(),
            ManifoldSpec::sphere(2),    ManifoldSpec::sphere(4),    ManifoldSpec::hyperbolic(2),
            ManifoldSpec::hyperbolic(3)};
}

// Random tangent vector at x with norm uniform in [0, max_norm].
Tangent random_tangent(const ManifoldSpec& m, const Point& x, std::mt19937_64& rng, double max_norm) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, max_norm);
    Eigen::VectorXd c(m.dim());
    for (int i = 0; i < m.dim(); ++i) c[i] = normal(rng);
    c *= unif(rng) / c.norm();
    return tangent_from_coeffs(m, x, c);
}

void check_invariants(const Point& p) {
    const auto& c = p.coords();
    switch (p.manifold().kind()) {
    case ManifoldKind::Circle:
        CHECK(c[0] >= 0.0);
        CHECK(c[0] < 2.0 * kPi);
        break;
    case ManifoldKind::Sphere: CHECK(std::abs(c.norm() - 1.0) <= 1e-12); break;
    case ManifoldKind::Hyperbolic:
        CHECK(std::abs(minkowski_dot(c, c) + 1.0) <= 1e-10);
        CHECK(c[0] >= 1.0);
        break;
    default: break;
    }
}

}  // namespace

TEST_CASE("manifold specs validate their dimension") {
    CHECK_THROWS_AS(ManifoldSpec::sphere(1), DomainError);
    CHECK_THROWS_AS(ManifoldSpec::hyperbolic(1), DomainError);
    CHECK_THROWS_AS(ManifoldSpec::euclidean(0), DomainError);
    CHECK_THROWS_AS(ManifoldSpec(ManifoldKind::Circle, 2), DomainError);
    CHECK(ManifoldSpec::sphere(2).ambient_dim() == 3);
    CHECK(ManifoldSpec::circle().injectivity_radius() == doctest::Approx(kPi));
    CHECK(std::isinf(ManifoldSpec::hyperbolic(2).injectivity_radius()));
}

TEST_CASE("points are projected onto the manifold") {
    CHECK(Point::circle(-kPi / 2).angle() == doctest::Approx(3 * kPi / 2));
    CHECK(Point::circle(5 * kPi).angle() == doctest::Approx(kPi));
    const Point s(ManifoldSpec::sphere(2), Eigen::Vector3d(3, 0, 4));
    CHECK(s.coords().norm() == doctest::Approx(1.0).epsilon(1e-15));
    const Point h(ManifoldSpec::hyperbolic(2), Eigen::Vector3d(0, 3, 4));
    CHECK(h.coords()[0] == doctest::Approx(std::sqrt(26.0)));
    CHECK_THROWS_AS(Point(ManifoldSpec::sphere(2), Eigen::Vector2d(1, 0)), DomainError);
    CHECK_THROWS_AS(Point(ManifoldSpec::sphere(2), Eigen::Vector3d::Zero()), DomainError);
}

TEST_CASE("dist examples") {
    CHECK(dist(ManifoldSpec::circle(), Point::circle(0), Point::circle(3 * kPi / 2)) == doctest::Approx(kPi / 2));
    const auto s2 = ManifoldSpec::sphere(2);
    CHECK(dist(s2, Point(s2, Eigen::Vector3d(1, 0, 0)), Point(s2, Eigen::Vector3d(0, 1, 0))) ==
          doctest::Approx(kPi / 2));
    CHECK(dist(ManifoldSpec::euclidean(2), Point::euclidean({0, 0}), Point::euclidean({3, 4})) == doctest::Approx(5.0));
    const auto h2 = ManifoldSpec::hyperbolic(2);
    const Point o = origin(h2);
    const Point y(h2, Eigen::Vector3d(0, std::sinh(2.0), 0));
    CHECK(dist(h2, o, y) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(dist(s2, Point::circle(0), Point::circle(1)), DomainError);
}

TEST_CASE("exp and log examples") {
    const auto c = ManifoldSpec::circle();
    const Point zero = Point::circle(0);
    CHECK(exp_map(c, zero, Tangent(zero, Eigen::VectorXd::Constant(1, kPi / 2))).angle() == doctest::Approx(kPi / 2));
    CHECK(log_map(c, zero, Point::circle(kPi / 2)).vec()[0] == doctest::Approx(kPi / 2));
    CHECK(log_map(c, Point::circle(0.1), Point::circle(2 * kPi - 0.1)).vec()[0] == doctest::Approx(-0.2));

    const auto s2 = ManifoldSpec::sphere(2);
    const Point e1(s2, Eigen::Vector3d(1, 0, 0));
    const Point e2 = exp_map(s2, e1, Tangent(e1, Eigen::Vector3d(0, kPi / 2, 0)));
    CHECK((e2.coords() - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(log_map(s2, e1, Point(s2, Eigen::Vector3d(-1, 0, 0))), CutLocusError);
    CHECK_THROWS_AS(log_map(c, zero, Point::circle(kPi)), CutLocusError);

    const auto r2 = ManifoldSpec::euclidean(2);
    const Tangent v = log_map(r2, Point::euclidean({1, 2}), Point::euclidean({4, -1}));
    CHECK(v.vec()[0] == doctest::Approx(3.0));
    CHECK(v.vec()[1] == doctest::Approx(-3.0));

    for (const auto& m : all_specs()) {
        const Point x = uniform_sample(m, 3, 1).front();
        CHECK((exp_map(m, x, Tangent(x, Eigen::VectorXd::Zero(m.ambient_dim()))).coords() - x.coords()).norm() == 0.0);
    }
}

TEST_CASE("tangent vectors are projected onto the tangent space") {
    const auto s2 = ManifoldSpec::sphere(2);
    const Point x(s2, Eigen::Vector3d(1, 1, 1));
    const Tangent v(x, Eigen::Vector3d(1, 2, 3));
    CHECK(std::abs(v.vec().dot(x.coords())) <= 1e-10);
    const auto h3 = ManifoldSpec::hyperbolic(3);
    const Point y = uniform_sample(h3, 5, 1).front();
    const Tangent w(y, Eigen::Vector4d(1, 2, 3, 4));
    CHECK(std::abs(minkowski_dot(w.vec(), y.coords())) <= 1e-10);
}

TEST_CASE("uniform_sample") {
    const auto c = ManifoldSpec::circle();
    const auto a = uniform_sample(c, 17, 3);
    const auto b = uniform_sample(c, 17, 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i].angle() == b[i].angle());
    CHECK_THROWS_AS(uniform_sample(c, 1, 0), DomainError);

    const auto s2 = ManifoldSpec::sphere(2);
    const auto pts = uniform_sample(s2, 2024, 10000);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : pts) mean += p.coords();
    mean /= double(pts.size());
    // each coordinate has variance 1/3, so the norm of the mean is about 1/sqrt(n)
    CHECK(mean.norm() < 0.05);

    for (const auto& m : all_specs()) {
        for (const auto& p : uniform_sample(m, 9, 50)) check_invariants(p);
    }
}

TEST_CASE("exp/log round trip and inverse property") {
    std::mt19937_64 rng(11);
    for (const auto& m : all_specs()) {
        CAPTURE(to_string(m));
        const auto xs = uniform_sample(m, 101, 200);
        for (const auto& x : xs) {
            const Tangent v = random_tangent(m, x, rng, 1.0);
            const Point y = exp_map(m, x, v);
            CHECK(std::abs(dist(m, x, y) - v.norm()) <= 1e-9);

            const double max_norm = std::isfinite(m.injectivity_radius()) ? m.injectivity_radius() - 0.1 : 5.0;
            const Tangent w = random_tangent(m, x, rng, max_norm);
            const Tangent back = log_map(m, x, exp_map(m, x, w));
            CHECK((back.vec() - w.vec()).norm() <= 1e-9);
            CHECK(std::abs(back.norm() - dist(m, x, exp_map(m, x, w))) <= 1e-9);
        }
    }
}

TEST_CASE("dist is symmetric and satisfies the triangle inequality") {
    for (const auto& m : all_specs()) {
        CAPTURE(to_string(m));
        const auto a = uniform_sample(m, 1, 1000);
        const auto b = uniform_sample(m, 2, 1000);
        const auto c = uniform_sample(m, 3, 1000);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double ab = dist(m, a[i], b[i]);
            CHECK(ab == dist(m, b[i], a[i]));
            CHECK(ab >= 0.0);
            CHECK(dist(m, a[i], c[i]) <= ab + dist(m, b[i], c[i]) + 1e-9);
            CHECK(dist(m, a[i], a[i]) <= 1e-7);
        }
    }
}

TEST_CASE("constraint drift stays bounded along long exp/log chains") {
    std::mt19937_64 rng(5);
    for (const auto& m : all_specs()) {
        CAPTURE(to_string(m));
        Point x = uniform_sample(m, 77, 1).front();
        for (int i = 0; i < 2000; ++i) {
            const Point y = exp_map(m, x, random_tangent(m, x, rng, 0.5));
            x = exp_map(m, y, log_map(m, y, x));
            check_invariants(x);
        }
    }
}
