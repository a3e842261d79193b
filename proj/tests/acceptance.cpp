// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include "cli_runner.hpp"
#include "diffmean/dataset.hpp"
#include "diffmean/estimation.hpp"
#include "diffmean/heat_kernel.hpp"
#include "diffmean/smeariness.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace diffmean;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Sample turtles() { return read_dataset(TURTLES_CSV, ManifoldKind::Circle); }

double radial_mass(const std::function<double(double)>& log_p, const std::function<double(double)>& log_jac, double hi) {
    auto f = [&](double r) { return std::exp(log_p(r) + log_jac(r)); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, hi, 15, 1e-13);
}

Outcome normalization() {
    double worst_c = 0, worst_s = 0, worst_h = 0;
    for (double t : {0.1, 1.0, 10.0}) {
        const int nodes = 10000;
        double sum = 0.0;
        for (int i = 0; i < nodes; ++i) sum += std::exp(circle_log_kernel(oracle::arc(0.0, 2 * kPi * i / nodes), Diffusivity(t)));
        worst_c = std::max(worst_c, std::abs(sum * 2 * kPi / nodes - 1.0));
        worst_s = std::max(worst_s, std::abs(radial_mass([&](double th) { return sphere_log_kernel(std::cos(th), 2, Diffusivity(t)); },
                                                         [](double th) { return std::log(2 * kPi * std::sin(th)); }, kPi) -
                                             1.0));
        for (int m : {2, 3}) {
            const double area = m == 2 ? 2 * kPi : 4 * kPi;
            const double mass = radial_mass([&](double r) { return hyperbolic_log_kernel(r, m, Diffusivity(t)); },
                                            [&](double r) { return std::log(area) + (m - 1) * std::log(std::sinh(r)); },
                                            (m - 1) * t + 20 * std::sqrt(t) + 5);
            worst_h = std::max(worst_h, std::abs(mass - 1.0));
        }
    }
    return {worst_c <= 1e-8 && worst_s <= 1e-6 && worst_h <= 1e-5,
            "max |mass-1|: circle " + num(worst_c) + ", sphere " + num(worst_s) + ", hyperbolic " + num(worst_h)};
}

Outcome symmetry_positivity() {
    const std::vector<ManifoldSpec> specs{ManifoldSpec::euclidean(2), ManifoldSpec::circle(), ManifoldSpec::sphere(2),
                                          ManifoldSpec::hyperbolic(2), ManifoldSpec::hyperbolic(3)};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> log_t(std::log(0.05), std::log(5.0));
    int asym = 0, nonpos = 0, total = 0;
    for (const auto& m : specs) {
        const auto xs = uniform_sample(m, 100, 1000);
        const auto ys = uniform_sample(m, 200, 1000);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const Diffusivity t(std::exp(log_t(rng)));
            const double a = log_heat_kernel(m, xs[i], ys[i], t);
            asym += a != log_heat_kernel(m, ys[i], xs[i], t);
            nonpos += !(std::exp(a) > 0.0);
            ++total;
        }
    }
    return {asym == 0 && nonpos == 0,
            std::to_string(total) + " triples, " + std::to_string(asym) + " asymmetric, " + std::to_string(nonpos) + " non-positive"};
}

Outcome small_t_limit() {
    const auto c = ManifoldSpec::circle();
    const auto s2 = ManifoldSpec::sphere(2);
    const auto h3 = ManifoldSpec::hyperbolic(3);
    struct Case {
        ManifoldSpec m;
        Point x, y;
    };
    const std::vector<Case> cases{{c, Point::circle(0.0), Point::circle(2.0)},
                                  {s2, Point(s2, Eigen::Vector3d(1, 0, 0)), Point(s2, Eigen::Vector3d(std::cos(1.0), std::sin(1.0), 0))},
                                  {h3, origin(h3), Point(h3, Eigen::Vector4d(0, std::sinh(1.0), 0, 0))}};
    double worst = 0.0;
    bool decreasing = true;
    for (const auto& k : cases) {
        const double d2 = std::pow(dist(k.m, k.x, k.y), 2);
        double prev = 1e300;
        for (double t : {1e-2, 1e-3, 1e-4}) {
            const double err = std::abs(-4 * t * log_heat_kernel(k.m, k.x, k.y, Diffusivity(t)) - d2) / d2;
            decreasing = decreasing && err < prev;
            prev = err;
        }
        worst = std::max(worst, prev);
    }
    return {decreasing && worst < 0.01, "relative error at t=1e-4: " + num(worst)};
}

Outcome legendre_identity() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double s = unif(rng);
        for (int l = 0; l <= 20; ++l) worst = std::max(worst, std::abs(gegenbauer(l, 0.5, s) - double(oracle::legendre(l, s))));
    }
    return {worst <= 1e-12, "max |C_l^(1/2) - P_l| = " + num(worst)};
}

Outcome circle_dual() {
    double worst = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double t = 0.05 * std::pow(100.0, i / 60.0);
        for (int j = 0; j <= 60; ++j) {
            const double arc = kPi * j / 60.0;
            worst = std::max(worst, std::abs(circle_log_kernel_wrapped(arc, Diffusivity(t)) -
                                             circle_log_kernel_spectral(arc, Diffusivity(t))));
        }
    }
    return {worst <= 1e-12, "max |wrapped - spectral| in ln p = " + num(worst)};
}

Outcome h3_closed_form() {
    double worst = 0.0;
    for (double t : {0.1, 1.0}) {
        for (double rho = 1e-6; rho <= 10.0; rho *= 1.2) {
            const double ref = -1.5 * std::log(4 * kPi * t) + std::log(rho / std::sinh(rho)) - t - rho * rho / (4 * t);
            worst = std::max(worst, std::abs(std::expm1(hyperbolic_log_kernel(rho, 3, Diffusivity(t)) - ref)));
        }
    }
    return {worst <= 1e-10, "max relative error " + num(worst)};
}

Outcome euclidean_t_independence() {
    const Sample s(ManifoldSpec::euclidean(1), {Point::euclidean({1}), Point::euclidean({2}), Point::euclidean({3})});
    double worst = 0.0;
    for (double t : {0.1, 1.0, 10.0}) worst = std::max(worst, std::abs(diffusion_mean(s, Diffusivity(t)).optimum.coords()[0] - 2.0));
    return {worst <= 1e-8, "max |mean - 2| = " + num(worst)};
}

Outcome grid_oracle() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> size(5, 50);
    std::uniform_real_distribution<double> unif(0.0, 2 * kPi);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    int ties = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = size(rng);
        const double c1 = unif(rng), c2 = unif(rng), spread = 0.2 + 0.25 * unif(rng);
        std::vector<Point> pts;
        std::vector<double> angles;
        for (int i = 0; i < n; ++i) {
            pts.push_back(Point::circle((i % 3 == 0 ? c2 : c1) + spread * normal(rng)));
            angles.push_back(pts.back().angle());
        }
        const Sample s(ManifoldSpec::circle(), pts);
        const auto check = [&](const EstimateReport& r, const std::function<double(double)>& f) {
            const auto [a, v] = oracle::grid_minimize(f);
            if (!r.near_ties.empty()) {
                ++ties;
                worst = std::max(worst, std::max(0.0, r.objective - v));
                return;
            }
            worst = std::max(worst, oracle::arc(r.optimum.angle(), a));
        };
        check(frechet_mean(s), [&](double y) { return oracle::circle_frechet(angles, y); });
        for (double t : {0.1, 1.0}) {
            check(diffusion_mean(s, Diffusivity(t)), [&](double y) { return oracle::circle_nll(angles, y, t); });
        }
    }
    return {worst <= 1e-6, "60 fits, max angular gap " + num(worst) + " rad, " + std::to_string(ties) + " tied sets"};
}

Outcome euclidean_calibration() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    std::vector<Point> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(Point::euclidean({normal(rng)}));
    const Sample s(ManifoldSpec::euclidean(1), pts);
    const VarianceRatio r = variance_ratio(s, Criterion::diffusion(Diffusivity(1.0)), 100, BootstrapConfig{.B = 1000, .seed = 1});
    return {r.ratio >= 0.85 && r.ratio <= 1.15, "m_100 = " + num(r.ratio) + " +- " + num(r.mc_stderr)};
}

Outcome turtle_fit() {
    const auto start = std::chrono::steady_clock::now();
    const JointFit fit = joint_fit(turtles(), 0.01, 10.0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::abs(fit.t.value() - 0.963) <= 0.02 && secs < 120 && !fit.boundary,
            "t_hat = " + num(fit.t.value()) + ", mu_hat = " + num(fit.report.optimum.angle() * 180 / kPi) + " deg, " +
                num(secs) + " s"};
}

Outcome turtle_trend() {
    const Sample s = turtles();
    const BootstrapConfig bcfg{.B = 1000, .seed = 0};
    const double frechet = fss_magnitude(variance_ratio_curve(s, Criterion::frechet(), bcfg));
    std::vector<double> mags;
    std::string detail = "S_FSS frechet " + num(frechet);
    for (double t : {0.1, 0.3, 0.5, 1.0}) {
        mags.push_back(fss_magnitude(variance_ratio_curve(s, Criterion::diffusion(Diffusivity(t)), bcfg)));
        detail += ", t=" + num(t) + " " + num(mags.back());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < mags.size(); ++i) decreasing = decreasing && mags[i] < mags[i - 1];
    return {decreasing && frechet > 2.0, detail};
}

Outcome small_t_frechet() {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    std::vector<Point> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(Point::circle(4.0 + 0.07 * normal(rng)));
    const Sample s(ManifoldSpec::circle(), pts);
    const double d = dist(s.manifold(), diffusion_mean(s, Diffusivity(1e-2)).optimum, frechet_mean(s).optimum);
    return {d < 1e-2, "dist = " + num(d)};
}

Outcome fss_determinism() {
    const fs::path a = cli::scratch("accept_fss_1"), b = cli::scratch("accept_fss_4");
    const std::string args = "fss --data " + std::string(TURTLES_CSV) + " --B 100 --seed 17";
    const auto ra = cli::run(args + " --out " + a.string(), "1");
    const auto rb = cli::run(args + " --out " + b.string(), "4");
    const std::string ta = cli::slurp(a / "fss.csv"), tb = cli::slurp(b / "fss.csv");
    const bool same = ra.code == 0 && rb.code == 0 && !ta.empty() && ta == tb &&
                      cli::slurp(a / "fss_summary.csv") == cli::slurp(b / "fss_summary.csv") && ra.out == rb.out;
    return {same, std::to_string(ta.size()) + " bytes, threads 1 vs 4 " + (same ? "identical" : "differ")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"heat kernel normalization", normalization},
        {"kernel symmetry and positivity", symmetry_positivity},
        {"small-t distance limit", small_t_limit},
        {"Gegenbauer/Legendre identity", legendre_identity},
        {"circle wrapped/spectral agreement", circle_dual},
        {"H^3 closed form", h3_closed_form},
        {"Euclidean t-independence", euclidean_t_independence},
        {"circle grid-oracle equivalence", grid_oracle},
        {"Euclidean variance-ratio calibration", euclidean_calibration},
        {"turtle joint fit", turtle_fit},
        {"turtle smeariness trend", turtle_trend},
        {"small-t / Frechet consistency", small_t_frechet},
        {"fss determinism across threads", fss_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
