#include "diffmean/estimation.hpp"

#include "diffmean/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace diffmean {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Local minima closer than this are the same stationary point.
constexpr double kDistinctRadius = 1e-4;
constexpr std::size_t kCoarseGrid = 64;

bool is_cut_point(const ManifoldSpec& m, const Point& x, const Point& y) {
    return m.injectivity_radius() < std::numeric_limits<double>::infinity() &&
           dist(m, x, y) > std::numbers::pi - 1e-8;
}

Point antipode(const Point& p) {
    if (p.manifold().kind() == ManifoldKind::Circle) return Point::circle(p.angle() + std::numbers::pi);
    return Point(p.manifold(), -p.coords());
}

struct DescentResult {
    Point end;
    double objective;
    double grad_norm;
    int iterations;
    bool converged;
};

// Riemannian gradient descent with Armijo backtracking and exp-map retraction.
DescentResult descend(const Sample& s, const Criterion& c, Point y, const OptimOptions& opts,
                      const KernelConfig& cfg) {
    const ManifoldSpec& m = s.manifold();
    double f = objective(s, y, c, cfg);
    Tangent g = objective_grad(s, y, c, cfg);
    double gn = g.norm();
    double step = opts.initial_step;
    const double max_step = std::isfinite(m.injectivity_radius()) ? m.injectivity_radius() : 1e6;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        if (gn <= opts.grad_tol) return {y, f, gn, it, true};
        bool accepted = false;
        while (step * gn > 1e-18) {
            // never move further than half the injectivity radius in one step
            const double len = std::min(step, 0.5 * max_step / gn);
            const Point trial = exp_map(m, y, Tangent(y, -len * g.vec()));
            const double ft = objective(s, trial, c, cfg);
            const bool armijo = ft <= f - 1e-4 * len * gn * gn;
            bool roundoff = false;
            std::optional<Tangent> gt;
            if (!armijo && ft <= f + 8.0 * kEps * std::abs(f)) {
                gt = objective_grad(s, trial, c, cfg);
                roundoff = gt->norm() < gn;
            }
            if (armijo || roundoff) {
                const Tangent gnew = gt ? *gt : objective_grad(s, trial, c, cfg);
                // Secant curvature along the step direction gives the next step
                // length (Barzilai-Borwein); fall back to doubling otherwise.
                const Tangent back = log_map(m, trial, y);
                const double moved = len * gn;
                const double dot = m.kind() == ManifoldKind::Hyperbolic ? minkowski_dot(gnew.vec(), back.vec())
                                                                         : gnew.vec().dot(back.vec());
                const double curv = (gn - dot / moved) / moved;
                double next = 2.0 * len;
                if (curv > 0.0 && std::isfinite(curv)) next = std::max(1.0 / curv, 0.25 * len);
                y = trial;
                f = ft;
                g = gnew;
                gn = g.norm();
                step = next;
                accepted = true;
                break;
            }
            step *= opts.step_shrink;
        }
        if (!accepted) break;
    }
    return {y, f, gn, it, gn <= opts.grad_tol};
}

void append_circle_arc_midpoints(std::vector<double> angles, std::vector<Point>& seeds) {
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double a = angles[i];
        const double b = (i + 1 < angles.size()) ? angles[i + 1] : angles[0] + kTwoPi;
        if (b - a > 1e-12) seeds.push_back(Point::circle(0.5 * (a + b)));
    }
}

// Best local minima of the objective on a coarse circle grid.
std::vector<Point> coarse_grid_seeds(const Sample& s, const Criterion& c, const KernelConfig& cfg) {
    const std::vector<Point> grid = circle_grid(kCoarseGrid);
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = objective(s, grid[i], c, cfg);
    std::vector<std::size_t> minima;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double l = vals[(i + grid.size() - 1) % grid.size()];
        const double r = vals[(i + 1) % grid.size()];
        if (vals[i] <= l && vals[i] <= r) minima.push_back(i);
    }
    std::sort(minima.begin(), minima.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    std::vector<Point> out;
    for (std::size_t j = 0; j < std::min<std::size_t>(2, minima.size()); ++j) out.push_back(grid[minima[j]]);
    return out;
}

}  // namespace

Sample::Sample(ManifoldSpec manifold, std::vector<Point> points)
    : Sample(manifold, std::move(points), {}) {}

Sample::Sample(ManifoldSpec manifold, std::vector<Point> points, std::vector<double> weights)
    : manifold_(manifold), points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty()) throw DomainError("sample must contain at least one point");
    for (const auto& p : points_) {
        if (!(p.manifold() == manifold_)) throw DomainError("sample point does not lie on " + to_string(manifold_));
    }
    if (weights_.empty()) {
        weights_.assign(points_.size(), 1.0 / double(points_.size()));
        return;
    }
    if (weights_.size() != points_.size()) throw DomainError("sample weights and points differ in length");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("sample weights must be finite and nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw DomainError("sample weights sum to zero");
    for (double& w : weights_) w /= total;
}

Sample Sample::reweighted(std::vector<double> weights) const { return Sample(manifold_, points_, std::move(weights)); }

Diffusivity Criterion::t() const {
    if (!t_) throw DomainError("Frechet criterion has no diffusivity");
    return *t_;
}

std::string Criterion::label() const {
    if (!t_) return "frechet";
    // shortest text that parses back to the same double
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, t_->value());
    return std::string(buf, res.ptr);
}

void OptimOptions::validate() const {
    if (max_iters <= 0) throw DomainError("max_iters must be positive");
    if (!(grad_tol > 0.0)) throw DomainError("grad_tol must be positive");
    if (!(initial_step > 0.0)) throw DomainError("initial_step must be positive");
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw DomainError("step_shrink must lie in (0, 1)");
    if (multistart_count && *multistart_count == 0) throw DomainError("multistart_count must be positive");
}

double neg_log_likelihood(const Sample& s, const Point& y, Diffusivity t, const KernelConfig& cfg) {
    const auto& pts = s.points();
    const auto& w = s.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (w[i] == 0.0) continue;
        acc -= w[i] * log_heat_kernel(s.manifold(), pts[i], y, t, cfg);
    }
    return acc;
}

double frechet_objective(const Sample& s, const Point& y) {
    const auto& pts = s.points();
    const auto& w = s.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double d = dist(s.manifold(), pts[i], y);
        acc += w[i] * d * d;
    }
    return acc;
}

double objective(const Sample& s, const Point& y, const Criterion& c, const KernelConfig& cfg) {
    if (c.is_frechet()) return frechet_objective(s, y);
    return neg_log_likelihood(s, y, c.t(), cfg);
}

Tangent objective_grad(const Sample& s, const Point& y, const Criterion& c, const KernelConfig& cfg) {
    const ManifoldSpec& m = s.manifold();
    const auto& pts = s.points();
    const auto& w = s.weights();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m.ambient_dim());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (w[i] == 0.0) continue;
        if (c.is_frechet()) {
            // At a cut point the two one-sided derivatives cancel on average.
            if (is_cut_point(m, pts[i], y)) continue;
            acc -= 2.0 * w[i] * log_map(m, y, pts[i]).vec();
        } else {
            acc -= w[i] * log_kernel_grad(m, pts[i], y, c.t(), cfg).vec();
        }
    }
    return Tangent(y, std::move(acc));
}

std::optional<Point> extrinsic_mean(const Sample& s) {
    const ManifoldSpec& m = s.manifold();
    const auto& pts = s.points();
    const auto& w = s.weights();
    if (m.kind() == ManifoldKind::Circle) {
        double cx = 0.0, cy = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cx += w[i] * std::cos(pts[i].angle());
            cy += w[i] * std::sin(pts[i].angle());
        }
        if (std::hypot(cx, cy) < 1e-12) return std::nullopt;
        return Point::circle(std::atan2(cy, cx));
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m.ambient_dim());
    for (std::size_t i = 0; i < pts.size(); ++i) acc += w[i] * pts[i].coords();
    if (m.kind() == ManifoldKind::Sphere && acc.norm() < 1e-12) return std::nullopt;
    if (m.kind() == ManifoldKind::Hyperbolic) acc /= std::sqrt(-minkowski_dot(acc, acc));
    return Point(m, acc);
}

std::vector<Point> multistart_seeds(const Sample& s, const Criterion& c, const OptimOptions& opts,
                                    const KernelConfig& cfg) {
    const ManifoldSpec& m = s.manifold();
    std::vector<Point> seeds = opts.warm_starts;
    const auto mean = extrinsic_mean(s);
    if (mean) {
        seeds.push_back(*mean);
        if (m.kind() == ManifoldKind::Circle || m.kind() == ManifoldKind::Sphere) seeds.push_back(antipode(*mean));
    }
    if (!opts.full_multistart) {
        if (m.kind() == ManifoldKind::Circle) {
            for (auto& p : coarse_grid_seeds(s, c, cfg)) seeds.push_back(std::move(p));
        }
        if (seeds.empty()) seeds.push_back(s.points().front());
        return seeds;
    }

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.weights()[i] > 0.0) support.push_back(i);
    }
    const std::size_t count = std::min(support.size(), opts.multistart_count.value_or(support.size()));
    for (std::size_t j = 0; j < count; ++j) seeds.push_back(s.points()[support[j * support.size() / count]]);

    if (m.kind() == ManifoldKind::Circle && c.is_frechet()) {
        // The Frechet function is smooth between antipodes of data points.
        std::vector<double> data, kinks;
        for (std::size_t i : support) {
            data.push_back(s.points()[i].angle());
            kinks.push_back(Point::circle(s.points()[i].angle() + std::numbers::pi).angle());
        }
        append_circle_arc_midpoints(data, seeds);
        append_circle_arc_midpoints(kinks, seeds);
    }
    return seeds;
}

EstimateReport minimize(const Sample& s, const Criterion& c, const OptimOptions& opts, const KernelConfig& cfg) {
    opts.validate();
    cfg.validate();
    const std::vector<Point> seeds = multistart_seeds(s, c, opts, cfg);

    std::vector<StartRecord> runs;
    runs.reserve(seeds.size());
    for (const auto& seed : seeds) {
        const DescentResult r = descend(s, c, seed, opts, cfg);
        runs.push_back({seed, r.end, r.objective, r.iterations, r.converged});
    }

    std::vector<int> iterations;
    for (const auto& r : runs) iterations.push_back(r.iterations);

    std::optional<std::size_t> best;
    std::size_t best_any = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].objective < runs[best_any].objective) best_any = i;
        if (runs[i].converged && (!best || runs[i].objective < runs[*best].objective)) best = i;
    }
    if (!best) {
        const auto& r = runs[best_any];
        EstimateReport report{r.end, r.objective, c, false,
                              objective_grad(s, r.end, c, cfg).norm(), iterations, best_any, {}};
        throw NonConvergenceError("no multistart run converged to grad_tol (criterion " + c.label() + ", best gradient norm " +
                                      std::to_string(report.grad_norm) + ")",
                                  std::move(report));
    }

    const auto& winner = runs[*best];
    EstimateReport report{winner.end, winner.objective, c, true,
                          objective_grad(s, winner.end, c, cfg).norm(), iterations, *best, {}};
    for (const auto& r : runs) {
        if (!r.converged || r.objective > winner.objective + kTieTol) continue;
        if (dist(s.manifold(), r.end, winner.end) < kDistinctRadius) continue;
        const bool seen = std::any_of(report.near_ties.begin(), report.near_ties.end(), [&](const NearTie& t) {
            return dist(s.manifold(), t.point, r.end) < kDistinctRadius;
        });
        if (!seen) report.near_ties.push_back({r.end, r.objective});
    }
    return report;
}

EstimateReport diffusion_mean(const Sample& s, Diffusivity t, const OptimOptions& opts, const KernelConfig& cfg) {
    return minimize(s, Criterion::diffusion(t), opts, cfg);
}

EstimateReport frechet_mean(const Sample& s, const OptimOptions& opts) {
    return minimize(s, Criterion::frechet(), opts, KernelConfig{});
}

JointFit joint_fit(const Sample& s, double t_lo, double t_hi, const OptimOptions& opts, const KernelConfig& cfg) {
    if (!(t_lo > 0.0 && t_lo < t_hi)) throw DomainError("joint_fit requires 0 < t_lo < t_hi");
    constexpr int kScan = 16;
    const double a = std::log(t_lo);
    const double b = std::log(t_hi);

    std::vector<ProfilePoint> trace;
    std::optional<Point> last;
    auto profile = [&](double log_t) {
        OptimOptions o = opts;
        if (last) o.warm_starts.insert(o.warm_starts.begin(), *last);
        EstimateReport r = diffusion_mean(s, Diffusivity(std::exp(log_t)), o, cfg);
        last = r.optimum;
        trace.push_back({std::exp(log_t), r.objective, r.optimum});
        return r;
    };

    std::vector<double> grid(kScan);
    std::vector<double> values(kScan);
    std::size_t best = 0;
    for (int i = 0; i < kScan; ++i) {
        grid[i] = a + (b - a) * i / (kScan - 1);
        values[i] = profile(grid[i]).objective;
        if (values[i] < values[best]) best = i;
    }

    // Golden-section search on ln t inside the scan bracket around the best node.
    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min<std::size_t>(best + 1, kScan - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = profile(x1).objective;
    double f2 = profile(x2).objective;
    while (hi - lo > 1e-7) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = profile(x1).objective;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = profile(x2).objective;
        }
    }

    // Report the best profile value seen, which is never worse than the bracket ends.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].objective < trace[arg].objective) arg = i;
    }
    const double t_hat = trace[arg].t;
    OptimOptions o = opts;
    o.warm_starts.insert(o.warm_starts.begin(), trace[arg].optimum);
    EstimateReport report = diffusion_mean(s, Diffusivity(t_hat), o, cfg);
    const double log_t_hat = std::log(t_hat);
    const bool boundary = (log_t_hat - a) < 1e-4 || (b - log_t_hat) < 1e-4;
    return {Diffusivity(t_hat), std::move(report), boundary, std::move(trace)};
}

std::vector<Point> circle_grid(std::size_t nodes) {
    if (nodes == 0) throw DomainError("grid must have at least one node");
    std::vector<Point> grid;
    grid.reserve(nodes);
    for (std::size_t i = 0; i < nodes; ++i) grid.push_back(Point::circle(kTwoPi * double(i) / double(nodes)));
    return grid;
}

std::vector<ProfileRow> profile_likelihood(const Sample& s, std::span<const Diffusivity> ts,
                                           std::span<const Point> grid, const KernelConfig& cfg) {
    if (grid.empty()) throw DomainError("profile grid must be nonempty");
    std::vector<double> values(ts.size() * grid.size());
    parallel_for(ts.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            values[i * grid.size() + j] = neg_log_likelihood(s, grid[j], ts[i], cfg);
        }
    });
    std::vector<ProfileRow> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) rows.push_back({ts[i].value(), grid[j], values[i * grid.size() + j]});
    }
    return rows;
}

double flatness_exponent(const Sample& s, const Criterion& c, const Point& mu, std::span<const double> radii,
                         const KernelConfig& cfg) {
    const ManifoldSpec& m = s.manifold();
    if (radii.size() < 2) throw DomainError("flatness_exponent needs at least two radii");
    for (double r : radii) {
        if (!(r > 0.0 && r < m.injectivity_radius())) throw DomainError("flatness radius outside (0, injectivity radius)");
    }

    const int dim = m.dim();
    std::vector<Eigen::VectorXd> dirs;
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(dim, i);
        dirs.push_back(e);
        dirs.push_back(-e);
        for (int j = i + 1; j < dim; ++j) {
            const Eigen::VectorXd f = Eigen::VectorXd::Unit(dim, j);
            for (double si : {1.0, -1.0}) {
                for (double sj : {1.0, -1.0}) dirs.push_back((si * e + sj * f) / std::sqrt(2.0));
            }
        }
    }

    const double f0 = objective(s, mu, c, cfg);
    std::vector<double> xs, ys;
    for (double r : radii) {
        double sup = -std::numeric_limits<double>::infinity();
        for (const auto& d : dirs) {
            const Point probe = exp_map(m, mu, tangent_from_coeffs(m, mu, r * d));
            const double inc = objective(s, probe, c, cfg) - f0;
            if (!(inc > 0.0)) {
                throw FlatnessError("flatness probe is not above the minimum at radius " + std::to_string(r), r);
            }
            sup = std::max(sup, inc);
        }
        xs.push_back(std::log(r));
        ys.push_back(std::log(sup));
    }
    const double n = double(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("flatness radii must not all coincide");
    return std::max(0.0, sxy / sxx);
}

}  // namespace diffmean
