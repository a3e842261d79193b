#pragma once

#include "diffmean/errors.hpp"
#include "diffmean/heat_kernel.hpp"
#include "diffmean/manifold.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diffmean {

/**
 * @brief A nonempty weighted sample of points on one manifold.
 *
 * Weights default to 1/n. Explicit weights must be nonnegative; they are
 * rescaled to sum to one. Bootstrap resamples are represented by multiplicity
 * weights over the original points.
 */
class Sample {
public:
    Sample(ManifoldSpec manifold, std::vector<Point> points);
    Sample(ManifoldSpec manifold, std::vector<Point> points, std::vector<double> weights);

    const ManifoldSpec& manifold() const noexcept { return manifold_; }
    const std::vector<Point>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return points_.size(); }

    /// Same points, new weights.
    Sample reweighted(std::vector<double> weights) const;

private:
    ManifoldSpec manifold_;
    std::vector<Point> points_;
    std::vector<double> weights_;
};

/// Which location statistic to estimate: the Frechet mean or a diffusion t-mean.
class Criterion {
public:
    static Criterion frechet() { return Criterion(std::nullopt); }
    static Criterion diffusion(Diffusivity t) { return Criterion(t); }

    bool is_frechet() const noexcept { return !t_.has_value(); }
    Diffusivity t() const;
    std::string label() const;

private:
    explicit Criterion(std::optional<Diffusivity> t) : t_(t) {}
    std::optional<Diffusivity> t_;
};

struct OptimOptions {
    int max_iters = 500;
    double grad_tol = 1e-9;
    double initial_step = 0.1;
    double step_shrink = 0.5;
    /// Number of data points used as starts; unset means all of them.
    std::optional<std::size_t> multistart_count;
    std::uint64_t seed = 0;
    /// Extra starting points tried before the standard seed set.
    std::vector<Point> warm_starts;
    /// When false only warm starts and the cheap seeds (extrinsic mean, its
    /// antipode, coarse grid minimum on the circle) are used.
    bool full_multistart = true;

    void validate() const;
};

struct StartRecord {
    Point start;
    Point end;
    double objective;
    int iterations;
    bool converged;
};

/// A local minimum whose objective lies within tie_tol of the best one.
struct NearTie {
    Point point;
    double objective;
};

struct EstimateReport {
    Point optimum;
    double objective;
    Criterion criterion;
    bool converged;
    double grad_norm;
    std::vector<int> iterations;
    std::size_t selected_start;
    std::vector<NearTie> near_ties;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, EstimateReport best) : Error(what), best_(std::move(best)) {}
    const EstimateReport& best() const noexcept { return best_; }

private:
    EstimateReport best_;
};

inline constexpr double kTieTol = 1e-6;

/// L_n^t(y) = -sum_i w_i ln p(X_i, y, t).
double neg_log_likelihood(const Sample& s, const Point& y, Diffusivity t, const KernelConfig& cfg = {});

/// sum_i w_i dist^2(X_i, y).
double frechet_objective(const Sample& s, const Point& y);

/// Objective for either criterion.
double objective(const Sample& s, const Point& y, const Criterion& c, const KernelConfig& cfg = {});

/// Riemannian gradient of objective() at y.
Tangent objective_grad(const Sample& s, const Point& y, const Criterion& c, const KernelConfig& cfg = {});

/// Standard multistart seed set for a sample.
std::vector<Point> multistart_seeds(const Sample& s, const Criterion& c, const OptimOptions& opts,
                                    const KernelConfig& cfg = {});

/// Extrinsic mean projected back onto the manifold (Euclidean: arithmetic mean).
std::optional<Point> extrinsic_mean(const Sample& s);

EstimateReport minimize(const Sample& s, const Criterion& c, const OptimOptions& opts = {},
                        const KernelConfig& cfg = {});

EstimateReport diffusion_mean(const Sample& s, Diffusivity t, const OptimOptions& opts = {},
                              const KernelConfig& cfg = {});

EstimateReport frechet_mean(const Sample& s, const OptimOptions& opts = {});

struct ProfilePoint {
    double t;
    double objective;
    Point optimum;
};

struct JointFit {
    Diffusivity t;
    EstimateReport report;
    /// True when the optimum sits at an end of [t_lo, t_hi].
    bool boundary;
    std::vector<ProfilePoint> trace;
};

/**
 * @brief Joint estimate of (t, mu): minimizes t -> min_y L_n^t(y).
 *
 * A 16-point log-spaced scan brackets the minimum, which golden-section search
 * on ln t then refines.
 */
JointFit joint_fit(const Sample& s, double t_lo, double t_hi, const OptimOptions& opts = {},
                   const KernelConfig& cfg = {});

struct ProfileRow {
    double t;
    Point point;
    double value;
};

/// Raw L_n^t on every (t, grid point) pair, t-major.
std::vector<ProfileRow> profile_likelihood(const Sample& s, std::span<const Diffusivity> ts,
                                           std::span<const Point> grid, const KernelConfig& cfg = {});

/// Evenly spaced angles on the circle, starting at 0.
std::vector<Point> circle_grid(std::size_t nodes);

/**
 * @brief Least-squares slope of ln sup_{|v|=r} (f(exp_mu v) - f(mu)) against ln r.
 *
 * Directions are +-e_j and +-(e_i +- e_j)/sqrt(2) in an orthonormal tangent
 * basis (just +-1 on the circle). Throws FlatnessError if some increment is
 * not positive.
 */
double flatness_exponent(const Sample& s, const Criterion& c, const Point& mu, std::span<const double> radii,
                         const KernelConfig& cfg = {});

}  // namespace diffmean
