#include "diffmean/smeariness.hpp"

#include "diffmean/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace diffmean {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t replicate) {
    return splitmix64(splitmix64(splitmix64(seed) ^ n) ^ replicate);
}

void require_spread(const Sample& s) {
    const auto& pts = s.points();
    const bool identical = std::all_of(pts.begin(), pts.end(), [&](const Point& p) {
        return dist(s.manifold(), p, pts.front()) == 0.0;
    });
    if (identical) throw DegenerateSampleError("all sample points coincide; variance ratio is undefined");
}

double sample_spread(const Sample& s, const Point& mu) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double d = dist(s.manifold(), mu, s.points()[j]);
        acc += s.weights()[j] * d * d;
    }
    if (!(acc > 0.0)) throw DegenerateSampleError("sample has zero spread around its mean");
    return acc;
}

EstimateReport replicate_mean(const Sample& resample, const Criterion& c, const Point& warm, const OptimOptions& opts,
                              const KernelConfig& cfg) {
    OptimOptions fast = opts;
    fast.warm_starts.insert(fast.warm_starts.begin(), warm);
    fast.full_multistart = false;
    try {
        return minimize(resample, c, fast, cfg);
    } catch (const NonConvergenceError&) {
        fast.full_multistart = true;
        return minimize(resample, c, fast, cfg);
    }
}

VarianceRatio ratio_at(const Sample& s, const Criterion& c, const Point& mu, double spread, std::size_t n,
                       const BootstrapConfig& bcfg, const OptimOptions& opts, const KernelConfig& cfg) {
    const std::size_t reps = static_cast<std::size_t>(bcfg.B);
    std::vector<double> dev(reps);
    parallel_for(reps, [&](std::size_t b) {
        const Sample resample = s.reweighted(resample_weights(s, n, bcfg.seed, b));
        const EstimateReport r = replicate_mean(resample, c, mu, opts, cfg);
        const double d = dist(s.manifold(), r.optimum, mu);
        dev[b] = d * d;
    });
    double mean = 0.0;
    for (double d : dev) mean += d;
    mean /= double(reps);
    double var = 0.0;
    for (double d : dev) var += (d - mean) * (d - mean);
    const double stderr_mean = reps > 1 ? std::sqrt(var / double(reps - 1) / double(reps)) : 0.0;
    const double scale = double(n) / spread;
    return {scale * mean, scale * stderr_mean};
}

}  // namespace

void BootstrapConfig::validate(std::size_t sample_size) const {
    if (B < 1) throw DomainError("bootstrap B must be >= 1");
    for (std::size_t n : n_grid) {
        if (n < 2 || n > sample_size) {
            throw DomainError("bootstrap size " + std::to_string(n) + " outside [2, " + std::to_string(sample_size) + "]");
        }
    }
}

std::vector<std::size_t> default_n_grid(std::size_t n) {
    if (n < 2) throw DomainError("bootstrap needs a sample of size >= 2");
    const double lo = std::log(double(std::min<std::size_t>(4, n)));
    const double hi = std::log(double(n));
    std::vector<std::size_t> grid;
    constexpr int kPoints = 20;
    for (int i = 0; i < kPoints; ++i) {
        const auto v = static_cast<std::size_t>(std::lround(std::exp(lo + (hi - lo) * i / (kPoints - 1))));
        if (grid.empty() || grid.back() != v) grid.push_back(v);
    }
    return grid;
}

std::vector<double> resample_weights(const Sample& s, std::size_t n, std::uint64_t seed, std::size_t replicate) {
    std::mt19937_64 rng(stream_seed(seed, n, replicate));
    const auto& w = s.weights();
    std::vector<double> cumulative(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) cumulative[i] = (acc += w[i]);
    std::vector<double> counts(w.size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double u = double(rng() >> 11) * 0x1.0p-53 * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        counts[static_cast<std::size_t>(it - cumulative.begin())] += 1.0;
    }
    return counts;
}

VarianceRatio variance_ratio(const Sample& s, const Criterion& c, std::size_t n, const BootstrapConfig& bcfg,
                             const OptimOptions& opts, const KernelConfig& cfg) {
    BootstrapConfig one = bcfg;
    one.n_grid = {n};
    const VarianceRatioRow row = variance_ratio_curve(s, c, one, opts, cfg).rows.front();
    return {row.ratio, row.mc_stderr};
}

VarianceRatioCurve variance_ratio_curve(const Sample& s, const Criterion& c, const BootstrapConfig& bcfg,
                                        const OptimOptions& opts, const KernelConfig& cfg) {
    require_spread(s);
    const std::vector<std::size_t> grid = bcfg.n_grid.empty() ? default_n_grid(s.size()) : bcfg.n_grid;
    BootstrapConfig checked = bcfg;
    checked.n_grid = grid;
    checked.validate(s.size());
    if (!std::is_sorted(grid.begin(), grid.end()) || std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
        throw DomainError("bootstrap n_grid must be strictly increasing");
    }

    const EstimateReport full = minimize(s, c, opts, cfg);
    const double spread = sample_spread(s, full.optimum);
    VarianceRatioCurve curve{c, {}};
    for (std::size_t n : grid) {
        const VarianceRatio r = ratio_at(s, c, full.optimum, spread, n, bcfg, opts, cfg);
        curve.rows.push_back({n, r.ratio, r.mc_stderr});
    }
    return curve;
}

double fss_magnitude(const VarianceRatioCurve& curve) {
    if (curve.rows.empty()) throw DomainError("fss_magnitude of an empty curve");
    double best = curve.rows.front().ratio;
    for (const auto& row : curve.rows) best = std::max(best, row.ratio);
    return best;
}

}  // namespace diffmean
