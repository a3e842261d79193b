#pragma once

#include "diffmean/estimation.hpp"

#include <cstdint>
#include <vector>

namespace diffmean {

struct BootstrapConfig {
    int B = 1000;
    std::uint64_t seed = 0;
    /// Resample sizes; empty means 20 log-spaced sizes from 4 to the sample size.
    std::vector<std::size_t> n_grid;

    /// Throws DomainError unless B >= 1 and every size lies in [2, sample_size].
    void validate(std::size_t sample_size) const;
};

/// 20 log-spaced integers from 4 (or 2 for tiny samples) to n, deduplicated.
std::vector<std::size_t> default_n_grid(std::size_t n);

struct VarianceRatio {
    double ratio;
    double mc_stderr;
};

struct VarianceRatioRow {
    std::size_t n;
    double ratio;
    double mc_stderr;
};

struct VarianceRatioCurve {
    Criterion criterion;
    std::vector<VarianceRatioRow> rows;
};

/**
 * @brief Bootstrap estimate of n E[d^2(mu_n, mu)] / E[d^2(X, mu)].
 *
 * mu is the full-sample estimate. Each of the B replicates draws n points with
 * replacement from the full sample and re-estimates the mean; the numerator
 * averages the squared replicate deviations from mu. Replicate streams are
 * seeded from (seed, n, replicate), so the result is independent of the
 * thread count.
 */
VarianceRatio variance_ratio(const Sample& s, const Criterion& c, std::size_t n, const BootstrapConfig& bcfg,
                             const OptimOptions& opts = {}, const KernelConfig& cfg = {});

VarianceRatioCurve variance_ratio_curve(const Sample& s, const Criterion& c, const BootstrapConfig& bcfg,
                                        const OptimOptions& opts = {}, const KernelConfig& cfg = {});

/// Largest variance ratio on the curve.
double fss_magnitude(const VarianceRatioCurve& curve);

/// Multiplicity weights of one size-n resample drawn with replacement.
std::vector<double> resample_weights(const Sample& s, std::size_t n, std::uint64_t seed, std::size_t replicate);

}  // namespace diffmean
