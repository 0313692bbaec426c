#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/error.hpp>

namespace cpsvm {

/**
 * Two-class equicorrelated Gaussian design.
 *
 * Plain variant: class +1 has mean (1_{k0}, 0_{p-k0}), class -1 the negation,
 * and all pairs of features have correlation rho.
 * Group variant (num_groups > 0): p = num_groups * group_size, correlation rho
 * inside a group and 0 across groups, and k0 counts the leading groups whose
 * mean is 1 for class +1.
 */
struct SynthConfig
{
    int n = 100;
    int p = 1000;
    int k0 = 10;
    double rho = 0.1;
    std::uint64_t seed = 0;
    int num_groups = 0;
    int group_size = 0;
    bool standardize = true;

    void validate() const
    {
        detail::require(n >= 2, "SynthConfig: n must be at least 2");
        detail::require(p >= 1, "SynthConfig: p must be positive");
        detail::require(rho >= 0.0 && rho < 1.0, "SynthConfig: rho must lie in [0, 1)");
        detail::require(k0 >= 0, "SynthConfig: k0 must be nonnegative");
        if (num_groups > 0) {
            detail::require(static_cast<long>(num_groups) * group_size == p,
                            "SynthConfig: num_groups * group_size must equal p");
            detail::require(k0 <= num_groups, "SynthConfig: k0 exceeds the number of groups");
        } else {
            detail::require(k0 <= p, "SynthConfig: k0 exceeds p");
        }
    }
};

namespace detail {

// One-factor sampler: x = mean + sqrt(rho) * common + sqrt(1 - rho) * own.
inline Dataset sample_equicorrelated(const SynthConfig& cfg, int block_size, const std::vector<double>& mean_pos)
{
    const int n = cfg.n, p = cfg.p;
    const int n_pos = (n + 1) / 2;
    const int blocks = p / block_size;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double a = std::sqrt(cfg.rho), b = std::sqrt(1.0 - cfg.rho);

    Mat x(n, p);
    Vec y(n);
    std::vector<double> common(blocks);
    for (int i = 0; i < n; ++i) {
        const double sign = i < n_pos ? 1.0 : -1.0;
        y[i] = sign;
        for (auto& c : common) c = normal(rng);
        for (int j = 0; j < p; ++j)
            x(i, j) = sign * mean_pos[j] + a * common[j / block_size] + b * normal(rng);
    }
    Dataset d(FeatureMatrix(std::move(x)), std::move(y));
    return cfg.standardize ? standardize_columns(d) : d;
}

} // namespace detail

inline Dataset synth_gaussian(const SynthConfig& cfg)
{
    cfg.validate();
    std::vector<double> mean(cfg.p, 0.0);
    for (int j = 0; j < cfg.k0; ++j) mean[j] = 1.0;
    return detail::sample_equicorrelated(cfg, cfg.p, mean);
}

inline std::pair<Dataset, GroupStructure> synth_group_gaussian(const SynthConfig& cfg)
{
    cfg.validate();
    detail::require(cfg.num_groups > 0, "synth_group_gaussian: num_groups must be positive");
    std::vector<double> mean(cfg.p, 0.0);
    for (int j = 0; j < cfg.k0 * cfg.group_size; ++j) mean[j] = 1.0;
    auto d = detail::sample_equicorrelated(cfg, cfg.group_size, mean);
    return {std::move(d), GroupStructure::contiguous(cfg.num_groups, cfg.group_size)};
}

} // namespace cpsvm
