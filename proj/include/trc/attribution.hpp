#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace trc {

// A model view ready for coalition masking: whitespace-delimited token units
// and a deterministic scalar score for any coalition indicator vector
// (1 = token present, 0 = replaced by its baseline).
struct MaskableInstance {
    std::vector<std::string> tokens;
    std::function<double(const std::vector<std::uint8_t>&)> model;
};

struct AttributionResult {
    std::vector<double> phi;
    double phi0 = 0.0;  // empty-coalition score
    int n_samples = 0;  // model evaluations beyond empty/full
    bool exhaustive = false;
    std::vector<int> top_k;
};

struct PositionDistribution {
    std::vector<double> positions;  // in (0, 1], target-region indices only
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double fewshot_fraction = 0.0;
    std::size_t n_indices = 0;   // all indices considered
    std::size_t n_fewshot = 0;   // indices before the target region
};

struct PositionSummary {
    std::vector<double> positions;  // pooled
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double fewshot_fraction = 0.0;
    std::vector<double> kde_grid;     // x values in [0, 1]
    std::vector<double> kde_density;  // violin-plot density samples
};

// (M-1) / (C(M,s) * s * (M-s)); defined for 1 <= s <= M-1 only.
double kernel_weight(int m, int s);

// Kernel-weighted least squares with the additivity constraints
// phi0 = f(empty) and phi0 + sum(phi) = f(full). Enumerates every coalition
// when 2^M - 2 <= n_samples, otherwise samples by kernel weight.
AttributionResult kernelshap(const MaskableInstance& instance, int n_samples, std::uint64_t seed);

// Indices of the k largest phi; ties resolved to the smaller index.
std::vector<int> top_k_tokens(const AttributionResult& result, int k = 5);

// Positions of top indices inside the target region, 1-based over its token
// count so the final token maps to exactly 1.0. Indices before the region
// only feed the few-shot fraction.
PositionDistribution relative_positions(const std::vector<int>& indices, int target_offset_token,
                                        int target_length);

PositionSummary position_summary(const std::vector<PositionDistribution>& runs);

// Interpolated quantile (p in [0, 1]) over an unsorted sample.
double quantile(std::vector<double> values, double p);

}  // namespace trc
