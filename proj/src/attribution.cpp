#include "trc/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "trc/util.hpp"

namespace trc {

double kernel_weight(int m, int s) {
    if (s <= 0 || s >= m)
        fail_input("kernel weight undefined for coalition size " + std::to_string(s) +
                   " of " + std::to_string(m) + " (handled by constraints)");
    double binom = 1.0;
    for (int i = 1; i <= s; ++i) binom *= static_cast<double>(m - i + 1) / static_cast<double>(i);
    return static_cast<double>(m - 1) / (binom * s * (m - s));
}

namespace {

// Gaussian elimination with partial pivoting; a is destroyed.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::fabs(a[row][col]) > std::fabs(a[pivot][col])) pivot = row;
        if (std::fabs(a[pivot][col]) < 1e-300)
            fail_internal("singular system in kernelshap regression");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            double factor = a[row][col] / a[col][col];
            if (factor == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
            b[row] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double acc = b[row];
        for (std::size_t k = row + 1; k < n; ++k) acc -= a[row][k] * x[k];
        x[row] = acc / a[row][row];
    }
    return x;
}

struct Coalition {
    std::vector<std::uint8_t> mask;
    double weight;
};

}  // namespace

AttributionResult kernelshap(const MaskableInstance& instance, int n_samples, std::uint64_t seed) {
    int m = static_cast<int>(instance.tokens.size());
    if (m < 1) fail_input("kernelshap needs at least one feature unit");

    AttributionResult result;
    std::vector<std::uint8_t> empty(m, 0), full(m, 1);
    result.phi0 = instance.model(empty);
    double v_full = instance.model(full);

    if (m == 1) {
        result.phi = {v_full - result.phi0};
        result.exhaustive = true;
        result.top_k = top_k_tokens(result);
        return result;
    }

    std::vector<Coalition> coalitions;
    std::uint64_t interior = (std::uint64_t(1) << m) - 2;
    result.exhaustive = m <= 30 && interior <= static_cast<std::uint64_t>(n_samples);
    if (result.exhaustive) {
        for (std::uint64_t bits = 1; bits < interior + 1; ++bits) {
            Coalition c;
            c.mask.resize(m);
            for (int j = 0; j < m; ++j) c.mask[j] = (bits >> j) & 1;
            c.weight = kernel_weight(m, std::popcount(bits));
            coalitions.push_back(std::move(c));
        }
    } else {
        if (n_samples < 2 * m)
            fail_input("kernelshap needs n_samples >= 2*M when enumeration is not exhaustive");
        // Sampling sizes proportional to the per-size kernel mass makes every
        // sampled coalition carry equal regression weight.
        std::vector<double> size_mass(m - 1);
        for (int s = 1; s < m; ++s)
            size_mass[s - 1] = static_cast<double>(m - 1) / (static_cast<double>(s) * (m - s));
        std::mt19937_64 rng(seed);
        std::discrete_distribution<int> size_dist(size_mass.begin(), size_mass.end());
        std::vector<int> indices(m);
        std::iota(indices.begin(), indices.end(), 0);
        for (int i = 0; i < n_samples; ++i) {
            int s = size_dist(rng) + 1;
            for (int j = 0; j < s; ++j) {
                std::uniform_int_distribution<int> pick(j, m - 1);
                std::swap(indices[j], indices[pick(rng)]);
            }
            Coalition c;
            c.mask.assign(m, 0);
            for (int j = 0; j < s; ++j) c.mask[indices[j]] = 1;
            c.weight = 1.0;
            coalitions.push_back(std::move(c));
        }
    }

    // Constraint elimination: substitute phi_{m-1} = (f_full - f_empty) - sum(rest)
    // and regress the remaining m-1 coefficients.
    double delta = v_full - result.phi0;
    std::size_t dim = static_cast<std::size_t>(m) - 1;
    std::vector<std::vector<double>> gram(dim, std::vector<double>(dim, 0.0));
    std::vector<double> rhs(dim, 0.0);
    std::vector<double> row(dim);
    for (const Coalition& c : coalitions) {
        double y = instance.model(c.mask) - result.phi0 - (c.mask[m - 1] ? delta : 0.0);
        for (std::size_t j = 0; j < dim; ++j)
            row[j] = static_cast<double>(c.mask[j]) - static_cast<double>(c.mask[m - 1]);
        for (std::size_t j = 0; j < dim; ++j) {
            if (row[j] == 0.0) continue;
            double wj = c.weight * row[j];
            rhs[j] += wj * y;
            for (std::size_t k = 0; k < dim; ++k) gram[j][k] += wj * row[k];
        }
    }
    if (!result.exhaustive) {
        double ridge = 0.0;
        for (std::size_t j = 0; j < dim; ++j) ridge = std::max(ridge, gram[j][j]);
        ridge = ridge * 1e-10 + 1e-12;
        for (std::size_t j = 0; j < dim; ++j) gram[j][j] += ridge;
    }

    std::vector<double> x = solve_linear(std::move(gram), std::move(rhs));
    result.phi.assign(m, 0.0);
    double partial = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        result.phi[j] = x[j];
        partial += x[j];
    }
    result.phi[m - 1] = delta - partial;
    result.n_samples = static_cast<int>(coalitions.size());
    result.top_k = top_k_tokens(result);
    return result;
}

std::vector<int> top_k_tokens(const AttributionResult& result, int k) {
    std::vector<int> order(result.phi.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (result.phi[a] != result.phi[b]) return result.phi[a] > result.phi[b];
        return a < b;
    });
    if (static_cast<int>(order.size()) > k) order.resize(k);
    return order;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double h = p * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    double frac = h - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

PositionDistribution relative_positions(const std::vector<int>& indices, int target_offset_token,
                                        int target_length) {
    if (target_length < 1) fail_input("target sequence must have at least one token");
    PositionDistribution dist;
    dist.n_indices = indices.size();
    for (int idx : indices) {
        if (idx < target_offset_token) {
            ++dist.n_fewshot;
            continue;
        }
        dist.positions.push_back(static_cast<double>(idx - target_offset_token + 1) /
                                 static_cast<double>(target_length));
    }
    if (dist.n_indices > 0)
        dist.fewshot_fraction =
            static_cast<double>(dist.n_fewshot) / static_cast<double>(dist.n_indices);
    dist.median = quantile(dist.positions, 0.5);
    dist.q1 = quantile(dist.positions, 0.25);
    dist.q3 = quantile(dist.positions, 0.75);
    return dist;
}

PositionSummary position_summary(const std::vector<PositionDistribution>& runs) {
    if (runs.empty()) fail_input("position_summary needs at least one run");
    PositionSummary summary;
    std::size_t total_indices = 0;
    std::size_t total_fewshot = 0;
    for (const auto& run : runs) {
        summary.positions.insert(summary.positions.end(), run.positions.begin(),
                                 run.positions.end());
        total_indices += run.n_indices;
        total_fewshot += run.n_fewshot;
    }
    if (total_indices > 0)
        summary.fewshot_fraction =
            static_cast<double>(total_fewshot) / static_cast<double>(total_indices);
    summary.median = quantile(summary.positions, 0.5);
    summary.q1 = quantile(summary.positions, 0.25);
    summary.q3 = quantile(summary.positions, 0.75);

    // Gaussian KDE sampled on a fixed grid; the violin-plot data file.
    std::size_t n = summary.positions.size();
    const int grid_size = 101;
    summary.kde_grid.resize(grid_size);
    summary.kde_density.assign(grid_size, 0.0);
    for (int g = 0; g < grid_size; ++g)
        summary.kde_grid[g] = static_cast<double>(g) / (grid_size - 1);
    if (n > 0) {
        double mean = std::accumulate(summary.positions.begin(), summary.positions.end(), 0.0) /
                      static_cast<double>(n);
        double var = 0.0;
        for (double v : summary.positions) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        double bandwidth =
            std::max(0.01, 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2));
        double norm = 1.0 / (static_cast<double>(n) * bandwidth * std::sqrt(2.0 * M_PI));
        for (int g = 0; g < grid_size; ++g) {
            double acc = 0.0;
            for (double v : summary.positions) {
                double z = (summary.kde_grid[g] - v) / bandwidth;
                acc += std::exp(-0.5 * z * z);
            }
            summary.kde_density[g] = acc * norm;
        }
    }
    return summary;
}

}  // namespace trc
