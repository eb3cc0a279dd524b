#include "causalq/fixed_margin.hpp"

#include "causalq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace causalq {

void LogFactorials::reserve(std::size_t n) {
    if (n < table_.size()) return;
    const std::size_t old = table_.size();
    table_.resize(n + 1);
    for (std::size_t k = old; k <= n; ++k) table_[k] = table_[k - 1] + std::log(static_cast<double>(k));
}

std::uint64_t sample_hypergeometric(std::uint64_t draws, std::uint64_t successes, std::uint64_t population,
                                    Rng& rng, const LogFactorials& lf) {
    if (draws == 0 || successes == 0) return 0;
    if (successes == population) return draws;
    if (draws == population) return successes;

    const std::uint64_t failures = population - successes;
    const std::uint64_t k_min = draws > failures ? draws - failures : 0;
    const std::uint64_t k_max = std::min(draws, successes);
    if (k_min == k_max) return k_min;

    auto mode = static_cast<std::uint64_t>(static_cast<double>(draws + 1) * static_cast<double>(successes + 1) /
                                           static_cast<double>(population + 2));
    mode = std::clamp(mode, k_min, k_max);

    const double log_p = lf(successes) - lf(mode) - lf(successes - mode) + lf(failures) - lf(draws - mode) -
                         lf(failures - draws + mode) - lf(population) + lf(draws) + lf(population - draws);
    const double p_mode = std::exp(log_p);

    const double u = uniform01(rng);
    double cumulative = p_mode;
    if (u < cumulative) return mode;

    // Walk outward, always taking the more probable neighbour next.
    std::uint64_t lo = mode, hi = mode;
    double p_lo = p_mode, p_hi = p_mode;
    const auto s = static_cast<double>(successes);
    const auto d = static_cast<double>(draws);
    const auto f = static_cast<double>(failures);
    for (;;) {
        double next_lo = -1.0, next_hi = -1.0;
        if (lo > k_min) {
            const auto k = static_cast<double>(lo);
            next_lo = p_lo * k * (f - d + k) / ((s - k + 1.0) * (d - k + 1.0));
        }
        if (hi < k_max) {
            const auto k = static_cast<double>(hi);
            next_hi = p_hi * (s - k) * (d - k) / ((k + 1.0) * (f - d + k + 1.0));
        }
        if (next_lo < 0.0 && next_hi < 0.0) return mode;  // rounding left u uncovered
        if (next_hi >= next_lo) {
            ++hi;
            p_hi = next_hi;
            cumulative += p_hi;
            if (u < cumulative) return hi;
        } else {
            --lo;
            p_lo = next_lo;
            cumulative += p_lo;
            if (u < cumulative) return lo;
        }
    }
}

void fixed_margin_sample(std::span<const std::uint64_t> row_margins, std::span<const std::uint64_t> col_margins,
                         Rng& rng, const LogFactorials& lf, std::vector<std::uint64_t>& col_left,
                         std::span<std::uint64_t> out) {
    const std::size_t rows = row_margins.size();
    const std::size_t cols = col_margins.size();
    col_left.assign(col_margins.begin(), col_margins.end());
    for (std::size_t i = 0; i < rows; ++i) {
        auto* row = out.data() + i * cols;
        if (i + 1 == rows) {
            std::copy(col_left.begin(), col_left.end(), row);
            break;
        }
        std::uint64_t need = row_margins[i];
        std::uint64_t pool = std::accumulate(col_left.begin(), col_left.end(), std::uint64_t{0});
        for (std::size_t j = 0; j < cols; ++j) {
            std::uint64_t cell;
            if (j + 1 == cols) {
                cell = need;
            } else {
                cell = sample_hypergeometric(need, col_left[j], pool, rng, lf);
            }
            row[j] = cell;
            need -= cell;
            pool -= col_left[j];
            col_left[j] -= cell;
        }
    }
}

TwoWayTable fixed_margin_sample(std::span<const std::uint64_t> row_margins,
                                std::span<const std::uint64_t> col_margins, Rng& rng) {
    const auto row_total = std::accumulate(row_margins.begin(), row_margins.end(), std::uint64_t{0});
    const auto col_total = std::accumulate(col_margins.begin(), col_margins.end(), std::uint64_t{0});
    if (row_total != col_total) throw UsageError("fixed_margin_sample: row and column totals differ");
    if (row_total == 0) throw UsageError("fixed_margin_sample: margins must have a positive total");
    TwoWayTable t{row_margins.size(), col_margins.size(), {}};
    t.cells.assign(t.rows * t.cols, 0);
    LogFactorials lf(row_total);
    std::vector<std::uint64_t> scratch;
    fixed_margin_sample(row_margins, col_margins, rng, lf, scratch, t.cells);
    return t;
}

}  // namespace causalq
