#pragma once

#include "causalq/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace causalq {

/// Table of ln(k!) for k = 0..n, grown on demand.
class LogFactorials {
public:
    explicit LogFactorials(std::size_t n = 0) { reserve(n); }
    void reserve(std::size_t n);
    double operator()(std::uint64_t k) const { return table_[k]; }
    std::size_t limit() const { return table_.size() - 1; }

private:
    std::vector<double> table_{0.0};
};

/// One draw of the number of successes when taking `draws` items without
/// replacement from `population` items of which `successes` are marked.
/// Inversion search outward from the mode; `lf` must cover `population`.
std::uint64_t sample_hypergeometric(std::uint64_t draws, std::uint64_t successes, std::uint64_t population,
                                    Rng& rng, const LogFactorials& lf);

/// Dense r x c table of counts in row-major order.
struct TwoWayTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint64_t> cells;

    std::uint64_t at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
};

/// Random table with the given margins, distributed as the table obtained by
/// shuffling one variable's labels against the other (multivariate
/// hypergeometric law). Cells are drawn sequentially from their conditional
/// hypergeometric distributions, as in Patefield's algorithm.
/// Throws UsageError when the margins do not share a positive total.
TwoWayTable fixed_margin_sample(std::span<const std::uint64_t> row_margins,
                                std::span<const std::uint64_t> col_margins, Rng& rng);

/// Same as above with a caller-owned log-factorial table and output buffer,
/// for tight permutation loops.
void fixed_margin_sample(std::span<const std::uint64_t> row_margins, std::span<const std::uint64_t> col_margins,
                         Rng& rng, const LogFactorials& lf, std::vector<std::uint64_t>& col_scratch,
                         std::span<std::uint64_t> out);

}  // namespace causalq
