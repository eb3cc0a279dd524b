#pragma once

#include "causalq/count_cache.hpp"
#include "causalq/fixed_margin.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace causalq {

/// Which procedure produced a TestResult.
enum class Method { chi2, mit, mit_sampled, shuffle };

/// Which procedure a caller asks for. hymit picks chi2 or mit per test.
enum class TestKind { chi2, mit, hymit, shuffle };

std::string to_string(Method m);
std::string to_string(TestKind k);
TestKind parse_test_kind(const std::string& s);

struct GroupSampling {
    bool enabled = false;
    double c = 3.0;  // sample size = ceil(c * ln |groups|)
};

struct TestConfig {
    double alpha = 0.01;
    std::size_t permutations = 1000;
    double beta = 5.0;
    GroupSampling group_sample;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    /// Throws UsageError unless 0 < alpha < 1, permutations >= 1 and beta >= 1.
    void validate() const;
};

struct TestResult {
    double statistic = 0.0;  // plug-in I(X;Y|Z) in nats
    double p_value = 1.0;
    double ci_low = 1.0;  // permutation methods only
    double ci_high = 1.0;
    Method method = Method::chi2;
    std::size_t permutations = 0;
    double df = 0.0;  // chi2 only
    std::size_t groups = 0;
    std::size_t groups_used = 0;

    bool rejects(double alpha) const { return p_value < alpha; }
};

/// One conditioning group: the X-by-Y table of rows with Z = z.
struct Stratum {
    std::vector<Code> z;
    std::uint64_t n = 0;
    std::vector<std::uint64_t> row_margins;  // over observed X levels in the group
    std::vector<std::uint64_t> col_margins;  // over observed Y levels in the group
    std::vector<std::uint64_t> cells;        // row-major rows x cols

    std::size_t rows() const { return row_margins.size(); }
    std::size_t cols() const { return col_margins.size(); }
    /// A single observed level on either side: mutual information is 0 under every permutation.
    bool degenerate() const { return rows() < 2 || cols() < 2; }
};

/// X-by-Y tables for every observed Z group, in lexicographic Z order. X and
/// Y may be attribute sets; each is treated as one compound variable.
struct Strata {
    std::vector<Stratum> groups;
    std::uint64_t total = 0;
    std::size_t x_levels = 0;  // distinct X values over the selection
    std::size_t y_levels = 0;
    std::uint64_t stream = 0;  // identifies (X, Y, Z) for RNG stream derivation
};

Strata stratify(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z);

/// Plug-in I(X;Y|Z) = sum_z Pr(z) I_z(X;Y).
double conditional_mi(const Strata& strata);

/// Groups chosen with probability proportional to Pr(z) * max(H(X|z), H(Y|z)),
/// without replacement; zero-weight groups are never chosen. Indices into strata.groups.
std::vector<std::size_t> weighted_group_sample(const Strata& strata, const TestConfig& cfg);

/// Convenience overload returning the chosen Z tuples.
std::vector<std::vector<Code>> weighted_group_sample(const CountCache& counts, const AttrSet& x, const AttrSet& y,
                                                     const AttrSet& z, const TestConfig& cfg);

/// G-test: 2 n I(X;Y|Z) against chi2 with (|X|-1)(|Y|-1)|Z| degrees of freedom.
TestResult chi2_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                     const TestConfig& cfg);

/// Monte-Carlo permutation test on fixed-margin random tables per Z group.
/// Uses group sampling when cfg.group_sample.enabled.
TestResult mit_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                    const TestConfig& cfg);

/// chi2 when df <= n / beta, otherwise MIT.
TestResult hymit_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                      const TestConfig& cfg);

/// Baseline: permutes X labels row by row within each Z group and recounts.
TestResult shuffle_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                        const TestConfig& cfg);

TestResult run_test(TestKind kind, const CountCache& counts, const AttrSet& x, const AttrSet& y,
                    const AttrSet& z, const TestConfig& cfg);

/// p-value and its 95% binomial interval from `hits` of `m` permutations,
/// floored at 1/(m+1).
void permutation_p_value(std::size_t hits, std::size_t m, TestResult& out);

}  // namespace causalq
