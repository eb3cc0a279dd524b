#include "causalq/error.hpp"
#include "causalq/indep.hpp"
#include "support.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

using namespace causalq;
using namespace causalq::testing;

namespace {

/// Columns built straight from codes; dictionary "0".."k-1".
Dataset coded(const std::vector<std::string>& names, const std::vector<std::vector<Code>>& cols) {
    std::vector<Column> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        Code k = 0;
        for (auto c : cols[i]) k = std::max(k, c);
        std::vector<std::string> dict;
        for (Code v = 0; v <= k; ++v) dict.push_back(std::to_string(v));
        out.emplace_back(names[i], dict, cols[i]);
    }
    return Dataset(std::move(out));
}

/// X, Y binary, Z with `groups` levels; X and Y independent given Z.
Dataset conditional_null(std::size_t n, std::size_t groups, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<Code>> cols(3, std::vector<Code>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = uniform_below(rng, groups);
        const double p = 0.2 + 0.6 * static_cast<double>(z) / static_cast<double>(std::max<std::size_t>(1, groups - 1));
        cols[0][i] = coin(rng, p);
        cols[1][i] = coin(rng, 1.0 - p);
        cols[2][i] = static_cast<Code>(z);
    }
    return coded({"X", "Y", "Z"}, cols);
}

double chi2_gof_p(const std::vector<double>& observed, const std::vector<double>& expected) {
    double x2 = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i)
        x2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    return boost::math::gamma_q((static_cast<double>(observed.size()) - 1.0) / 2.0, x2 / 2.0);
}

}  // namespace

TEST(FixedMargin, TwoByTwoLaw) {
    Rng rng(2024);
    const std::vector<std::uint64_t> rows{2, 2}, cols{2, 2};
    std::vector<double> hist(3, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) hist[fixed_margin_sample(rows, cols, rng).at(0, 0)] += 1;
    EXPECT_GT(chi2_gof_p(hist, {draws / 6.0, draws * 4.0 / 6.0, draws / 6.0}), 0.01);
}

TEST(FixedMargin, MatchesEnumeratedShuffles) {
    // rows (2,1,1), cols (1,2,1): distribution of the full table versus all 4! label orders.
    const std::vector<std::uint64_t> rows{2, 1, 1}, cols{1, 2, 1};
    std::map<std::vector<std::uint64_t>, double> exact;
    std::vector<int> x{0, 0, 1, 2}, y{0, 1, 1, 2};
    std::sort(y.begin(), y.end());
    int perms = 0;
    do {
        std::vector<std::uint64_t> t(9, 0);
        for (int i = 0; i < 4; ++i) ++t[x[i] * 3 + y[i]];
        exact[t] += 1;
        ++perms;
    } while (std::next_permutation(y.begin(), y.end()));
    Rng rng(5);
    const int draws = 60000;
    std::map<std::vector<std::uint64_t>, double> seen;
    for (int i = 0; i < draws; ++i) seen[fixed_margin_sample(rows, cols, rng).cells] += 1;
    std::vector<double> obs, expct;
    for (const auto& [t, c] : exact) {
        obs.push_back(seen[t]);
        expct.push_back(c / perms * draws);
    }
    EXPECT_EQ(seen.size(), exact.size());
    EXPECT_GT(chi2_gof_p(obs, expct), 0.01);
}

TEST(FixedMargin, DegenerateMargins) {
    Rng rng(1);
    const std::vector<std::uint64_t> rows{5, 0}, cols{2, 3};
    for (int i = 0; i < 20; ++i) {
        const auto t = fixed_margin_sample(rows, cols, rng);
        EXPECT_EQ(t.at(0, 0), 2u);
        EXPECT_EQ(t.at(0, 1), 3u);
        EXPECT_EQ(t.at(1, 0) + t.at(1, 1), 0u);
    }
}

TEST(FixedMargin, ReproducesMargins) {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const auto r = 1 + uniform_below(rng, 5), c = 1 + uniform_below(rng, 5);
        std::vector<std::uint64_t> rows(r, 0), cols(c, 0);
        const auto n = 1 + uniform_below(rng, 500);
        for (std::uint64_t i = 0; i < n; ++i) {
            ++rows[uniform_below(rng, r)];
            ++cols[uniform_below(rng, c)];
        }
        const auto t = fixed_margin_sample(rows, cols, rng);
        for (std::size_t i = 0; i < r; ++i) {
            std::uint64_t s = 0;
            for (std::size_t j = 0; j < c; ++j) s += t.at(i, j);
            EXPECT_EQ(s, rows[i]);
        }
        for (std::size_t j = 0; j < c; ++j) {
            std::uint64_t s = 0;
            for (std::size_t i = 0; i < r; ++i) s += t.at(i, j);
            EXPECT_EQ(s, cols[j]);
        }
    }
}

TEST(FixedMargin, MismatchRejected) {
    Rng rng(1);
    const std::vector<std::uint64_t> rows{2, 2}, cols{1, 2};
    EXPECT_THROW(fixed_margin_sample(rows, cols, rng), UsageError);
    const std::vector<std::uint64_t> zero{0, 0};
    EXPECT_THROW(fixed_margin_sample(zero, zero, rng), UsageError);
}

TEST(Hypergeometric, MeanAndRange) {
    Rng rng(3);
    LogFactorials lf(1000);
    double sum = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        const auto k = sample_hypergeometric(300, 400, 1000, rng, lf);
        ASSERT_LE(k, 300u);
        sum += static_cast<double>(k);
    }
    // mean 120, sd about 6.9
    EXPECT_NEAR(sum / draws, 120.0, 0.3);
}

TEST(Mit, DeterministicPairMatchesExactEnumeration) {
    const auto ds = Dataset::from_rows({"T", "Y"}, {{"0", "0"}, {"0", "0"}, {"1", "1"}, {"1", "1"}});
    EXPECT_NEAR(exact_permutation_p(ds, 0, 1, {}), 1.0 / 3.0, 1e-12);
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    cfg.permutations = 20000;
    cfg.seed = 9;
    const auto r = mit_test(counts, {0}, {1}, {}, cfg);
    EXPECT_EQ(r.method, Method::mit);
    EXPECT_LE(r.ci_low, 1.0 / 3.0);
    EXPECT_GE(r.ci_high, 1.0 / 3.0);
}

TEST(Mit, TinyDatasetsWithinIntervalOfExactP) {
    Rng rng(31);
    TestConfig cfg;
    cfg.permutations = 2000;
    int inside = 0, total = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = 4 + uniform_below(rng, 5);
        std::vector<std::vector<Code>> cols(3, std::vector<Code>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (auto& c : cols) c[i] = static_cast<Code>(uniform_below(rng, 2));
        const auto ds = coded({"X", "Y", "Z"}, cols);
        CountCache counts(ds, Selection::all(ds));
        cfg.seed = static_cast<std::uint64_t>(trial);
        const auto r = mit_test(counts, {0}, {1}, {2}, cfg);
        const double exact = exact_permutation_p(ds, 0, 1, {2});
        ++total;
        if (r.ci_low <= exact && exact <= r.ci_high) ++inside;
        EXPECT_GE(r.p_value, 0.0);
        EXPECT_LE(r.p_value, 1.0);
    }
    EXPECT_GE(inside, total * 85 / 100);
}

TEST(Mit, PValueFloorAndInterval) {
    TestResult r;
    permutation_p_value(0, 1000, r);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 1001.0);
    EXPECT_LE(r.ci_low, r.p_value);
    EXPECT_GE(r.ci_high, r.p_value);
    permutation_p_value(1000, 1000, r);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
    EXPECT_DOUBLE_EQ(r.ci_high, 1.0);
}

TEST(Mit, UniformPValuesUnderIndependence) {
    std::vector<double> ps;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(derive_seed(1234, seed));
        std::vector<std::vector<Code>> cols(2, std::vector<Code>(100000));
        for (std::size_t i = 0; i < cols[0].size(); ++i) {
            cols[0][i] = coin(rng, 0.5);
            cols[1][i] = coin(rng, 0.5);
        }
        const auto ds = coded({"T", "Y"}, cols);
        CountCache counts(ds, Selection::all(ds));
        TestConfig cfg;
        cfg.seed = seed;
        ps.push_back(mit_test(counts, {0}, {1}, {}, cfg).p_value);
    }
    // 5% critical value of the one-sample KS statistic.
    EXPECT_LT(ks_uniform(ps), 1.36 / std::sqrt(200.0));
}

TEST(Mit, SeedDeterminismAndThreadIndependence) {
    const auto ds = conditional_null(20000, 300, 8);
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    cfg.seed = 42;
    cfg.permutations = 300;
    const auto a = mit_test(counts, {0}, {1}, {2}, cfg);
    const auto b = mit_test(counts, {0}, {1}, {2}, cfg);
    cfg.threads = 4;
    const auto c = mit_test(counts, {0}, {1}, {2}, cfg);
    EXPECT_EQ(a.p_value, b.p_value);
    EXPECT_EQ(a.p_value, c.p_value);
    EXPECT_EQ(a.statistic, c.statistic);
}

TEST(Mit, EveryGroupDegenerate) {
    // X is constant within each Z group, so nothing can be permuted.
    const auto ds = Dataset::from_rows({"X", "Y", "Z"},
                                          {{"0", "0", "a"}, {"0", "1", "a"}, {"1", "0", "b"}, {"1", "1", "b"}});
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    const auto r = mit_test(counts, {0}, {1}, {2}, cfg);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.statistic, 0.0);
}

TEST(GroupSampling, PureGroupsGiveEmptySample) {
    const auto ds = Dataset::from_rows(
        {"X", "Y", "Z"}, {{"0", "0", "a"}, {"0", "0", "a"}, {"1", "1", "b"}, {"1", "1", "b"}, {"0", "1", "c"}});
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    cfg.group_sample.enabled = true;
    EXPECT_TRUE(weighted_group_sample(counts, {0}, {1}, {2}, cfg).empty());
    const auto r = mit_test(counts, {0}, {1}, {2}, cfg);
    EXPECT_EQ(r.method, Method::mit_sampled);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.statistic, 0.0);
}

TEST(GroupSampling, SingleGroupAlwaysChosen) {
    const auto ds = conditional_null(200, 1, 3);
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    cfg.group_sample.enabled = true;
    for (std::uint64_t s = 0; s < 10; ++s) {
        cfg.seed = s;
        EXPECT_EQ(weighted_group_sample(counts, {0}, {1}, {2}, cfg).size(), 1u);
    }
}

TEST(GroupSampling, SizeIsLogarithmic) {
    const auto ds = conditional_null(50000, 400, 4);
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    cfg.group_sample.enabled = true;
    const auto chosen = weighted_group_sample(counts, {0}, {1}, {2}, cfg);
    EXPECT_EQ(chosen.size(), static_cast<std::size_t>(std::ceil(3.0 * std::log(400.0))));
    cfg.group_sample.c = 1.0;
    EXPECT_EQ(weighted_group_sample(counts, {0}, {1}, {2}, cfg).size(),
              static_cast<std::size_t>(std::ceil(std::log(400.0))));
}

TEST(GroupSampling, FavoursHeavyGroups) {
    // Group "big" holds most rows; it should be picked far more often than a light group.
    std::vector<std::vector<std::string>> cells;
    Rng rng(10);
    for (int i = 0; i < 2000; ++i) cells.push_back({std::to_string(coin(rng, .5)), std::to_string(coin(rng, .5)), "big"});
    for (int g = 0; g < 30; ++g)
        for (int i = 0; i < 10; ++i)
            cells.push_back({std::to_string(coin(rng, .5)), std::to_string(coin(rng, .5)), "g" + std::to_string(g)});
    const auto ds = Dataset::from_rows({"X", "Y", "Z"}, cells);
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    cfg.group_sample.enabled = true;
    cfg.group_sample.c = 0.5;
    const Code big = *ds.column(2).encode("big");
    int picked = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        cfg.seed = s;
        for (const auto& z : weighted_group_sample(counts, {0}, {1}, {2}, cfg)) picked += z[0] == big;
    }
    EXPECT_GE(picked, 45);
}

TEST(Chi2, DiagonalTable) {
    const auto ds = dataset_from_counts({"X", "Y"}, {{{"0", "0"}, 10}, {{"1", "1"}, 10}});
    CountCache counts(ds, Selection::all(ds));
    const auto r = chi2_test(counts, {0}, {1}, {}, TestConfig{});
    EXPECT_EQ(r.df, 1.0);
    EXPECT_NEAR(2.0 * 20.0 * r.statistic, 2.0 * 20.0 * std::log(2.0), 1e-9);
    EXPECT_NEAR(2.0 * 20.0 * r.statistic, 27.7, 0.05);
    EXPECT_LT(r.p_value, 1e-6);
}

TEST(Chi2, ConstantOutcome) {
    const auto ds = dataset_from_counts({"X", "Y"}, {{{"0", "1"}, 10}, {{"1", "1"}, 7}});
    CountCache counts(ds, Selection::all(ds));
    const auto r = chi2_test(counts, {0}, {1}, {}, TestConfig{});
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
}

TEST(Chi2, DegreesOfFreedomUseObservedLevels) {
    const auto ds = conditional_null(5000, 7, 12);
    CountCache counts(ds, Selection::all(ds));
    EXPECT_EQ(chi2_test(counts, {0}, {1}, {2}, TestConfig{}).df, 7.0);
    // three X levels observed, two Y levels, four Z groups
    std::vector<std::vector<Code>> cols(3);
    Rng rng(2);
    for (int i = 0; i < 400; ++i) {
        cols[0].push_back(static_cast<Code>(uniform_below(rng, 3)));
        cols[1].push_back(static_cast<Code>(uniform_below(rng, 2)));
        cols[2].push_back(static_cast<Code>(uniform_below(rng, 4)));
    }
    const auto ds2 = coded({"X", "Y", "Z"}, cols);
    CountCache c2(ds2, Selection::all(ds2));
    EXPECT_EQ(chi2_test(c2, {0}, {1}, {2}, TestConfig{}).df, 2.0 * 1.0 * 4.0);
}

TEST(Chi2, CalibratedUnderNull) {
    int rejections = 0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        const auto ds = conditional_null(2000, 4, derive_seed(99, t));
        CountCache counts(ds, Selection::all(ds));
        TestConfig cfg;
        cfg.alpha = 0.05;
        rejections += chi2_test(counts, {0}, {1}, {2}, cfg).rejects(0.05);
    }
    EXPECT_LE(rejections, static_cast<int>(1.5 * 0.05 * trials));
}

TEST(Hymit, ChiSquareBranchWhenDfSmall) {
    const auto ds = conditional_null(10000, 10, 5);
    CountCache counts(ds, Selection::all(ds));
    EXPECT_EQ(hymit_test(counts, {0}, {1}, {2}, TestConfig{}).method, Method::chi2);
}

TEST(Hymit, PermutationBranchWhenDfLarge) {
    std::vector<std::vector<Code>> cols(3);
    Rng rng(6);
    for (Code i = 0; i < 100; ++i) {
        cols[0].push_back(coin(rng, .5));
        cols[1].push_back(coin(rng, .5));
        cols[2].push_back(i / 2);
    }
    const auto ds = coded({"X", "Y", "Z"}, cols);
    CountCache counts(ds, Selection::all(ds));
    const auto r = hymit_test(counts, {0}, {1}, {2}, TestConfig{});
    EXPECT_EQ(r.method, Method::mit);
    EXPECT_GT(r.df, 100.0 / 5.0);
}

TEST(Hymit, BranchesAgreeOnStrongDependence) {
    Rng rng(8);
    std::vector<std::vector<Code>> cols(3);
    for (int i = 0; i < 3000; ++i) {
        const Code z = static_cast<Code>(uniform_below(rng, 5));
        const Code x = coin(rng, 0.5);
        cols[0].push_back(x);
        cols[1].push_back(coin(rng, 0.85) ? x : 1 - x);
        cols[2].push_back(z);
    }
    const auto ds = coded({"X", "Y", "Z"}, cols);
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    EXPECT_TRUE(chi2_test(counts, {0}, {1}, {2}, cfg).rejects(cfg.alpha));
    EXPECT_TRUE(mit_test(counts, {0}, {1}, {2}, cfg).rejects(cfg.alpha));
    cfg.beta = 1e9;  // forces the permutation branch
    EXPECT_EQ(hymit_test(counts, {0}, {1}, {2}, cfg).method, Method::mit);
    EXPECT_TRUE(hymit_test(counts, {0}, {1}, {2}, cfg).rejects(cfg.alpha));
}

TEST(Shuffle, AgreesWithMitOnModerateData) {
    const auto ds = conditional_null(3000, 4, 14);
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    cfg.permutations = 2000;
    const auto a = mit_test(counts, {0}, {1}, {2}, cfg);
    const auto b = shuffle_test(counts, {0}, {1}, {2}, cfg);
    EXPECT_DOUBLE_EQ(a.statistic, b.statistic);
    EXPECT_NEAR(a.p_value, b.p_value, 0.06);
}

TEST(Stratify, CompoundVariablesAndOrderInvariance) {
    const auto ds = simpson_dataset();
    CountCache counts(ds, Selection::all(ds));
    TestConfig cfg;
    const auto a = run_test(TestKind::mit, counts, {0}, {1, 2}, {}, cfg);
    const auto b = run_test(TestKind::mit, counts, {0}, {2, 1}, {}, cfg);
    EXPECT_EQ(a.p_value, b.p_value);
    EXPECT_EQ(a.statistic, b.statistic);
    EXPECT_NEAR(a.statistic, brute_cmi(ds, all_rows(ds), {0}, {1, 2}, {}), 1e-12);
}

TEST(Stratify, OverlapAndEmptySetsRejected) {
    const auto ds = simpson_dataset();
    CountCache counts(ds, Selection::all(ds));
    EXPECT_THROW(stratify(counts, {0}, {0}, {}), UsageError);
    EXPECT_THROW(stratify(counts, {0}, {1}, {0}), UsageError);
    EXPECT_THROW(stratify(counts, {}, {1}, {}), UsageError);
}

TEST(Config, Validation) {
    TestConfig cfg;
    cfg.alpha = 0.0;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.alpha = 0.05;
    cfg.permutations = 0;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.permutations = 10;
    cfg.beta = 0.5;
    EXPECT_THROW(cfg.validate(), UsageError);
    EXPECT_THROW(parse_test_kind("fisher"), UsageError);
    EXPECT_EQ(parse_test_kind("hymit"), TestKind::hymit);
}
