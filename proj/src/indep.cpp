#include "causalq/indep.hpp"

#include "causalq/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

namespace causalq {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr std::size_t kGroupBlock = 64;

const std::vector<double>& nlogn_table(std::uint64_t n) {
    thread_local std::vector<double> table{0.0};
    if (table.size() <= n) {
        const std::size_t old = table.size();
        table.resize(n + 1);
        for (std::size_t k = old; k <= n; ++k) {
            const auto v = static_cast<double>(k);
            table[k] = v * std::log(v);
        }
    }
    return table;
}

const LogFactorials& log_factorials(std::uint64_t n) {
    thread_local LogFactorials lf;
    lf.reserve(n);
    return lf;
}

// n ln n - sum r ln r - sum c ln c: the margin-only part of n * I(X;Y).
double margin_term(const Stratum& s, const std::vector<double>& nl) {
    double t = nl[s.n];
    for (auto r : s.row_margins) t -= nl[r];
    for (auto c : s.col_margins) t -= nl[c];
    return t;
}

double cell_term(std::span<const std::uint64_t> cells, const std::vector<double>& nl) {
    double t = 0.0;
    for (auto c : cells) t += nl[c];
    return t;
}

std::uint64_t hash_codes(std::uint64_t h, std::span<const Code> codes) {
    for (auto c : codes) h = splitmix64(h ^ (c + 0x51ed27ULL));
    return h;
}

std::uint64_t attr_stream(const AttrSet& x, const AttrSet& y, const AttrSet& z) {
    std::uint64_t h = 0x1234567ULL;
    for (const auto* set : {&x, &y, &z}) {
        h = splitmix64(h ^ set->size());
        for (auto a : *set) h = splitmix64(h ^ a);
    }
    return h;
}

AttrSet sorted(AttrSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

void check_disjoint(const AttrSet& x, const AttrSet& y, const AttrSet& z) {
    if (x.empty() || y.empty()) throw UsageError("independence test: X and Y must be nonempty");
    std::set<AttrId> seen;
    for (const auto* set : {&x, &y, &z}) {
        for (auto a : *set) {
            if (!seen.insert(a).second) throw UsageError("independence test: X, Y, Z must be disjoint");
        }
    }
}

double plugin_entropy_of(const std::vector<std::uint64_t>& counts, std::uint64_t n) {
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double f = static_cast<double>(c) / static_cast<double>(n);
        h -= f * std::log(f);
    }
    return h;
}

// Observed statistic over `active` groups, summed block by block exactly as the
// permuted statistics are, so identical tables give identical sums.
double blocked_statistic(const Strata& st, const std::vector<std::size_t>& active) {
    const auto& nl = nlogn_table(st.total);
    const double total = static_cast<double>(st.total);
    double sum = 0.0;
    for (std::size_t b = 0; b < active.size(); b += kGroupBlock) {
        double partial = 0.0;
        for (std::size_t i = b; i < std::min(active.size(), b + kGroupBlock); ++i) {
            const auto& g = st.groups[active[i]];
            const double mi = (margin_term(g, nl) + cell_term(g.cells, nl)) / static_cast<double>(g.n);
            partial += (static_cast<double>(g.n) / total) * mi;
        }
        sum += partial;
    }
    return sum;
}

void permute_block(const Strata& st, std::span<const std::size_t> groups, std::size_t m, std::uint64_t seed,
                   std::vector<double>& partial) {
    partial.assign(m, 0.0);
    std::uint64_t max_n = 0;
    for (auto gi : groups) max_n = std::max(max_n, st.groups[gi].n);
    const auto& nl = nlogn_table(st.total);
    const auto& lf = log_factorials(max_n);
    const double total = static_cast<double>(st.total);
    std::vector<std::uint64_t> scratch;
    std::vector<std::uint64_t> table;
    for (auto gi : groups) {
        const auto& g = st.groups[gi];
        Rng rng(derive_seed(seed, hash_codes(st.stream, g.z)));
        const double margin = margin_term(g, nl);
        const double weight = static_cast<double>(g.n) / total;
        const double n = static_cast<double>(g.n);
        table.assign(g.cells.size(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            fixed_margin_sample(g.row_margins, g.col_margins, rng, lf, scratch, table);
            partial[i] += weight * ((margin + cell_term(table, nl)) / n);
        }
    }
}

TestResult mit_core(const Strata& st, const std::vector<std::size_t>& active, const TestConfig& cfg,
                    Method method) {
    TestResult out;
    out.method = method;
    out.permutations = cfg.permutations;
    out.groups = st.groups.size();
    out.groups_used = active.size();
    std::vector<std::size_t> all(st.groups.size());
    std::iota(all.begin(), all.end(), 0);
    out.statistic = std::max(0.0, blocked_statistic(st, all));
    if (active.empty()) {
        permutation_p_value(cfg.permutations, cfg.permutations, out);
        return out;
    }
    const double observed = blocked_statistic(st, active);
    const std::size_t m = cfg.permutations;
    const std::size_t blocks = (active.size() + kGroupBlock - 1) / kGroupBlock;
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, blocks));

    std::vector<double> sums(m, 0.0);
    std::vector<std::vector<double>> partials(workers);
    for (std::size_t wave = 0; wave < blocks; wave += workers) {
        const std::size_t count = std::min(workers, blocks - wave);
        auto run = [&](std::size_t w) {
            const std::size_t b = wave + w;
            const std::size_t first = b * kGroupBlock;
            const std::size_t last = std::min(active.size(), first + kGroupBlock);
            permute_block(st, std::span(active).subspan(first, last - first), m, cfg.seed, partials[w]);
        };
        if (count == 1) {
            run(0);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < count; ++w) pool.emplace_back(run, w);
        }
        for (std::size_t w = 0; w < count; ++w) {
            for (std::size_t i = 0; i < m; ++i) sums[i] += partials[w][i];
        }
    }
    const double threshold = observed - kTieTolerance * std::max(1.0, std::abs(observed));
    const auto hits = static_cast<std::size_t>(
        std::count_if(sums.begin(), sums.end(), [&](double s) { return s >= threshold; }));
    permutation_p_value(hits, m, out);
    return out;
}

double degrees_of_freedom(const Strata& st) {
    if (st.x_levels < 2 || st.y_levels < 2) return 0.0;
    return static_cast<double>(st.x_levels - 1) * static_cast<double>(st.y_levels - 1) *
           static_cast<double>(st.groups.size());
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::chi2: return "chi2";
        case Method::mit: return "mit";
        case Method::mit_sampled: return "mit-sampled";
        case Method::shuffle: return "shuffle";
    }
    return "?";
}

std::string to_string(TestKind k) {
    switch (k) {
        case TestKind::chi2: return "chi2";
        case TestKind::mit: return "mit";
        case TestKind::hymit: return "hymit";
        case TestKind::shuffle: return "shuffle";
    }
    return "?";
}

TestKind parse_test_kind(const std::string& s) {
    if (s == "chi2") return TestKind::chi2;
    if (s == "mit") return TestKind::mit;
    if (s == "hymit") return TestKind::hymit;
    if (s == "shuffle") return TestKind::shuffle;
    throw UsageError("unknown test method '" + s + "' (expected chi2, mit, hymit or shuffle)");
}

void TestConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    if (permutations < 1) throw UsageError("permutations must be >= 1");
    if (!(beta >= 1.0)) throw UsageError("beta must be >= 1");
    if (group_sample.enabled && !(group_sample.c > 0.0)) throw UsageError("group sample constant must be > 0");
}

void permutation_p_value(std::size_t hits, std::size_t m, TestResult& out) {
    const double md = static_cast<double>(m);
    double p = static_cast<double>(hits) / md;
    p = std::max(p, 1.0 / (md + 1.0));
    const double half = 1.96 * std::sqrt(p * (1.0 - p) / md);
    out.p_value = p;
    out.ci_low = std::max(0.0, p - half);
    out.ci_high = std::min(1.0, p + half);
}

Strata stratify(const CountCache& counts, const AttrSet& x_in, const AttrSet& y_in, const AttrSet& z_in) {
    check_disjoint(x_in, y_in, z_in);
    if (counts.selection().empty()) throw UsageError("independence test: empty selection");
    const AttrSet xs = sorted(x_in), ys = sorted(y_in), zs = sorted(z_in);
    AttrSet order = zs;
    order.insert(order.end(), xs.begin(), xs.end());
    order.insert(order.end(), ys.begin(), ys.end());
    const auto table = counts.table(order);
    const std::size_t kz = zs.size(), kx = xs.size(), ky = ys.size();

    Strata st;
    st.total = table->total();
    st.stream = attr_stream(xs, ys, zs);
    std::set<std::vector<Code>> x_levels, y_levels;

    std::size_t cell = 0;
    const std::size_t cells = table->cell_count();
    while (cell < cells) {
        auto zkey = table->key(cell).subspan(0, kz);
        std::size_t end = cell;
        while (end < cells && std::equal(zkey.begin(), zkey.end(), table->key(end).begin())) ++end;

        Stratum g;
        g.z.assign(zkey.begin(), zkey.end());
        std::vector<std::vector<Code>> ykeys;
        for (std::size_t i = cell; i < end; ++i) {
            auto k = table->key(i);
            ykeys.emplace_back(k.begin() + kz + kx, k.end());
        }
        std::sort(ykeys.begin(), ykeys.end());
        ykeys.erase(std::unique(ykeys.begin(), ykeys.end()), ykeys.end());
        std::vector<std::size_t> row_of(end - cell);
        std::size_t rows = 0;
        for (std::size_t i = cell; i < end; ++i) {
            auto k = table->key(i);
            if (i > cell) {
                auto prev = table->key(i - 1);
                if (!std::equal(k.begin() + kz, k.begin() + kz + kx, prev.begin() + kz)) ++rows;
            }
            row_of[i - cell] = rows;
            x_levels.emplace(k.begin() + kz, k.begin() + kz + kx);
        }
        ++rows;
        for (auto& yk : ykeys) y_levels.insert(yk);
        g.row_margins.assign(rows, 0);
        g.col_margins.assign(ykeys.size(), 0);
        g.cells.assign(rows * ykeys.size(), 0);
        for (std::size_t i = cell; i < end; ++i) {
            auto k = table->key(i);
            std::vector<Code> yk(k.begin() + kz + kx, k.end());
            const auto col = static_cast<std::size_t>(
                std::lower_bound(ykeys.begin(), ykeys.end(), yk) - ykeys.begin());
            const auto c = table->count(i);
            const auto r = row_of[i - cell];
            g.cells[r * ykeys.size() + col] += c;
            g.row_margins[r] += c;
            g.col_margins[col] += c;
            g.n += c;
        }
        st.groups.push_back(std::move(g));
        cell = end;
    }
    (void)ky;
    st.x_levels = x_levels.size();
    st.y_levels = y_levels.size();
    return st;
}

double conditional_mi(const Strata& st) {
    std::vector<std::size_t> all(st.groups.size());
    std::iota(all.begin(), all.end(), 0);
    return blocked_statistic(st, all);
}

std::vector<std::size_t> weighted_group_sample(const Strata& st, const TestConfig& cfg) {
    std::vector<std::pair<double, std::size_t>> keyed;
    Rng rng(derive_seed(cfg.seed, st.stream ^ 0x5a3b1ULL));
    const double total = static_cast<double>(st.total);
    for (std::size_t i = 0; i < st.groups.size(); ++i) {
        const auto& g = st.groups[i];
        const double w = (static_cast<double>(g.n) / total) *
                         std::max(plugin_entropy_of(g.row_margins, g.n), plugin_entropy_of(g.col_margins, g.n));
        const double u = uniform01(rng);
        if (w <= 0.0) continue;
        // Efraimidis-Spirakis: the k largest u^(1/w) form a weighted sample without replacement.
        keyed.emplace_back(std::log1p(-u) / w, i);
    }
    const double size = std::ceil(cfg.group_sample.c * std::log(static_cast<double>(st.groups.size())));
    const std::size_t take = std::min(keyed.size(), std::max<std::size_t>(1, static_cast<std::size_t>(size)));
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(take), keyed.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < take; ++i) chosen.push_back(keyed[i].second);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<std::vector<Code>> weighted_group_sample(const CountCache& counts, const AttrSet& x, const AttrSet& y,
                                                     const AttrSet& z, const TestConfig& cfg) {
    const auto st = stratify(counts, x, y, z);
    std::vector<std::vector<Code>> out;
    for (auto i : weighted_group_sample(st, cfg)) out.push_back(st.groups[i].z);
    return out;
}

namespace {

TestResult chi2_from(const Strata& st) {
    TestResult out;
    out.method = Method::chi2;
    out.groups = out.groups_used = st.groups.size();
    out.statistic = std::max(0.0, conditional_mi(st));
    out.df = degrees_of_freedom(st);
    if (out.df <= 0.0) {
        out.p_value = out.ci_low = out.ci_high = 1.0;
        return out;
    }
    const double g = 2.0 * static_cast<double>(st.total) * out.statistic;
    out.p_value = boost::math::gamma_q(out.df / 2.0, g / 2.0);
    out.ci_low = out.ci_high = out.p_value;
    return out;
}

TestResult mit_from(const Strata& st, const TestConfig& cfg) {
    std::vector<std::size_t> active;
    Method method = Method::mit;
    if (cfg.group_sample.enabled) {
        active = weighted_group_sample(st, cfg);
        method = Method::mit_sampled;
    } else {
        for (std::size_t i = 0; i < st.groups.size(); ++i) {
            if (!st.groups[i].degenerate()) active.push_back(i);
        }
    }
    auto out = mit_core(st, active, cfg, method);
    out.df = degrees_of_freedom(st);
    return out;
}

}  // namespace

TestResult chi2_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                     const TestConfig& cfg) {
    cfg.validate();
    return chi2_from(stratify(counts, x, y, z));
}

TestResult mit_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                    const TestConfig& cfg) {
    cfg.validate();
    return mit_from(stratify(counts, x, y, z), cfg);
}

TestResult hymit_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                      const TestConfig& cfg) {
    cfg.validate();
    const auto st = stratify(counts, x, y, z);
    if (degrees_of_freedom(st) <= static_cast<double>(st.total) / cfg.beta) return chi2_from(st);
    return mit_from(st, cfg);
}

TestResult shuffle_test(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
                        const TestConfig& cfg) {
    cfg.validate();
    check_disjoint(x, y, z);
    const auto& ds = counts.dataset();
    const auto& rows = counts.selection().rows();
    if (rows.empty()) throw UsageError("independence test: empty selection");

    // Dense per-row ids for Z group, X level and Y level.
    auto ids_for = [&](const AttrSet& attrs) {
        std::map<std::vector<Code>, std::uint32_t> index;
        std::vector<std::vector<Code>> keys(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (auto a : sorted(attrs)) keys[i].push_back(ds.column(a).code(rows[i]));
            index.emplace(keys[i], 0);
        }
        std::uint32_t next = 0;
        for (auto& [k, v] : index) v = next++;
        std::vector<std::uint32_t> ids(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) ids[i] = index.at(keys[i]);
        return std::pair{ids, static_cast<std::size_t>(next)};
    };
    auto [zid, nz] = ids_for(z);
    auto [xid, nx] = ids_for(x);
    auto [yid, ny] = ids_for(y);

    // Rows ordered by group so each group is a contiguous slice.
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return zid[a] < zid[b]; });
    std::vector<std::size_t> bounds{0};
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (zid[order[i]] != zid[order[i - 1]]) bounds.push_back(i);
    }
    bounds.push_back(order.size());
    std::vector<std::uint32_t> xs(order.size()), ys(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        xs[i] = xid[order[i]];
        ys[i] = yid[order[i]];
    }

    const double total = static_cast<double>(rows.size());
    const auto& nl = nlogn_table(rows.size());
    std::vector<std::uint64_t> cells(nx * ny), rm(nx), cm(ny);
    auto statistic = [&]() {
        double s = 0.0;
        for (std::size_t g = 0; g + 1 < bounds.size(); ++g) {
            std::fill(cells.begin(), cells.end(), 0);
            std::fill(rm.begin(), rm.end(), 0);
            std::fill(cm.begin(), cm.end(), 0);
            for (std::size_t i = bounds[g]; i < bounds[g + 1]; ++i) {
                ++cells[xs[i] * ny + ys[i]];
                ++rm[xs[i]];
                ++cm[ys[i]];
            }
            const auto n = bounds[g + 1] - bounds[g];
            double t = nl[n];
            for (auto r : rm) t -= nl[r];
            for (auto c : cm) t -= nl[c];
            for (auto c : cells) t += nl[c];
            s += (static_cast<double>(n) / total) * (t / static_cast<double>(n));
        }
        return s;
    };

    TestResult out;
    out.method = Method::shuffle;
    out.permutations = cfg.permutations;
    out.groups = out.groups_used = nz;
    const double observed = statistic();
    out.statistic = std::max(0.0, observed);
    Rng rng(derive_seed(cfg.seed, attr_stream(sorted(x), sorted(y), sorted(z))));
    const double threshold = observed - kTieTolerance * std::max(1.0, std::abs(observed));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cfg.permutations; ++i) {
        for (std::size_t g = 0; g + 1 < bounds.size(); ++g) {
            shuffle(xs.begin() + static_cast<std::ptrdiff_t>(bounds[g]),
                    xs.begin() + static_cast<std::ptrdiff_t>(bounds[g + 1]), rng);
        }
        if (statistic() >= threshold) ++hits;
    }
    permutation_p_value(hits, cfg.permutations, out);
    return out;
}

TestResult run_test(TestKind kind, const CountCache& counts, const AttrSet& x, const AttrSet& y,
                    const AttrSet& z, const TestConfig& cfg) {
    switch (kind) {
        case TestKind::chi2: return chi2_test(counts, x, y, z, cfg);
        case TestKind::mit: return mit_test(counts, x, y, z, cfg);
        case TestKind::hymit: return hymit_test(counts, x, y, z, cfg);
        case TestKind::shuffle: return shuffle_test(counts, x, y, z, cfg);
    }
    throw UsageError("unknown test kind");
}

}  // namespace causalq
