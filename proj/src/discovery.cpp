#include "causalq/discovery.hpp"

#include "causalq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace causalq {

namespace {

bool contains(const AttrSet& s, AttrId a) { return std::find(s.begin(), s.end(), a) != s.end(); }

AttrSet without(AttrSet s, std::initializer_list<AttrId> drop) {
    std::erase_if(s, [&](AttrId a) { return std::find(drop.begin(), drop.end(), a) != drop.end(); });
    return s;
}

AttrSet sorted_unique(AttrSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

AttrSet united(const AttrSet& a, const AttrSet& b) {
    AttrSet out = a;
    out.insert(out.end(), b.begin(), b.end());
    return sorted_unique(std::move(out));
}

TraceEntry record(std::string step, AttrId candidate, AttrId other, const AttrSet& given, const TestResult& r,
                  double alpha) {
    return TraceEntry{std::move(step), candidate, other, given, r.p_value, !r.rejects(alpha)};
}

double mm_entropy_of_rows(const Column& col, std::span<const std::uint32_t> rows, std::vector<std::uint32_t>& counts,
                          std::vector<Code>& touched) {
    counts.resize(col.cardinality(), 0);
    touched.clear();
    for (auto r : rows) {
        const Code c = col.code(r);
        if (counts[c]++ == 0) touched.push_back(c);
    }
    const double n = static_cast<double>(rows.size());
    double h = 0.0;
    for (auto c : touched) {
        const double f = counts[c] / n;
        h -= f * std::log(f);
        counts[c] = 0;
    }
    return h + (static_cast<double>(touched.size()) - 1.0) / (2.0 * n);
}

}  // namespace

std::vector<AttrSet> subsets_by_size(const AttrSet& items) {
    std::vector<AttrSet> out;
    const std::size_t n = items.size();
    for (std::size_t k = 0; k <= n; ++k) {
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
            AttrSet s;
            for (auto i : idx) s.push_back(items[i]);
            out.push_back(std::move(s));
            // Advance to the next k-combination in lexicographic order.
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

DataOracle::DataOracle(CountCache& counts, TestKind kind, TestConfig cfg)
    : counts_(counts), kind_(kind), cfg_(cfg) {
    cfg_.validate();
}

TestResult DataOracle::test(AttrId x, AttrId y, const AttrSet& z) {
    Key key{std::min(x, y), std::max(x, y), sorted_unique(z)};
    {
        std::lock_guard lock(mutex_);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const auto result = run_test(kind_, counts_, {std::get<0>(key)}, {std::get<1>(key)}, std::get<2>(key), cfg_);
    std::lock_guard lock(mutex_);
    memo_.emplace(std::move(key), result);
    return result;
}

double DataOracle::association(AttrId x, AttrId y) {
    const auto key = std::pair{std::min(x, y), std::max(x, y)};
    {
        std::lock_guard lock(mutex_);
        if (auto it = assoc_.find(key); it != assoc_.end()) return it->second;
    }
    const double v = cmi(counts_, {x}, {y}, {}, Estimator::plugin, &entropies_).value;
    std::lock_guard lock(mutex_);
    assoc_.emplace(key, v);
    return v;
}

std::size_t DataOracle::tests_run() const {
    std::lock_guard lock(mutex_);
    return memo_.size();
}

void DataOracle::prefetch(const AttrSet& attrs) {
    double cells = 1.0;
    for (auto a : attrs) cells *= static_cast<double>(counts_.dataset().column(a).cardinality());
    if (attrs.empty() || cells > prefetch_limit_) return;
    counts_.materialize({sorted_unique(attrs)});
}

TestResult DsepOracle::test(AttrId x, AttrId y, const AttrSet& z) {
    auto key = std::tuple{std::min(x, y), std::max(x, y), sorted_unique(z)};
    auto it = memo_.find(key);
    if (it == memo_.end()) it = memo_.emplace(key, dsep(*dag_, x, y, z)).first;
    TestResult r;
    r.p_value = r.ci_low = r.ci_high = it->second ? 1.0 : 0.0;
    return r;
}

MarkovBoundary markov_boundary(IndependenceOracle& oracle, AttrId target, const AttrSet& candidates,
                               std::size_t max_size) {
    MarkovBoundary mb;
    mb.target = target;
    std::vector<std::pair<double, AttrId>> ranked;
    for (auto c : candidates) {
        if (c != target) ranked.emplace_back(oracle.association(target, c), c);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });

    // Co-parents only become dependent once their shared child is in, so repeat passes.
    for (bool grew = true; grew && !mb.truncated;) {
        grew = false;
        for (const auto& [assoc, x] : ranked) {
            if (std::find(mb.members.begin(), mb.members.end(), x) != mb.members.end()) continue;
            if (mb.members.size() >= max_size) {
                mb.truncated = true;
                break;
            }
            const auto r = oracle.test(target, x, mb.members);
            mb.trace.push_back(record("grow", x, target, mb.members, r, oracle.alpha()));
            if (r.rejects(oracle.alpha())) {
                mb.members.push_back(x);
                grew = true;
            }
        }
    }

    for (bool changed = true; changed;) {
        changed = false;
        for (auto x : AttrSet(mb.members)) {
            const auto rest = without(mb.members, {x});
            const auto r = oracle.test(target, x, rest);
            mb.trace.push_back(record("shrink", x, target, rest, r, oracle.alpha()));
            if (!r.rejects(oracle.alpha())) {
                mb.members = rest;
                changed = true;
            }
        }
    }
    return mb;
}

AttrSet drop_fd_attrs(const CountCache& counts, AttrId target, const AttrSet& candidates, double epsilon,
                      EntropyCache* cache) {
    if (epsilon < 0.0) throw UsageError("drop_fd_attrs: epsilon must be >= 0");
    AttrSet dropped;
    if (counts.selection().empty()) return dropped;
    const double h_t = entropy(counts, {target}, Estimator::miller_madow, cache);
    for (auto x : candidates) {
        if (x == target) continue;
        const double h_x = entropy(counts, {x}, Estimator::miller_madow, cache);
        const double h_tx = entropy(counts, {target, x}, Estimator::miller_madow, cache);
        if (h_tx - h_x <= epsilon && h_tx - h_t <= epsilon) dropped.push_back(x);
    }
    return dropped;
}

AttrSet drop_keylike_attrs(const Dataset& ds, const Selection& sel, const AttrSet& candidates,
                           const KeylikeOptions& options) {
    const std::size_t n = sel.size();
    std::vector<std::size_t> sizes = options.sizes;
    if (sizes.empty()) sizes = {n / 8, n / 4, n / 2, n};
    std::erase_if(sizes, [&](std::size_t s) { return s < 2 || s > n; });
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.size() < 3 || options.samples < 1 || candidates.empty()) return {};

    // One set of row samples shared by every attribute.
    Rng rng(derive_seed(options.seed, 0x6b65796c696b65ULL));
    std::vector<std::vector<std::uint32_t>> samples;
    std::vector<double> log_size;
    std::vector<std::uint32_t> pool = sel.rows();
    for (auto s : sizes) {
        for (std::size_t k = 0; k < options.samples; ++k) {
            for (std::size_t i = 0; i < s; ++i) {
                const auto j = i + uniform_below(rng, pool.size() - i);
                std::swap(pool[i], pool[j]);
            }
            samples.emplace_back(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s));
            log_size.push_back(std::log(static_cast<double>(s)));
        }
    }
    const double mean_x = std::accumulate(log_size.begin(), log_size.end(), 0.0) / static_cast<double>(log_size.size());
    std::vector<double> centered_x;
    for (double x : log_size) centered_x.push_back(x - mean_x);
    auto covariance = [&](const std::vector<double>& y) {
        double c = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) c += centered_x[i] * y[i];
        return c;
    };

    AttrSet dropped;
    std::vector<std::uint32_t> counts;
    std::vector<Code> touched;
    for (auto a : candidates) {
        const auto& col = ds.column(a);
        std::vector<double> h;
        for (const auto& rows : samples) h.push_back(mm_entropy_of_rows(col, rows, counts, touched));
        const double observed = covariance(h);
        if (!(observed > 1e-12)) continue;
        Rng perm_rng(derive_seed(options.seed, a + 1));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < options.permutations; ++i) {
            shuffle(h.begin(), h.end(), perm_rng);
            if (covariance(h) >= observed - 1e-12) ++hits;
        }
        TestResult r;
        permutation_p_value(hits, options.permutations, r);
        if (r.p_value < options.alpha) dropped.push_back(a);
    }
    return dropped;
}

ParentDiscovery::ParentDiscovery(IndependenceOracle& oracle, AttrSet universe, std::size_t max_boundary)
    : oracle_(oracle), universe_(sorted_unique(std::move(universe))), max_boundary_(max_boundary) {}

const MarkovBoundary& ParentDiscovery::boundary(AttrId target) {
    auto it = boundaries_.find(target);
    if (it == boundaries_.end()) {
        it = boundaries_.emplace(target, markov_boundary(oracle_, target, without(universe_, {target}), max_boundary_))
                 .first;
    }
    return it->second;
}

std::vector<AttrId> ParentDiscovery::by_association(AttrId anchor, AttrSet attrs) {
    std::vector<std::pair<double, AttrId>> ranked;
    for (auto a : attrs) ranked.emplace_back(oracle_.association(anchor, a), a);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    AttrSet out;
    for (const auto& [v, a] : ranked) out.push_back(a);
    return out;
}

ParentSearch ParentDiscovery::parents(AttrId target, const AttrSet& exclude) {
    ParentSearch out;
    out.target = target;
    out.boundary = boundary(target);
    const AttrSet& mb = out.boundary.members;
    const double alpha = oracle_.alpha();
    if (out.boundary.truncated) out.warnings.push_back("boundary of target truncated at max size");

    // Phase I: pairs (Z, W) that become dependent once the target is conditioned on.
    AttrSet collected;
    for (auto z : mb) {
        if (contains(collected, z)) continue;
        const auto& mbz = boundary(z);
        if (mbz.truncated) out.warnings.push_back("boundary of a candidate truncated at max size");
        oracle_.prefetch(united(united(mb, mbz.members), {target, z}));
        const auto pool = by_association(z, without(mbz.members, {target}));
        bool found = false;
        for (const auto& s : subsets_by_size(pool)) {
            for (auto w : mb) {
                if (w == z || contains(s, w)) continue;
                const auto r1 = oracle_.test(z, w, s);
                out.trace.push_back(record("phase1", z, w, s, r1, alpha));
                if (r1.rejects(alpha)) continue;
                AttrSet with_t = s;
                with_t.push_back(target);
                const auto r2 = oracle_.test(z, w, with_t);
                out.trace.push_back(record("phase1", z, w, with_t, r2, alpha));
                if (r2.rejects(alpha)) {
                    if (!contains(collected, z)) collected.push_back(z);
                    if (!contains(collected, w)) collected.push_back(w);
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
    }
    out.phase1 = sorted_unique(collected);

    // Phase II: drop candidates that some subset of the boundary separates from the target.
    oracle_.prefetch(united(mb, {target}));
    AttrSet kept;
    for (auto c : out.phase1) {
        const auto pool = by_association(target, without(mb, {c}));
        bool separated = false;
        for (const auto& s : subsets_by_size(pool)) {
            const auto r = oracle_.test(target, c, s);
            out.trace.push_back(record("phase2", c, target, s, r, alpha));
            if (!r.rejects(alpha)) {
                separated = true;
                break;
            }
        }
        if (!separated) kept.push_back(c);
    }

    if (kept.empty() && !mb.empty()) {
        out.fallback_used = true;
        kept = mb;
    }
    std::erase_if(kept, [&](AttrId a) { return a == target || contains(exclude, a); });
    out.parents = sorted_unique(kept);
    return out;
}

ParentSearch cd_covariates(ParentDiscovery& discovery, AttrId treatment, const AttrSet& outcomes) {
    return discovery.parents(treatment, outcomes);
}

ParentSearch mediators(ParentDiscovery& discovery, AttrId treatment, AttrId outcome) {
    return discovery.parents(outcome, {treatment});
}

std::vector<AttrSet> grow_shrink_parents(IndependenceOracle& oracle, const AttrSet& universe,
                                         std::size_t attr_count, std::size_t max_boundary) {
    const AttrSet nodes = sorted_unique(universe);
    std::vector<AttrSet> blanket(attr_count);
    for (auto x : nodes) blanket[x] = markov_boundary(oracle, x, without(nodes, {x}), max_boundary).members;

    auto smaller = [](const AttrSet& a, const AttrSet& b) { return a.size() <= b.size() ? a : b; };

    // Neighbours: no subset of the smaller boundary separates the pair.
    std::vector<std::set<AttrId>> neighbours(attr_count);
    std::set<std::pair<AttrId, AttrId>> examined;
    for (auto x : nodes) {
        for (auto y : blanket[x]) {
            const auto pair = std::pair{std::min(x, y), std::max(x, y)};
            if (!examined.insert(pair).second) continue;
            const auto pool = smaller(without(blanket[x], {y}), without(blanket[y], {x}));
            bool separated = false;
            for (const auto& s : subsets_by_size(pool)) {
                if (oracle.independent(x, y, s)) {
                    separated = true;
                    break;
                }
            }
            if (!separated) {
                neighbours[x].insert(y);
                neighbours[y].insert(x);
            }
        }
    }

    // Orient Y -> X when some Z adjacent to X but not to Y stays dependent on Y
    // given X plus every subset of the smaller remaining boundary.
    std::vector<AttrSet> parents(attr_count);
    for (auto x : nodes) {
        for (auto y : neighbours[x]) {
            bool into_x = false;
            for (auto z : neighbours[x]) {
                if (z == y || neighbours[y].count(z)) continue;
                const auto pool = smaller(without(blanket[y], {x, z}), without(blanket[z], {x, y}));
                bool always_dependent = true;
                for (const auto& s : subsets_by_size(pool)) {
                    AttrSet given = s;
                    given.push_back(x);
                    if (oracle.independent(y, z, given)) {
                        always_dependent = false;
                        break;
                    }
                }
                if (always_dependent) {
                    into_x = true;
                    break;
                }
            }
            if (into_x) parents[x].push_back(y);
        }
        parents[x] = sorted_unique(parents[x]);
    }
    return parents;
}

}  // namespace causalq
