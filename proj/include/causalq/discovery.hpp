#pragma once

#include "causalq/count_cache.hpp"
#include "causalq/indep.hpp"
#include "causalq/info.hpp"
#include "causalq/synth.hpp"

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace causalq {

/// Source of conditional-independence verdicts for the discovery algorithms.
class IndependenceOracle {
public:
    virtual ~IndependenceOracle() = default;

    virtual TestResult test(AttrId x, AttrId y, const AttrSet& z) = 0;
    /// Ordering heuristic; larger means more strongly associated.
    virtual double association(AttrId x, AttrId y) = 0;
    virtual double alpha() const = 0;
    /// Distinct tests performed so far.
    virtual std::size_t tests_run() const = 0;
    /// Hint that upcoming tests stay within `attrs`.
    virtual void prefetch(const AttrSet& /*attrs*/) {}

    bool independent(AttrId x, AttrId y, const AttrSet& z) { return !test(x, y, z).rejects(alpha()); }
};

/// Oracle backed by data; memoizes every test it runs.
class DataOracle : public IndependenceOracle {
public:
    DataOracle(CountCache& counts, TestKind kind, TestConfig cfg);

    TestResult test(AttrId x, AttrId y, const AttrSet& z) override;
    double association(AttrId x, AttrId y) override;
    double alpha() const override { return cfg_.alpha; }
    std::size_t tests_run() const override;
    void prefetch(const AttrSet& attrs) override;

    /// Materialization is skipped for sets whose joint domain exceeds this.
    void set_prefetch_limit(double cells) { prefetch_limit_ = cells; }

private:
    using Key = std::tuple<AttrId, AttrId, AttrSet>;
    CountCache& counts_;
    TestKind kind_;
    TestConfig cfg_;
    EntropyCache entropies_;
    mutable std::mutex mutex_;
    std::map<Key, TestResult> memo_;
    std::map<std::pair<AttrId, AttrId>, double> assoc_;
    double prefetch_limit_ = 4e6;
};

/// Oracle answering by d-separation in a known graph. Node ids equal attribute ids.
class DsepOracle : public IndependenceOracle {
public:
    explicit DsepOracle(const CausalDag& dag) : dag_(&dag) {}

    TestResult test(AttrId x, AttrId y, const AttrSet& z) override;
    double association(AttrId, AttrId) override { return 0.0; }
    double alpha() const override { return 0.5; }
    std::size_t tests_run() const override { return memo_.size(); }

private:
    const CausalDag* dag_;
    std::map<std::tuple<AttrId, AttrId, AttrSet>, bool> memo_;
};

struct TraceEntry {
    std::string step;  // "grow", "shrink", "phase1", "phase2"
    AttrId candidate = 0;
    AttrId other = 0;
    AttrSet given;
    double p_value = 1.0;
    bool independent = true;
};

struct MarkovBoundary {
    AttrId target = 0;
    AttrSet members;
    std::vector<TraceEntry> trace;
    bool truncated = false;
};

/// Grow-shrink. Candidates are visited by descending association with the target.
MarkovBoundary markov_boundary(IndependenceOracle& oracle, AttrId target, const AttrSet& candidates,
                               std::size_t max_size = 8);

/// Attributes X with H(target|X) <= epsilon and H(X|target) <= epsilon.
AttrSet drop_fd_attrs(const CountCache& counts, AttrId target, const AttrSet& candidates, double epsilon = 0.01,
                      EntropyCache* cache = nullptr);

struct KeylikeOptions {
    std::size_t samples = 10;
    std::vector<std::size_t> sizes;  // empty: n/8, n/4, n/2, n
    std::size_t permutations = 1000;
    double alpha = 0.01;
    std::uint64_t seed = 0;
};

/// Attributes whose entropy grows significantly with sample size (keys, IDs).
/// Needs at least three distinct sample sizes; otherwise nothing is dropped.
AttrSet drop_keylike_attrs(const Dataset& ds, const Selection& sel, const AttrSet& candidates,
                           const KeylikeOptions& options = {});

struct ParentSearch {
    AttrId target = 0;
    AttrSet parents;
    AttrSet phase1;  // candidates collected before the neighbour filter
    MarkovBoundary boundary;
    bool fallback_used = false;
    std::vector<TraceEntry> trace;
    std::vector<std::string> warnings;
};

/// Parent discovery restricted to a fixed universe of attributes. Markov
/// boundaries are computed once per attribute and shared between targets.
class ParentDiscovery {
public:
    ParentDiscovery(IndependenceOracle& oracle, AttrSet universe, std::size_t max_boundary = 8);

    const MarkovBoundary& boundary(AttrId target);

    /// Two-phase covariate detection. Attributes in `exclude` never appear in the
    /// result; when no parent pair is found the result falls back to the boundary.
    ParentSearch parents(AttrId target, const AttrSet& exclude = {});

    IndependenceOracle& oracle() { return oracle_; }
    const AttrSet& universe() const { return universe_; }

private:
    std::vector<AttrId> by_association(AttrId anchor, AttrSet attrs);

    IndependenceOracle& oracle_;
    AttrSet universe_;
    std::size_t max_boundary_;
    std::map<AttrId, MarkovBoundary> boundaries_;
};

/// Covariates of `treatment`: its discovered parents minus the outcomes.
ParentSearch cd_covariates(ParentDiscovery& discovery, AttrId treatment, const AttrSet& outcomes);

/// Mediators of `outcome`: its discovered parents minus the treatment.
ParentSearch mediators(ParentDiscovery& discovery, AttrId treatment, AttrId outcome);

/// Baseline: full grow-shrink structure learning (every boundary, neighbour
/// search over boundary subsets, collider orientation). Parents per attribute id.
std::vector<AttrSet> grow_shrink_parents(IndependenceOracle& oracle, const AttrSet& universe,
                                         std::size_t attr_count, std::size_t max_boundary = 8);

/// Every subset of `items` in ascending size, lexicographic within a size.
std::vector<AttrSet> subsets_by_size(const AttrSet& items);

}  // namespace causalq
