#pragma once

#include "causalq/count_cache.hpp"
#include "causalq/discovery.hpp"
#include "causalq/indep.hpp"
#include "causalq/info.hpp"
#include "causalq/selection.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace causalq {

enum class EffectKind { total, direct };

/// SELECT T, X, avg(Y1..Ye) FROM D WHERE C GROUP BY T, X -- comparing T = t0 and T = t1.
struct CausalQuery {
    std::string treatment;
    std::string t0;
    std::string t1;
    std::vector<std::string> outcomes;
    std::vector<std::string> groupby;
    Context where;
    EffectKind effect = EffectKind::total;

    /// Throws UsageError when the query is malformed for `ds`.
    void validate(const Dataset& ds) const;
};

/// A CausalQuery bound to attribute ids and codes.
struct ResolvedQuery {
    AttrId treatment = 0;
    Code t0 = 0;
    Code t1 = 0;
    AttrSet outcomes;
    AttrSet groupby;

    static ResolvedQuery resolve(const Dataset& ds, const CausalQuery& q);
};

struct AnalysisConfig {
    TestConfig test;
    TestKind discovery_test = TestKind::hymit;
    TestKind bias_test = TestKind::hymit;
    double fd_epsilon = 0.01;
    bool drop_keylike = true;
    KeylikeOptions keylike;
    std::size_t max_boundary = 8;
    std::size_t top_k = 5;
    Estimator responsibility_estimator = Estimator::plugin;
    /// Skip discovery and use these covariates / mediators.
    std::optional<std::vector<std::string>> covariates;
    std::optional<std::map<std::string, std::vector<std::string>>> mediators;
};

struct BiasVerdict {
    TestResult test;
    double statistic = 0.0;
    bool determined = true;
    bool biased = false;
    std::string note;
};

struct Responsibility {
    AttrId attribute = 0;
    std::string name;
    double rho = 0.0;
};

struct FineExplanation {
    std::string t;
    std::string y;
    std::string z;
    double kappa_tz = 0.0;
    double kappa_yz = 0.0;
    std::size_t borda = 0;
};

enum class EstimateKind { naive, total, direct };

struct EffectEstimate {
    EstimateKind kind = EstimateKind::naive;
    bool defined = false;
    double avg_t0 = 0.0;
    double avg_t1 = 0.0;
    /// naive/total: avg_t1 - avg_t0. direct: avg_t0 - avg_t1 (effect of moving t1 -> t0).
    double delta = 0.0;
    TestResult significance;
    double matched_fraction = 0.0;
    std::size_t blocks = 0;
    std::size_t blocks_kept = 0;
    std::string note;
};

/// (T independent of V) on the context rows, V treated as one compound variable.
BiasVerdict detect_bias(const CountCache& context, const ResolvedQuery& q, const AttrSet& v,
                        const AnalysisConfig& cfg);

/// Share of I(T;V) attributable to each member of V, sorted descending (ties by name).
/// Empty when the normalizing sum is zero.
std::vector<Responsibility> responsibility(const CountCache& context, const ResolvedQuery& q, const AttrSet& v,
                                           Estimator est = Estimator::plugin);

/// Borda score of each item under two rankings given by descending scores:
/// for each ranking, the number of items with a strictly lower score.
std::vector<std::size_t> borda_scores(const std::vector<double>& first, const std::vector<double>& second);

/// Top-k (t, y, z) triples contributing to both I(T;Z) and I(Y;Z).
std::vector<FineExplanation> fine_explanations(const CountCache& context, const ResolvedQuery& q, AttrId z,
                                               AttrId outcome, std::size_t k);

EffectEstimate naive_estimate(const CountCache& context, const ResolvedQuery& q, AttrId outcome,
                              const AnalysisConfig& cfg);

/// Adjustment over exact-matched Z blocks.
EffectEstimate rewrite_total(const CountCache& context, const ResolvedQuery& q, const AttrSet& z, AttrId outcome,
                             const AnalysisConfig& cfg);

/// Mediator formula over exact-matched (Z, M) blocks.
EffectEstimate rewrite_direct(const CountCache& context, const ResolvedQuery& q, const AttrSet& z,
                              const AttrSet& m, AttrId outcome, const AnalysisConfig& cfg);

/// SQL text of the total-effect rewriting, for display.
std::string rewritten_sql(const CausalQuery& q, const std::vector<std::string>& covariates,
                          const std::string& table = "D");

struct OutcomeReport {
    std::string outcome;
    EffectEstimate naive;
    EffectEstimate total;
    std::optional<EffectEstimate> direct;
    std::optional<BiasVerdict> direct_bias;
    std::vector<Responsibility> direct_responsibility;
    std::map<std::string, std::vector<FineExplanation>> fine;  // keyed by covariate name
};

struct ContextReport {
    std::vector<std::pair<std::string, std::string>> key;  // group-by attribute = value
    std::size_t rows = 0;
    std::string status;  // "ok", "undetermined", "error"
    std::string message;
    BiasVerdict bias;
    std::vector<Responsibility> responsibility;
    std::string responsibility_note;
    std::vector<OutcomeReport> outcomes;
};

struct DiscoverySummary {
    std::vector<std::string> covariates;
    std::map<std::string, std::vector<std::string>> mediators;
    std::vector<std::string> dropped_fd;
    std::vector<std::string> dropped_keylike;
    std::vector<std::string> boundary;
    bool fallback_used = false;
    bool supplied = false;
    std::size_t tests = 0;
    std::vector<std::string> warnings;
};

struct BiasReport {
    CausalQuery query;
    AnalysisConfig config;
    std::size_t where_rows = 0;
    DiscoverySummary discovery;
    std::vector<ContextReport> contexts;
    std::string sql;

    bool any_undetermined() const;
    bool any_error() const;
};

/// Prune attributes, discover covariates (and mediators), then detect, explain
/// and rewrite per group-by context.
BiasReport analyze(const Dataset& ds, const CausalQuery& q, const AnalysisConfig& cfg);

std::string to_string(EffectKind k);
EffectKind parse_effect_kind(const std::string& s);
std::string to_string(EstimateKind k);

}  // namespace causalq
