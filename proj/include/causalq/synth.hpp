#pragma once

#include "causalq/dataset.hpp"
#include "causalq/rng.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace causalq {

/// Discrete causal DAG with conditional probability tables.
///
/// The CPT of node v is a row-major array of shape (parent configs, card(v)).
/// Parent configurations are enumerated in mixed radix over parents(v) in
/// stored order, the first parent being the most significant digit.
class CausalDag {
public:
    std::size_t add_node(std::string name, std::size_t categories, AttrSet parents, std::vector<double> cpt);

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t v) const { return names_.at(v); }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t categories(std::size_t v) const { return cards_.at(v); }
    const AttrSet& parents(std::size_t v) const { return parents_.at(v); }
    AttrSet children(std::size_t v) const;
    const std::vector<double>& cpt(std::size_t v) const { return cpts_.at(v); }
    std::size_t parent_configs(std::size_t v) const;
    std::size_t edge_count() const;
    bool has_edge(std::size_t from, std::size_t to) const;
    bool adjacent(std::size_t a, std::size_t b) const { return has_edge(a, b) || has_edge(b, a); }
    std::vector<std::size_t> topological_order() const;

    /// Throws UsageError on cycles, bad CPT shapes or rows not summing to 1.
    void validate() const;

    nlohmann::json to_json() const;
    static CausalDag from_json(const nlohmann::json& j);

private:
    std::vector<std::string> names_;
    std::vector<std::size_t> cards_;
    std::vector<AttrSet> parents_;
    std::vector<std::vector<double>> cpts_;
};

struct DagOptions {
    std::size_t nodes = 8;
    double edge_probability = 0.2;
    std::size_t min_categories = 2;
    std::size_t max_categories = 2;
    double concentration = 1.0;  // symmetric Dirichlet for CPT rows
};

/// Binary nodes with sparse CPT rows (concentration 0.25): edges are stronger
/// and dependencies easier to detect at moderate n.
DagOptions strong_edge_preset(std::size_t nodes, double degree);

/// Edge probability whose expected total edge count is `edges`.
double edge_probability_for_total_edges(std::size_t nodes, double edges);
/// Edge probability whose expected degree (in + out) per node is `degree`.
double edge_probability_for_degree(std::size_t nodes, double degree);

/// Erdos-Renyi skeleton oriented along a random topological order, random
/// cardinalities in [min_categories, max_categories], Dirichlet CPT rows.
CausalDag random_dag(const DagOptions& options, Rng& rng);

/// Ancestral sampling. Column v of the result is node v, dictionary "0".."k-1".
Dataset sample_dataset(const CausalDag& dag, std::size_t rows, Rng& rng);

/// Exact d-separation of x and y given z (Bayes-ball reachability).
bool dsep(const CausalDag& dag, std::size_t x, std::size_t y, const AttrSet& z);

enum class RecoveryFilter { all_nodes, two_parents, nonadjacent_parents };

struct NodeScore {
    std::size_t node = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct RecoveryScore {
    std::vector<NodeScore> nodes;  // only nodes passing the filter
    double mean_f1 = 0.0;          // 0 when no node passes
};

/// True when v has at least two parents that are not adjacent to each other.
bool has_nonadjacent_parents(const CausalDag& dag, std::size_t v);

/// Set precision / recall / F1 of discovered parent sets (indexed by node).
RecoveryScore score_recovery(const CausalDag& dag, const std::vector<AttrSet>& discovered, RecoveryFilter filter);

/// Draws a Dirichlet(alpha, ..., alpha) vector of length k.
std::vector<double> sample_dirichlet(std::size_t k, double alpha, Rng& rng);

}  // namespace causalq
