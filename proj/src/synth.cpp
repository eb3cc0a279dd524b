#include "causalq/synth.hpp"

#include "causalq/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>

namespace causalq {

namespace {

double standard_normal(Rng& rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang. Portable, unlike std::gamma_distribution.
double sample_gamma(double shape, Rng& rng) {
    if (shape < 1.0) {
        const double u = 1.0 - uniform01(rng);
        return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = standard_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

std::vector<double> sample_dirichlet(std::size_t k, double alpha, Rng& rng) {
    std::vector<double> out(k);
    double sum = 0.0;
    for (auto& v : out) {
        v = sample_gamma(alpha, rng);
        sum += v;
    }
    if (sum <= 0.0) {
        // Every component underflowed (tiny alpha); fall back to a point mass.
        std::fill(out.begin(), out.end(), 0.0);
        out[uniform_below(rng, k)] = 1.0;
        return out;
    }
    for (auto& v : out) v /= sum;
    return out;
}

std::size_t CausalDag::add_node(std::string name, std::size_t categories, AttrSet parents, std::vector<double> cpt) {
    if (categories < 1) throw UsageError("node '" + name + "' needs at least one category");
    for (auto p : parents) {
        if (p >= names_.size()) throw UsageError("node '" + name + "': parent must be added first");
    }
    names_.push_back(std::move(name));
    cards_.push_back(categories);
    parents_.push_back(std::move(parents));
    cpts_.push_back(std::move(cpt));
    const std::size_t v = names_.size() - 1;
    if (cpts_[v].size() != parent_configs(v) * categories) {
        throw UsageError("node '" + names_[v] + "': CPT has wrong size");
    }
    return v;
}

AttrSet CausalDag::children(std::size_t v) const {
    AttrSet out;
    for (std::size_t c = 0; c < size(); ++c) {
        if (std::find(parents_[c].begin(), parents_[c].end(), v) != parents_[c].end()) out.push_back(c);
    }
    return out;
}

std::size_t CausalDag::parent_configs(std::size_t v) const {
    std::size_t configs = 1;
    for (auto p : parents_.at(v)) configs *= cards_[p];
    return configs;
}

std::size_t CausalDag::edge_count() const {
    std::size_t e = 0;
    for (const auto& ps : parents_) e += ps.size();
    return e;
}

bool CausalDag::has_edge(std::size_t from, std::size_t to) const {
    const auto& ps = parents_.at(to);
    return std::find(ps.begin(), ps.end(), from) != ps.end();
}

std::vector<std::size_t> CausalDag::topological_order() const {
    std::vector<std::size_t> indegree(size(), 0);
    for (std::size_t v = 0; v < size(); ++v) indegree[v] = parents_[v].size();
    std::deque<std::size_t> ready;
    for (std::size_t v = 0; v < size(); ++v) {
        if (indegree[v] == 0) ready.push_back(v);
    }
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const auto v = ready.front();
        ready.pop_front();
        order.push_back(v);
        for (auto c : children(v)) {
            if (--indegree[c] == 0) ready.push_back(c);
        }
    }
    if (order.size() != size()) throw UsageError("causal graph contains a cycle");
    return order;
}

void CausalDag::validate() const {
    topological_order();
    for (std::size_t v = 0; v < size(); ++v) {
        const auto k = cards_[v];
        if (cpts_[v].size() != parent_configs(v) * k) throw UsageError("CPT of '" + names_[v] + "' has wrong size");
        for (std::size_t row = 0; row < parent_configs(v); ++row) {
            double sum = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const double p = cpts_[v][row * k + j];
                if (p < 0.0) throw UsageError("CPT of '" + names_[v] + "' has a negative entry");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw UsageError("CPT row of '" + names_[v] + "' does not sum to 1");
        }
    }
}

nlohmann::json CausalDag::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t v = 0; v < size(); ++v) {
        nlohmann::json parents = nlohmann::json::array();
        for (auto p : parents_[v]) {
            parents.push_back(names_[p]);
            edges.push_back({names_[p], names_[v]});
        }
        nlohmann::json rows = nlohmann::json::array();
        const auto k = cards_[v];
        for (std::size_t r = 0; r < parent_configs(v); ++r) {
            rows.push_back(std::vector<double>(cpts_[v].begin() + static_cast<std::ptrdiff_t>(r * k),
                                               cpts_[v].begin() + static_cast<std::ptrdiff_t>((r + 1) * k)));
        }
        nodes.push_back({{"name", names_[v]}, {"categories", k}, {"parents", parents}, {"cpt", rows}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

CausalDag CausalDag::from_json(const nlohmann::json& j) {
    CausalDag dag;
    std::vector<std::string> seen;
    for (const auto& node : j.at("nodes")) {
        AttrSet parents;
        for (const auto& p : node.at("parents")) {
            auto it = std::find(seen.begin(), seen.end(), p.get<std::string>());
            if (it == seen.end()) throw UsageError("dag json: parent listed after child");
            parents.push_back(static_cast<std::size_t>(it - seen.begin()));
        }
        std::vector<double> cpt;
        for (const auto& row : node.at("cpt")) {
            for (const auto& v : row) cpt.push_back(v.get<double>());
        }
        seen.push_back(node.at("name").get<std::string>());
        dag.add_node(seen.back(), node.at("categories").get<std::size_t>(), parents, cpt);
    }
    dag.validate();
    return dag;
}

double edge_probability_for_total_edges(std::size_t nodes, double edges) {
    if (nodes < 2) return 0.0;
    const double pairs = static_cast<double>(nodes) * static_cast<double>(nodes - 1) / 2.0;
    return std::clamp(edges / pairs, 0.0, 1.0);
}

double edge_probability_for_degree(std::size_t nodes, double degree) {
    if (nodes < 2) return 0.0;
    return std::clamp(degree / static_cast<double>(nodes - 1), 0.0, 1.0);
}

DagOptions strong_edge_preset(std::size_t nodes, double degree) {
    DagOptions o;
    o.nodes = nodes;
    o.edge_probability = edge_probability_for_degree(nodes, degree);
    o.concentration = 0.25;
    return o;
}

CausalDag random_dag(const DagOptions& options, Rng& rng) {
    if (options.nodes < 1) throw UsageError("random_dag: need at least one node");
    if (options.min_categories < 1 || options.max_categories < options.min_categories) {
        throw UsageError("random_dag: bad category range");
    }
    const std::size_t n = options.nodes;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order.begin(), order.end(), rng);

    // Node ids are assigned in topological order so parents always precede children.
    std::vector<AttrSet> parents(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            if (uniform01(rng) < options.edge_probability) parents[j].push_back(i);
        }
    }
    // Names follow a random permutation so position does not leak the order.
    std::vector<std::string> names(n);
    for (std::size_t j = 0; j < n; ++j) names[j] = "V" + std::to_string(order[j]);

    CausalDag dag;
    const std::size_t span = options.max_categories - options.min_categories + 1;
    std::vector<std::size_t> cards(n);
    for (auto& k : cards) k = options.min_categories + uniform_below(rng, span);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t configs = 1;
        for (auto p : parents[j]) configs *= cards[p];
        std::vector<double> cpt;
        cpt.reserve(configs * cards[j]);
        for (std::size_t r = 0; r < configs; ++r) {
            auto row = sample_dirichlet(cards[j], options.concentration, rng);
            cpt.insert(cpt.end(), row.begin(), row.end());
        }
        dag.add_node(names[j], cards[j], parents[j], std::move(cpt));
    }
    return dag;
}

Dataset sample_dataset(const CausalDag& dag, std::size_t rows, Rng& rng) {
    if (rows < 1) throw UsageError("sample_dataset: need at least one row");
    const auto order = dag.topological_order();
    std::vector<std::vector<Code>> codes(dag.size(), std::vector<Code>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        for (auto v : order) {
            std::size_t config = 0;
            for (auto p : dag.parents(v)) config = config * dag.categories(p) + codes[p][r];
            const auto k = dag.categories(v);
            const double* probs = dag.cpt(v).data() + config * k;
            const double u = uniform01(rng);
            double cum = 0.0;
            Code value = static_cast<Code>(k - 1);
            for (std::size_t j = 0; j < k; ++j) {
                cum += probs[j];
                if (u < cum) {
                    value = static_cast<Code>(j);
                    break;
                }
            }
            codes[v][r] = value;
        }
    }
    std::vector<Column> columns;
    for (std::size_t v = 0; v < dag.size(); ++v) {
        std::vector<std::string> dict;
        for (std::size_t j = 0; j < dag.categories(v); ++j) dict.push_back(std::to_string(j));
        columns.emplace_back(dag.name(v), std::move(dict), std::move(codes[v]));
    }
    return Dataset(std::move(columns));
}

bool dsep(const CausalDag& dag, std::size_t x, std::size_t y, const AttrSet& z) {
    const std::size_t n = dag.size();
    if (x >= n || y >= n) throw UsageError("dsep: unknown node");
    if (x == y) throw UsageError("dsep: x and y must differ");
    std::vector<bool> in_z(n, false);
    for (auto v : z) {
        if (v >= n) throw UsageError("dsep: unknown node");
        if (v == x || v == y) throw UsageError("dsep: conditioning set overlaps x or y");
        in_z[v] = true;
    }
    // Ancestors of z (inclusive): colliders there are open.
    std::vector<bool> anc(n, false);
    std::vector<std::size_t> stack(z.begin(), z.end());
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        if (anc[v]) continue;
        anc[v] = true;
        for (auto p : dag.parents(v)) stack.push_back(p);
    }
    std::vector<AttrSet> children(n);
    for (std::size_t v = 0; v < n; ++v) children[v] = dag.children(v);

    // (node, arrived_from_child): true means travelling "up" against an edge.
    std::vector<std::array<bool, 2>> visited(n, {false, false});
    std::vector<std::pair<std::size_t, bool>> frontier{{x, true}};
    while (!frontier.empty()) {
        auto [v, up] = frontier.back();
        frontier.pop_back();
        if (visited[v][up]) continue;
        visited[v][up] = true;
        if (v == y && !in_z[v]) return false;
        if (up && !in_z[v]) {
            for (auto p : dag.parents(v)) frontier.emplace_back(p, true);
            for (auto c : children[v]) frontier.emplace_back(c, false);
        } else if (!up) {
            if (!in_z[v]) {
                for (auto c : children[v]) frontier.emplace_back(c, false);
            }
            if (anc[v]) {
                for (auto p : dag.parents(v)) frontier.emplace_back(p, true);
            }
        }
    }
    return true;
}

bool has_nonadjacent_parents(const CausalDag& dag, std::size_t v) {
    const auto& ps = dag.parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (std::size_t j = i + 1; j < ps.size(); ++j) {
            if (!dag.adjacent(ps[i], ps[j])) return true;
        }
    }
    return false;
}

RecoveryScore score_recovery(const CausalDag& dag, const std::vector<AttrSet>& discovered, RecoveryFilter filter) {
    if (discovered.size() != dag.size()) throw UsageError("score_recovery: one parent set per node expected");
    RecoveryScore out;
    double sum = 0.0;
    for (std::size_t v = 0; v < dag.size(); ++v) {
        if (filter == RecoveryFilter::two_parents && dag.parents(v).size() < 2) continue;
        if (filter == RecoveryFilter::nonadjacent_parents && !has_nonadjacent_parents(dag, v)) continue;
        AttrSet truth = dag.parents(v);
        AttrSet found = discovered[v];
        for (auto f : found) {
            if (f >= dag.size()) throw UsageError("score_recovery: unknown node in discovered set");
        }
        std::sort(truth.begin(), truth.end());
        std::sort(found.begin(), found.end());
        found.erase(std::unique(found.begin(), found.end()), found.end());
        AttrSet common;
        std::set_intersection(truth.begin(), truth.end(), found.begin(), found.end(), std::back_inserter(common));
        NodeScore s{v, 0.0, 0.0, 0.0};
        if (truth.empty() && found.empty()) {
            s.precision = s.recall = s.f1 = 1.0;
        } else {
            s.precision = found.empty() ? 0.0 : static_cast<double>(common.size()) / static_cast<double>(found.size());
            s.recall = truth.empty() ? 1.0 : static_cast<double>(common.size()) / static_cast<double>(truth.size());
            s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
        }
        sum += s.f1;
        out.nodes.push_back(s);
    }
    out.mean_f1 = out.nodes.empty() ? 0.0 : sum / static_cast<double>(out.nodes.size());
    return out;
}

}  // namespace causalq
