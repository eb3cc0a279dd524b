#include "causalq/experiments.hpp"

#include "causalq/discovery.hpp"

#include <chrono>
#include <numeric>

namespace causalq {

DagOptions recovery_dag_preset(std::size_t nodes) {
    DagOptions o;
    o.nodes = nodes;
    o.edge_probability = edge_probability_for_degree(nodes, 3.0);
    o.min_categories = 2;
    o.max_categories = 2;
    o.concentration = 1.0;
    return o;
}

RecoveryRun recovery_run(const RecoveryConfig& cfg, std::uint64_t seed) {
    RecoveryRun run;
    run.seed = seed;
    Rng rng(seed);
    const CausalDag dag = random_dag(cfg.dag, rng);
    const Dataset ds = sample_dataset(dag, cfg.rows, rng);
    run.edges = dag.edge_count();

    AttrSet universe(dag.size());
    std::iota(universe.begin(), universe.end(), AttrId{0});
    CountCache counts(ds, Selection::all(ds));
    TestConfig tc = cfg.test_config;
    tc.seed = derive_seed(seed, 0x7465737473ULL);

    DataOracle cd_oracle(counts, cfg.test, tc);
    ParentDiscovery pd(cd_oracle, universe, cfg.max_boundary);
    std::vector<AttrSet> cd(dag.size());
    for (AttrId v : universe) cd[v] = pd.parents(v).parents;

    DataOracle gs_oracle(counts, cfg.test, tc);
    const auto gs = grow_shrink_parents(gs_oracle, universe, dag.size(), cfg.max_boundary);

    const auto cd_score = score_recovery(dag, cd, cfg.filter);
    const auto gs_score = score_recovery(dag, gs, cfg.filter);
    run.scored_nodes = cd_score.nodes.size();
    run.cd_f1 = cd_score.mean_f1;
    run.gs_f1 = gs_score.mean_f1;
    const double n = static_cast<double>(dag.size());
    run.cd_tests_per_node = static_cast<double>(cd_oracle.tests_run()) / n;
    run.gs_tests_per_node = static_cast<double>(gs_oracle.tests_run()) / n;
    return run;
}

RecoverySummary recovery_experiment(const RecoveryConfig& cfg) {
    RecoverySummary s;
    double cd_sum = 0.0, gs_sum = 0.0;
    for (std::size_t i = 0; i < cfg.seeds; ++i) {
        auto run = recovery_run(cfg, derive_seed(cfg.seed, i));
        s.scored_nodes += run.scored_nodes;
        cd_sum += run.cd_f1 * static_cast<double>(run.scored_nodes);
        gs_sum += run.gs_f1 * static_cast<double>(run.scored_nodes);
        s.cd_tests_per_node += run.cd_tests_per_node;
        s.gs_tests_per_node += run.gs_tests_per_node;
        s.runs.push_back(run);
    }
    if (s.scored_nodes > 0) {
        s.cd_f1 = cd_sum / static_cast<double>(s.scored_nodes);
        s.gs_f1 = gs_sum / static_cast<double>(s.scored_nodes);
    }
    if (!s.runs.empty()) {
        s.cd_tests_per_node /= static_cast<double>(s.runs.size());
        s.gs_tests_per_node /= static_cast<double>(s.runs.size());
    }
    return s;
}

Dataset timing_dataset(std::size_t rows, std::size_t groups, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::string>> cells(rows, std::vector<std::string>(3));
    for (auto& row : cells) {
        const auto z = uniform_below(rng, groups);
        const double p = (static_cast<double>(z) + 1.0) / (static_cast<double>(groups) + 1.0);
        row[0] = uniform01(rng) < p ? "1" : "0";
        row[1] = uniform01(rng) < p ? "1" : "0";
        row[2] = std::to_string(z);
    }
    return Dataset::from_rows({"X", "Y", "Z"}, cells);
}

TimingResult timing_experiment(const TimingConfig& cfg) {
    const Dataset ds = timing_dataset(cfg.rows, cfg.groups, cfg.seed);
    TestConfig tc;
    tc.permutations = cfg.permutations;
    tc.seed = cfg.seed;
    TimingResult out;
    using clock = std::chrono::steady_clock;
    {
        CountCache counts(ds, Selection::all(ds));
        const auto start = clock::now();
        out.mit = mit_test(counts, {0}, {1}, {2}, tc);
        out.mit_seconds = std::chrono::duration<double>(clock::now() - start).count();
    }
    if (cfg.run_shuffle) {
        CountCache counts(ds, Selection::all(ds));
        const auto start = clock::now();
        out.shuffle = shuffle_test(counts, {0}, {1}, {2}, tc);
        out.shuffle_seconds = std::chrono::duration<double>(clock::now() - start).count();
    }
    return out;
}

}  // namespace causalq
