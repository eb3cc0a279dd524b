#pragma once

#include "causalq/indep.hpp"
#include "causalq/synth.hpp"

#include <cstdint>
#include <vector>

namespace causalq {

/// Parent recovery on random DAGs: CD covariate discovery vs grow-shrink structure learning.
struct RecoveryConfig {
    DagOptions dag;
    std::size_t rows = 50000;
    std::size_t seeds = 10;
    std::uint64_t seed = 0;
    TestKind test = TestKind::hymit;
    TestConfig test_config;
    std::size_t max_boundary = 8;
    RecoveryFilter filter = RecoveryFilter::nonadjacent_parents;
};

struct RecoveryRun {
    std::uint64_t seed = 0;
    std::size_t edges = 0;
    std::size_t scored_nodes = 0;
    double cd_f1 = 0.0;
    double gs_f1 = 0.0;
    double cd_tests_per_node = 0.0;
    double gs_tests_per_node = 0.0;
};

struct RecoverySummary {
    std::vector<RecoveryRun> runs;
    std::size_t scored_nodes = 0;
    double cd_f1 = 0.0;  // mean over scored nodes of all runs
    double gs_f1 = 0.0;
    double cd_tests_per_node = 0.0;  // mean over runs
    double gs_tests_per_node = 0.0;
};

/// Defaults used by the bench command and the acceptance suite: binary nodes,
/// expected degree 3 (in + out) per node.
DagOptions recovery_dag_preset(std::size_t nodes = 8);

RecoveryRun recovery_run(const RecoveryConfig& cfg, std::uint64_t seed);
RecoverySummary recovery_experiment(const RecoveryConfig& cfg);

/// MIT vs row-shuffling permutation test on X, Y given a Z with `groups` levels.
struct TimingConfig {
    std::size_t rows = 50000;
    std::size_t groups = 4;
    std::size_t permutations = 1000;
    std::uint64_t seed = 0;
    bool run_shuffle = true;
};

struct TimingResult {
    double mit_seconds = 0.0;
    double shuffle_seconds = 0.0;
    TestResult mit;
    TestResult shuffle;
};

/// Binary X and Y, Z uniform over `groups` levels, X and Y both depending on Z.
Dataset timing_dataset(std::size_t rows, std::size_t groups, std::uint64_t seed);
TimingResult timing_experiment(const TimingConfig& cfg);

}  // namespace causalq
