// causalq: bias detection and resolution for group-by queries over CSV data.

#include "causalq/bias.hpp"
#include "causalq/discovery.hpp"
#include "causalq/error.hpp"
#include "causalq/experiments.hpp"
#include "causalq/report.hpp"
#include "causalq/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace causalq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUndetermined = 2;
constexpr int kExitUsage = 64;

struct Common {
    std::string data;
    char delimiter = ',';
    std::string where;
    double alpha = 0.01;
    std::size_t permutations = 1000;
    double beta = 5.0;
    bool group_sampling = false;
    double group_c = 3.0;
    std::uint64_t seed = 0;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out;
};

void add_data_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--data", c.data, "input CSV file with a header row")->required()->check(CLI::ExistingFile);
    cmd->add_option("--delimiter", c.delimiter, "CSV field delimiter");
    cmd->add_option("--where", c.where, "row filter, e.g. \"A IN x|y, B=z\"");
}

void add_test_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--alpha", c.alpha, "significance level")->capture_default_str();
    cmd->add_option("--permutations", c.permutations, "Monte-Carlo permutations")->capture_default_str();
    cmd->add_option("--beta", c.beta, "chi2 is used when df <= n / beta")->capture_default_str();
    cmd->add_flag("--group-sampling", c.group_sampling, "sample conditioning groups in permutation tests");
    cmd->add_option("--group-sampling-c", c.group_c, "groups sampled = ceil(c ln |groups|)")->capture_default_str();
    cmd->add_option("--threads", c.threads, "worker threads (results do not depend on this)");
}

void add_seed_flag(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "random seed")->required();
}

TestConfig test_config(const Common& c) {
    TestConfig t;
    t.alpha = c.alpha;
    t.permutations = c.permutations;
    t.beta = c.beta;
    t.group_sample.enabled = c.group_sampling;
    t.group_sample.c = c.group_c;
    t.seed = c.seed;
    t.threads = std::max<std::size_t>(1, c.threads);
    t.validate();
    return t;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Writes to --out when given, else stdout.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

Dataset load(const Common& c) {
    CsvOptions o;
    o.delimiter = c.delimiter;
    return load_csv(c.data, o);
}

Selection where_selection(const Dataset& ds, const Common& c) {
    return select(ds, parse_context(c.where));
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    Common c;
    std::string treatment, t0, t1, effect = "total";
    std::vector<std::string> outcomes, groupby, covariates, mediators;
    std::size_t top_k = 5;
    bool keep_keylike = false;
    bool covariates_given = false;
};

int run_analyze(AnalyzeArgs& a) {
    const Dataset ds = load(a.c);
    CausalQuery q;
    q.treatment = a.treatment;
    q.t0 = a.t0;
    q.t1 = a.t1;
    for (const auto& o : a.outcomes)
        for (const auto& s : split_list(o)) q.outcomes.push_back(s);
    for (const auto& g : a.groupby)
        for (const auto& s : split_list(g)) q.groupby.push_back(s);
    q.where = parse_context(a.c.where);
    q.effect = parse_effect_kind(a.effect);

    AnalysisConfig cfg;
    cfg.test = test_config(a.c);
    cfg.top_k = a.top_k;
    if (cfg.top_k == 0) throw UsageError("--top-k must be at least 1");
    cfg.drop_keylike = !a.keep_keylike;
    cfg.keylike.permutations = a.c.permutations;
    if (a.covariates_given) {
        std::vector<std::string> cov;
        for (const auto& s : a.covariates)
            for (const auto& x : split_list(s)) cov.push_back(x);
        cfg.covariates = cov;
        std::map<std::string, std::vector<std::string>> med;
        for (const auto& spec : a.mediators) {
            const auto colon = spec.find(':');
            if (colon == std::string::npos) throw UsageError("--mediators expects OUTCOME:M1,M2");
            med[spec.substr(0, colon)] = split_list(spec.substr(colon + 1));
        }
        cfg.mediators = med;
    } else if (!a.mediators.empty()) {
        throw UsageError("--mediators requires --covariates");
    }

    const BiasReport report = analyze(ds, q, cfg);
    emit(a.c.out, to_json(report).dump(2) + "\n");
    write_summary(std::cerr, report);
    if (report.any_error()) return kExitError;
    if (report.any_undetermined()) return kExitUndetermined;
    return kExitOk;
}

// --- discover --------------------------------------------------------------

struct DiscoverArgs {
    Common c;
    std::string target;
    std::vector<std::string> exclude;
    std::string test = "hymit";
    std::size_t max_boundary = 8;
};

int run_discover(DiscoverArgs& a) {
    const Dataset ds = load(a.c);
    const Selection sel = where_selection(ds, a.c);
    if (sel.empty()) throw InputError("the where clause selects no rows");
    const AttrId target = ds.attr(a.target);
    AttrSet exclude;
    for (const auto& e : a.exclude)
        for (const auto& s : split_list(e)) exclude.push_back(ds.attr(s));
    CountCache counts(ds, sel);
    AttrSet universe;
    for (AttrId x = 0; x < ds.column_count(); ++x)
        if (counts.table({x})->cell_count() > 1 || x == target) universe.push_back(x);
    DataOracle oracle(counts, parse_test_kind(a.test), test_config(a.c));
    ParentDiscovery pd(oracle, universe, a.max_boundary);
    const ParentSearch s = pd.parents(target, exclude);
    auto j = to_json(ds, s);
    j["tests"] = oracle.tests_run();
    emit(a.c.out, j.dump(2) + "\n");
    std::cerr << "parents of " << a.target << ":";
    for (const auto& p : ds.names(s.parents)) std::cerr << " " << p;
    std::cerr << (s.parents.empty() ? " (none)" : "") << (s.fallback_used ? "  [boundary fallback]" : "")
              << "  tests=" << oracle.tests_run() << "\n";
    return kExitOk;
}

// --- indep -----------------------------------------------------------------

struct IndepArgs {
    Common c;
    std::string x, y, z;
    std::string method = "hymit";
};

int run_indep(IndepArgs& a) {
    const Dataset ds = load(a.c);
    const Selection sel = where_selection(ds, a.c);
    if (sel.empty()) throw InputError("the where clause selects no rows");
    CountCache counts(ds, sel);
    const AttrSet x = ds.attrs(split_list(a.x));
    const AttrSet y = ds.attrs(split_list(a.y));
    const AttrSet z = ds.attrs(split_list(a.z));
    const TestConfig cfg = test_config(a.c);
    const TestResult r = run_test(parse_test_kind(a.method), counts, x, y, z, cfg);
    nlohmann::ordered_json j;
    j["x"] = ds.names(x);
    j["y"] = ds.names(y);
    j["z"] = ds.names(z);
    j["rows"] = sel.size();
    j["alpha"] = cfg.alpha;
    j["independent"] = !r.rejects(cfg.alpha);
    j["result"] = to_json(r);
    emit(a.c.out, j.dump(2) + "\n");
    std::cerr << to_string(r.method) << ": I=" << r.statistic << " p=" << r.p_value << " -> "
              << (r.rejects(cfg.alpha) ? "dependent" : "independent") << " at alpha=" << cfg.alpha << "\n";
    return kExitOk;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
    Common c;
    DagOptions dag;
    double degree = -1.0;
    double edges = -1.0;
    std::size_t rows = 10000;
    std::string dag_out;
};

int run_synth(SynthArgs& a) {
    if (a.dag.nodes < 1) throw UsageError("--nodes must be at least 1");
    if (a.rows < 1) throw UsageError("--rows must be at least 1");
    if (a.degree >= 0 && a.edges >= 0) throw UsageError("--degree and --edges are exclusive");
    if (a.degree >= 0) a.dag.edge_probability = edge_probability_for_degree(a.dag.nodes, a.degree);
    if (a.edges >= 0) a.dag.edge_probability = edge_probability_for_total_edges(a.dag.nodes, a.edges);
    if (a.dag.edge_probability < 0 || a.dag.edge_probability > 1)
        throw UsageError("--edge-probability must lie in [0, 1]");
    Rng rng(a.c.seed);
    const CausalDag dag = random_dag(a.dag, rng);
    const Dataset ds = sample_dataset(dag, a.rows, rng);
    std::ostringstream csv;
    CsvOptions o;
    o.delimiter = a.c.delimiter;
    ds.write_csv(csv, o);
    emit(a.c.out, csv.str());
    if (!a.dag_out.empty()) emit(a.dag_out, dag.to_json().dump(2) + "\n");
    std::cerr << "nodes=" << dag.size() << " edges=" << dag.edge_count() << " rows=" << a.rows << "\n";
    return kExitOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
    Common c;
    std::string kind = "all";
    std::size_t nodes = 8;
    std::size_t rows = 50000;
    std::size_t seeds = 10;
    double degree = 3.0;
    std::size_t timing_rows = 50000;
    std::size_t groups = 4;
    bool timing_shuffle = true;
    std::string filter = "nonadjacent";
};

std::string csv_row(const std::string& experiment, const std::string& nodes, std::size_t rows,
                    const std::string& groups, std::size_t permutations, std::uint64_t seed,
                    const std::string& metric, double value) {
    std::ostringstream s;
    s.precision(10);
    s << experiment << "," << nodes << "," << rows << "," << groups << "," << permutations << "," << seed << ","
      << metric << "," << value << "\n";
    return s.str();
}

int run_bench(BenchArgs& a) {
    if (a.kind != "all" && a.kind != "recovery" && a.kind != "timing")
        throw UsageError("--kind must be recovery, timing or all");
    std::string out = "experiment,nodes,rows,groups,permutations,seed,metric,value\n";
    const TestConfig tc = test_config(a.c);
    if (a.kind != "timing") {
        RecoveryConfig rc;
        rc.dag = recovery_dag_preset(a.nodes);
        rc.dag.edge_probability = edge_probability_for_degree(a.nodes, a.degree);
        rc.rows = a.rows;
        rc.seeds = a.seeds;
        rc.seed = a.c.seed;
        rc.test_config = tc;
        if (a.filter == "all")
            rc.filter = RecoveryFilter::all_nodes;
        else if (a.filter == "two-parents")
            rc.filter = RecoveryFilter::two_parents;
        else
            rc.filter = RecoveryFilter::nonadjacent_parents;
        const auto s = recovery_experiment(rc);
        const std::string n = std::to_string(a.nodes);
        for (const auto& r : s.runs) {
            out += csv_row("recovery", n, a.rows, "", tc.permutations, r.seed, "cd_f1", r.cd_f1);
            out += csv_row("recovery", n, a.rows, "", tc.permutations, r.seed, "gs_f1", r.gs_f1);
            out += csv_row("recovery", n, a.rows, "", tc.permutations, r.seed, "scored_nodes",
                           static_cast<double>(r.scored_nodes));
            out += csv_row("recovery", n, a.rows, "", tc.permutations, r.seed, "cd_tests_per_node",
                           r.cd_tests_per_node);
            out += csv_row("recovery", n, a.rows, "", tc.permutations, r.seed, "gs_tests_per_node",
                           r.gs_tests_per_node);
        }
        out += csv_row("recovery", n, a.rows, "", tc.permutations, a.c.seed, "mean_cd_f1", s.cd_f1);
        out += csv_row("recovery", n, a.rows, "", tc.permutations, a.c.seed, "mean_gs_f1", s.gs_f1);
        out += csv_row("recovery", n, a.rows, "", tc.permutations, a.c.seed, "mean_cd_tests_per_node",
                       s.cd_tests_per_node);
        out += csv_row("recovery", n, a.rows, "", tc.permutations, a.c.seed, "mean_gs_tests_per_node",
                       s.gs_tests_per_node);
    }
    if (a.kind != "recovery") {
        TimingConfig t;
        t.rows = a.timing_rows;
        t.groups = a.groups;
        t.permutations = tc.permutations;
        t.seed = a.c.seed;
        t.run_shuffle = a.timing_shuffle;
        const auto r = timing_experiment(t);
        const std::string g = std::to_string(a.groups);
        out += csv_row("timing", "", t.rows, g, t.permutations, t.seed, "mit_seconds", r.mit_seconds);
        out += csv_row("timing", "", t.rows, g, t.permutations, t.seed, "mit_p_value", r.mit.p_value);
        if (t.run_shuffle) {
            out += csv_row("timing", "", t.rows, g, t.permutations, t.seed, "shuffle_seconds", r.shuffle_seconds);
            out += csv_row("timing", "", t.rows, g, t.permutations, t.seed, "shuffle_p_value", r.shuffle.p_value);
            out += csv_row("timing", "", t.rows, g, t.permutations, t.seed, "speedup",
                           r.shuffle_seconds / std::max(r.mit_seconds, 1e-9));
        }
    }
    emit(a.c.out, out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detect, explain and resolve bias in group-by queries over categorical data"};
    app.require_subcommand(1);

    AnalyzeArgs an;
    auto* analyze_cmd = app.add_subcommand("analyze", "bias report for a group-by query");
    add_data_flags(analyze_cmd, an.c);
    add_test_flags(analyze_cmd, an.c);
    add_seed_flag(analyze_cmd, an.c);
    analyze_cmd->add_option("--treatment", an.treatment, "treatment attribute")->required();
    analyze_cmd->add_option("--t0", an.t0, "control treatment value")->required();
    analyze_cmd->add_option("--t1", an.t1, "treated value")->required();
    analyze_cmd->add_option("--outcome", an.outcomes, "0/1 outcome attribute(s), comma separated")->required();
    analyze_cmd->add_option("--groupby", an.groupby, "grouping attribute(s), comma separated");
    analyze_cmd->add_option("--effect", an.effect, "total or direct")
        ->check(CLI::IsMember({"total", "direct"}))
        ->capture_default_str();
    auto* cov = analyze_cmd->add_option("--covariates", an.covariates, "skip discovery and use these covariates");
    cov->expected(0, -1);
    analyze_cmd->add_option("--mediators", an.mediators, "with --covariates: OUTCOME:M1,M2 (repeatable)");
    analyze_cmd->add_option("--top-k", an.top_k, "fine-grained explanations per covariate")->capture_default_str();
    analyze_cmd->add_flag("--keep-keylike", an.keep_keylike, "do not drop key-like attributes");
    analyze_cmd->add_option("--out", an.c.out, "report path (default stdout)");

    DiscoverArgs di;
    auto* discover_cmd = app.add_subcommand("discover", "parents of one attribute");
    add_data_flags(discover_cmd, di.c);
    add_test_flags(discover_cmd, di.c);
    add_seed_flag(discover_cmd, di.c);
    discover_cmd->add_option("--target", di.target, "attribute whose parents are sought")->required();
    discover_cmd->add_option("--exclude", di.exclude, "attributes never reported as parents");
    discover_cmd->add_option("--test", di.test, "chi2, mit, hymit or shuffle")
        ->check(CLI::IsMember({"chi2", "mit", "hymit", "shuffle"}))
        ->capture_default_str();
    discover_cmd->add_option("--max-boundary", di.max_boundary, "Markov boundary size cap")->capture_default_str();
    discover_cmd->add_option("--out", di.c.out, "output path (default stdout)");

    IndepArgs in;
    auto* indep_cmd = app.add_subcommand("indep", "conditional independence test");
    add_data_flags(indep_cmd, in.c);
    add_test_flags(indep_cmd, in.c);
    add_seed_flag(indep_cmd, in.c);
    indep_cmd->add_option("-x,--x", in.x, "attribute(s), comma separated")->required();
    indep_cmd->add_option("-y,--y", in.y, "attribute(s), comma separated")->required();
    indep_cmd->add_option("-z,--z", in.z, "conditioning attribute(s), comma separated");
    indep_cmd->add_option("--method", in.method, "chi2, mit, hymit or shuffle")
        ->check(CLI::IsMember({"chi2", "mit", "hymit", "shuffle"}))
        ->capture_default_str();
    indep_cmd->add_option("--out", in.c.out, "output path (default stdout)");

    SynthArgs sy;
    auto* synth_cmd = app.add_subcommand("synth", "random causal DAG and a sample from it");
    add_seed_flag(synth_cmd, sy.c);
    synth_cmd->add_option("--nodes", sy.dag.nodes, "number of nodes")->capture_default_str();
    synth_cmd->add_option("--edge-probability", sy.dag.edge_probability, "skeleton edge probability")
        ->capture_default_str();
    synth_cmd->add_option("--degree", sy.degree, "expected in+out degree per node (sets the edge probability)");
    synth_cmd->add_option("--edges", sy.edges, "expected total edges (sets the edge probability)");
    synth_cmd->add_option("--min-categories", sy.dag.min_categories, "fewest categories per node")
        ->capture_default_str();
    synth_cmd->add_option("--max-categories", sy.dag.max_categories, "most categories per node")
        ->capture_default_str();
    synth_cmd->add_option("--concentration", sy.dag.concentration, "Dirichlet concentration of CPT rows")
        ->capture_default_str();
    synth_cmd->add_option("--rows", sy.rows, "rows to sample")->capture_default_str();
    synth_cmd->add_option("--delimiter", sy.c.delimiter, "CSV field delimiter");
    synth_cmd->add_option("--out", sy.c.out, "CSV path (default stdout)");
    synth_cmd->add_option("--dag", sy.dag_out, "write the DAG as JSON here");

    BenchArgs be;
    auto* bench_cmd = app.add_subcommand("bench", "parent recovery sweep and permutation test timing");
    add_test_flags(bench_cmd, be.c);
    add_seed_flag(bench_cmd, be.c);
    bench_cmd->add_option("--kind", be.kind, "recovery, timing or all")->capture_default_str();
    bench_cmd->add_option("--nodes", be.nodes, "DAG size for recovery")->capture_default_str();
    bench_cmd->add_option("--rows", be.rows, "rows per recovery sample")->capture_default_str();
    bench_cmd->add_option("--seeds", be.seeds, "recovery repetitions")->capture_default_str();
    bench_cmd->add_option("--degree", be.degree, "expected in+out degree per node")->capture_default_str();
    bench_cmd->add_option("--timing-rows", be.timing_rows, "rows in the timing dataset")->capture_default_str();
    bench_cmd->add_option("--groups", be.groups, "conditioning groups in the timing dataset")->capture_default_str();
    bench_cmd->add_option("--filter", be.filter, "nodes scored for F1: all, two-parents or nonadjacent")
        ->check(CLI::IsMember({"all", "two-parents", "nonadjacent"}))
        ->capture_default_str();
    bench_cmd->add_flag("!--no-shuffle", be.timing_shuffle, "skip the row-shuffling baseline");
    bench_cmd->add_option("--out", be.c.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analyze_cmd->parsed()) {
            an.covariates_given = cov->count() > 0;
            return run_analyze(an);
        }
        if (discover_cmd->parsed()) return run_discover(di);
        if (indep_cmd->parsed()) return run_indep(in);
        if (synth_cmd->parsed()) return run_synth(sy);
        if (bench_cmd->parsed()) return run_bench(be);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
