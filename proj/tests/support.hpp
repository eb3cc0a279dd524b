#pragma once

// Fixture builders and brute-force oracles shared by the unit tests and the
// acceptance runner. Oracles recompute from raw rows and never call into the
// estimators they check.

#include "causalq/bias.hpp"
#include "causalq/dataset.hpp"
#include "causalq/rng.hpp"
#include "causalq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace causalq::testing {

/// Rows repeated by count: {{values...}, count}.
inline Dataset dataset_from_counts(const std::vector<std::string>& names,
                                   const std::vector<std::pair<std::vector<std::string>, int>>& groups) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& [values, count] : groups)
        for (int i = 0; i < count; ++i) cells.push_back(values);
    return Dataset::from_rows(names, cells);
}

/// Treatment T in {t0, t1}, covariate Z in {z0, z1}, outcome Y. Successes / totals:
/// z0: t1 81/87, t0 234/270; z1: t1 192/263, t0 55/80.
inline Dataset simpson_dataset() {
    return dataset_from_counts({"T", "Z", "Y"}, {{{"t1", "z0", "1"}, 81},
                                                 {{"t1", "z0", "0"}, 6},
                                                 {{"t0", "z0", "1"}, 234},
                                                 {{"t0", "z0", "0"}, 36},
                                                 {{"t1", "z1", "1"}, 192},
                                                 {{"t1", "z1", "0"}, 71},
                                                 {{"t0", "z1", "1"}, 55},
                                                 {{"t0", "z1", "0"}, 25}});
}

inline CausalQuery simpson_query() {
    CausalQuery q;
    q.treatment = "T";
    q.t0 = "t0";
    q.t1 = "t1";
    q.outcomes = {"Y"};
    return q;
}

/// Every Z block holds the same number of rows of each arm, so T is exactly independent of Z.
inline Dataset balanced_dataset() {
    return dataset_from_counts({"T", "Z", "Y"}, {{{"0", "a", "1"}, 7},
                                                 {{"0", "a", "0"}, 13},
                                                 {{"1", "a", "1"}, 12},
                                                 {{"1", "a", "0"}, 8},
                                                 {{"0", "b", "1"}, 3},
                                                 {{"0", "b", "0"}, 17},
                                                 {{"1", "b", "1"}, 9},
                                                 {{"1", "b", "0"}, 11},
                                                 {{"0", "c", "1"}, 15},
                                                 {{"0", "c", "0"}, 5},
                                                 {{"1", "c", "1"}, 16},
                                                 {{"1", "c", "0"}, 4}});
}

/// Carrier x Airport x Delayed counts, UA concentrated at the delay-prone airport.
inline Dataset flights_dataset() {
    std::vector<std::pair<std::vector<std::string>, int>> g;
    auto add = [&](const char* carrier, const char* airport, int delayed, int total) {
        g.push_back({{carrier, airport, "1"}, delayed});
        g.push_back({{carrier, airport, "0"}, total - delayed});
    };
    add("UA", "ROC", 200, 400);
    add("AA", "ROC", 27, 50);
    add("UA", "COS", 5, 50);
    add("AA", "COS", 40, 300);
    add("UA", "MFE", 4, 40);
    add("AA", "MFE", 30, 250);
    add("UA", "MTJ", 3, 30);
    add("AA", "MTJ", 25, 200);
    return dataset_from_counts({"Carrier", "Airport", "Delayed"}, g);
}

/// Bernoulli draw.
inline bool coin(Rng& rng, double p) { return uniform01(rng) < p; }

/// Plug-in I(X;Y|Z) from raw rows; x, y, z are column indices (z may be empty).
inline double brute_cmi(const Dataset& ds, const std::vector<std::uint32_t>& rows, const AttrSet& x,
                        const AttrSet& y, const AttrSet& z) {
    using Key = std::vector<Code>;
    auto key = [&](std::uint32_t r, const AttrSet& a) {
        Key k;
        for (auto c : a) k.push_back(ds.column(c).code(r));
        return k;
    };
    std::map<Key, double> nz;
    std::map<std::pair<Key, Key>, double> nxz, nyz;
    std::map<std::tuple<Key, Key, Key>, double> nxyz;
    for (auto r : rows) {
        const auto kx = key(r, x), ky = key(r, y), kz = key(r, z);
        nz[kz] += 1;
        nxz[{kx, kz}] += 1;
        nyz[{ky, kz}] += 1;
        nxyz[{kx, ky, kz}] += 1;
    }
    const double n = static_cast<double>(rows.size());
    double sum = 0.0;
    for (const auto& [k, c] : nxyz) {
        const auto& [kx, ky, kz] = k;
        sum += c / n * std::log(c * nz[kz] / (nxz[{kx, kz}] * nyz[{ky, kz}]));
    }
    return sum;
}

inline std::vector<std::uint32_t> all_rows(const Dataset& ds) {
    std::vector<std::uint32_t> r(ds.row_count());
    for (std::uint32_t i = 0; i < r.size(); ++i) r[i] = i;
    return r;
}

/// Exact permutation p-value of I(X;Y|Z) for single attributes x, y and a set z:
/// the share of within-Z-group reassignments of the x column whose statistic is
/// at least the observed one. Enumerates multiset permutations, so keep it tiny.
inline double exact_permutation_p(const Dataset& ds, AttrId x, AttrId y, const AttrSet& z) {
    const auto rows = all_rows(ds);
    const double s0 = brute_cmi(ds, rows, {x}, {y}, z);
    std::map<std::vector<Code>, std::vector<std::uint32_t>> groups;
    for (auto r : rows) {
        std::vector<Code> k;
        for (auto c : z) k.push_back(ds.column(c).code(r));
        groups[k].push_back(r);
    }
    std::vector<std::vector<std::uint32_t>> members;
    std::vector<std::vector<Code>> labels;
    for (auto& [k, g] : groups) {
        members.push_back(g);
        std::vector<Code> l;
        for (auto r : g) l.push_back(ds.column(x).code(r));
        std::sort(l.begin(), l.end());
        labels.push_back(l);
    }
    // Distinct label arrangements within each group are equally likely under shuffling.
    std::vector<Code> xcodes(ds.row_count());
    for (auto r : rows) xcodes[r] = ds.column(x).code(r);
    std::vector<Code> ycodes(ds.row_count());
    for (auto r : rows) ycodes[r] = ds.column(y).code(r);
    std::vector<std::vector<Code>> zkeys(ds.row_count());
    for (auto r : rows)
        for (auto c : z) zkeys[r].push_back(ds.column(c).code(r));

    auto stat = [&]() {
        std::map<std::vector<Code>, double> nz;
        std::map<std::pair<Code, std::vector<Code>>, double> nxz, nyz;
        std::map<std::tuple<Code, Code, std::vector<Code>>, double> nxyz;
        for (auto r : rows) {
            nz[zkeys[r]] += 1;
            nxz[{xcodes[r], zkeys[r]}] += 1;
            nyz[{ycodes[r], zkeys[r]}] += 1;
            nxyz[{xcodes[r], ycodes[r], zkeys[r]}] += 1;
        }
        const double n = static_cast<double>(rows.size());
        double s = 0.0;
        for (const auto& [k, c] : nxyz) {
            const auto& [kx, ky, kz] = k;
            s += c / n * std::log(c * nz[kz] / (nxz[{kx, kz}] * nyz[{ky, kz}]));
        }
        return s;
    };

    std::size_t total = 0, hits = 0;
    std::function<void(std::size_t)> recurse = [&](std::size_t g) {
        if (g == members.size()) {
            ++total;
            if (stat() >= s0 - 1e-9) ++hits;
            return;
        }
        auto perm = labels[g];
        do {
            for (std::size_t i = 0; i < perm.size(); ++i) xcodes[members[g][i]] = perm[i];
            recurse(g + 1);
        } while (std::next_permutation(perm.begin(), perm.end()));
    };
    recurse(0);
    return static_cast<double>(hits) / static_cast<double>(total);
}

/// Adjustment formula evaluated by enumerating every Z value combination of the
/// dictionaries in lexicographic order and scanning rows for each.
inline double brute_adjusted_delta(const Dataset& ds, const std::vector<std::uint32_t>& rows, AttrId t, Code t0,
                                   Code t1, const AttrSet& z, AttrId y) {
    const auto one = ds.column(y).encode("1");
    std::vector<std::vector<Code>> combos{{}};
    for (auto a : z) {
        std::vector<std::vector<Code>> next;
        for (const auto& c : combos)
            for (Code v = 0; v < ds.column(a).cardinality(); ++v) {
                auto e = c;
                e.push_back(v);
                next.push_back(e);
            }
        combos = next;
    }
    struct Cell {
        std::uint64_t n0 = 0, y0 = 0, n1 = 0, y1 = 0;
    };
    std::vector<Cell> cells;
    std::uint64_t matched = 0;
    for (const auto& c : combos) {
        Cell cell;
        for (auto r : rows) {
            bool in = true;
            for (std::size_t i = 0; i < z.size(); ++i) in = in && ds.column(z[i]).code(r) == c[i];
            if (!in) continue;
            const Code tv = ds.column(t).code(r);
            const bool pos = one && ds.column(y).code(r) == *one;
            if (tv == t0) {
                ++cell.n0;
                cell.y0 += pos;
            } else if (tv == t1) {
                ++cell.n1;
                cell.y1 += pos;
            }
        }
        if (cell.n0 > 0 && cell.n1 > 0) matched += cell.n0 + cell.n1;
        cells.push_back(cell);
    }
    double delta = 0.0;
    for (const auto& c : cells) {
        if (c.n0 == 0 || c.n1 == 0) continue;
        const double w = static_cast<double>(c.n0 + c.n1) / static_cast<double>(matched);
        const double a0 = static_cast<double>(c.y0) / static_cast<double>(c.n0);
        const double a1 = static_cast<double>(c.y1) / static_cast<double>(c.n1);
        delta += (a1 - a0) * w;
    }
    return delta;
}

/// Node spec for hand-built DAGs: name, parents (by id), CPT rows flattened.
inline CausalDag make_dag(const std::vector<std::tuple<std::string, AttrSet, std::vector<double>>>& nodes) {
    CausalDag dag;
    for (const auto& [name, parents, cpt] : nodes) dag.add_node(name, 2, parents, cpt);
    dag.validate();
    return dag;
}

/// Binary collider Z -> T <- W.
inline CausalDag collider_dag() {
    return make_dag({{"Z", {}, {0.5, 0.5}},
                     {"W", {}, {0.5, 0.5}},
                     {"T", {0, 1}, {0.9, 0.1, 0.3, 0.7, 0.3, 0.7, 0.1, 0.9}}});
}

/// Binary chain T -> M -> Y.
inline CausalDag chain_dag() {
    return make_dag({{"T", {}, {0.5, 0.5}}, {"M", {0}, {0.8, 0.2, 0.2, 0.8}}, {"Y", {1}, {0.75, 0.25, 0.3, 0.7}}});
}

/// Population I(X;Y|Z) of a DAG by enumerating every joint state; keep the DAG tiny.
inline double exact_dag_cmi(const CausalDag& dag, std::size_t x, std::size_t y, const AttrSet& z) {
    const auto order = dag.topological_order();
    std::vector<std::size_t> state(dag.size(), 0);
    std::map<std::vector<std::size_t>, double> pz, pxz, pyz, pxyz;
    std::function<void(std::size_t, double)> walk = [&](std::size_t i, double p) {
        if (p == 0.0) return;
        if (i == order.size()) {
            std::vector<std::size_t> kz;
            for (auto a : z) kz.push_back(state[a]);
            auto kxz = kz, kyz = kz;
            kxz.push_back(state[x]);
            kyz.push_back(state[y]);
            auto kxyz = kxz;
            kxyz.push_back(state[y]);
            pz[kz] += p;
            pxz[kxz] += p;
            pyz[kyz] += p;
            pxyz[kxyz] += p;
            return;
        }
        const auto v = order[i];
        std::size_t config = 0;
        for (auto pa : dag.parents(v)) config = config * dag.categories(pa) + state[pa];
        for (std::size_t j = 0; j < dag.categories(v); ++j) {
            state[v] = j;
            walk(i + 1, p * dag.cpt(v)[config * dag.categories(v) + j]);
        }
    };
    walk(0, 1.0);
    double sum = 0.0;
    for (const auto& [k, p] : pxyz) {
        const std::vector<std::size_t> kz(k.begin(), k.end() - 2);
        auto kxz = kz, kyz = kz;
        kxz.push_back(k[k.size() - 2]);
        kyz.push_back(k.back());
        sum += p * std::log(p * pz[kz] / (pxz[kxz] * pyz[kyz]));
    }
    return sum;
}

/// Kolmogorov-Smirnov distance of a sample from U[0,1].
inline double ks_uniform(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max(d, static_cast<double>(i + 1) / n - xs[i]);
        d = std::max(d, xs[i] - static_cast<double>(i) / n);
    }
    return d;
}

}  // namespace causalq::testing
