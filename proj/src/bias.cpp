#include "causalq/bias.hpp"

#include "causalq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace causalq {

namespace {

constexpr double kZeroInformation = 1e-12;

template <class T>
std::vector<T> with(std::vector<T> a, const std::vector<T>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

AttrSet without(const AttrSet& a, const AttrSet& drop) {
    AttrSet out;
    for (AttrId x : a)
        if (std::find(drop.begin(), drop.end(), x) == drop.end()) out.push_back(x);
    return out;
}

AttrSet unique_sorted(AttrSet a) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

std::optional<Code> one_code(const Dataset& ds, AttrId y) { return ds.column(y).encode("1"); }

struct ArmCounts {
    std::uint64_t n0 = 0, y0 = 0, n1 = 0, y1 = 0;
    bool both() const { return n0 > 0 && n1 > 0; }
    std::uint64_t n() const { return n0 + n1; }
    double avg0() const { return static_cast<double>(y0) / static_cast<double>(n0); }
    double avg1() const { return static_cast<double>(y1) / static_cast<double>(n1); }
};

struct Block {
    std::vector<Code> key;
    ArmCounts arms;
};

// Blocks over `prefix` attributes in lexicographic order, from a table over prefix + (T, Y).
std::vector<Block> blocks_of(const CountCache& counts, const ResolvedQuery& q, const AttrSet& prefix,
                             AttrId outcome) {
    const auto table = counts.table(with(prefix, {q.treatment, outcome}));
    const auto one = one_code(counts.dataset(), outcome);
    const std::size_t k = prefix.size();
    std::vector<Block> out;
    for (std::size_t c = 0; c < table->cell_count(); ++c) {
        const auto key = table->key(c);
        const Code t = key[k];
        if (t != q.t0 && t != q.t1) continue;
        if (out.empty() || !std::equal(key.begin(), key.begin() + k, out.back().key.begin())) {
            out.push_back({std::vector<Code>(key.begin(), key.begin() + k), {}});
        }
        const auto n = table->count(c);
        const bool positive = one && key[k + 1] == *one;
        auto& arms = out.back().arms;
        if (t == q.t0) {
            arms.n0 += n;
            if (positive) arms.y0 += n;
        } else {
            arms.n1 += n;
            if (positive) arms.y1 += n;
        }
    }
    return out;
}

std::uint64_t arm_rows(const std::vector<Block>& blocks) {
    std::uint64_t n = 0;
    for (const auto& b : blocks) n += b.arms.n();
    return n;
}

// Rows of the selection whose `prefix` values form a kept block.
Selection matched_rows(const CountCache& counts, const ResolvedQuery& q, const AttrSet& prefix,
                       const std::set<std::vector<Code>>& kept) {
    const auto& ds = counts.dataset();
    const auto& tcol = ds.column(q.treatment);
    std::vector<std::uint32_t> rows;
    std::vector<Code> key(prefix.size());
    for (auto r : counts.selection().rows()) {
        const Code t = tcol.code(r);
        if (t != q.t0 && t != q.t1) continue;
        for (std::size_t i = 0; i < prefix.size(); ++i) key[i] = ds.column(prefix[i]).code(r);
        if (kept.count(key)) rows.push_back(r);
    }
    return Selection(std::move(rows));
}

bool has_both_arms(const CountCache& counts, const ResolvedQuery& q) {
    const auto t = counts.table({q.treatment});
    const Code k0[1] = {q.t0};
    const Code k1[1] = {q.t1};
    return t->lookup(k0) > 0 && t->lookup(k1) > 0;
}

TestResult significance(const CountCache& counts, const ResolvedQuery& q, AttrId outcome, const AttrSet& z,
                        const AnalysisConfig& cfg) {
    return run_test(cfg.bias_test, counts, {q.treatment}, {outcome}, z, cfg.test);
}

}  // namespace

std::string to_string(EffectKind k) { return k == EffectKind::total ? "total" : "direct"; }

EffectKind parse_effect_kind(const std::string& s) {
    if (s == "total") return EffectKind::total;
    if (s == "direct") return EffectKind::direct;
    throw UsageError("unknown effect kind '" + s + "' (expected total or direct)");
}

std::string to_string(EstimateKind k) {
    switch (k) {
    case EstimateKind::naive: return "naive";
    case EstimateKind::total: return "total";
    case EstimateKind::direct: return "direct";
    }
    return "?";
}

void CausalQuery::validate(const Dataset& ds) const {
    const auto t = ds.find(treatment);
    if (!t) throw UsageError("unknown treatment attribute '" + treatment + "'");
    if (t0 == t1) throw UsageError("treatment values must differ");
    const auto& tcol = ds.column(*t);
    for (const auto* v : {&t0, &t1})
        if (!tcol.encode(*v)) throw UsageError("treatment value '" + *v + "' not present in " + treatment);
    if (outcomes.empty()) throw UsageError("at least one outcome is required");
    for (const auto& y : outcomes) {
        const auto id = ds.find(y);
        if (!id) throw UsageError("unknown outcome attribute '" + y + "'");
        if (*id == *t) throw UsageError("outcome equals the treatment");
        if (!ds.column(*id).is_binary_outcome()) throw UsageError("outcome '" + y + "' is not 0/1");
        if (std::find(groupby.begin(), groupby.end(), y) != groupby.end())
            throw UsageError("outcome '" + y + "' is also a group-by attribute");
    }
    for (const auto& g : groupby) {
        if (!ds.find(g)) throw UsageError("unknown group-by attribute '" + g + "'");
        if (g == treatment) throw UsageError("treatment is also a group-by attribute");
    }
    for (const auto& term : where.terms)
        if (!ds.find(term.attribute)) throw UsageError("unknown attribute '" + term.attribute + "' in where");
}

ResolvedQuery ResolvedQuery::resolve(const Dataset& ds, const CausalQuery& q) {
    q.validate(ds);
    ResolvedQuery r;
    r.treatment = ds.attr(q.treatment);
    r.t0 = *ds.column(r.treatment).encode(q.t0);
    r.t1 = *ds.column(r.treatment).encode(q.t1);
    r.outcomes = ds.attrs(q.outcomes);
    r.groupby = ds.attrs(q.groupby);
    return r;
}

BiasVerdict detect_bias(const CountCache& context, const ResolvedQuery& q, const AttrSet& v,
                        const AnalysisConfig& cfg) {
    BiasVerdict out;
    if (context.selection().size() < 2 || !has_both_arms(context, q)) {
        out.determined = false;
        out.note = context.selection().size() < 2 ? "fewer than two rows" : "only one treatment value present";
        return out;
    }
    if (v.empty()) {
        out.note = "no covariates";
        return out;
    }
    out.test = run_test(cfg.bias_test, context, {q.treatment}, v, {}, cfg.test);
    out.statistic = out.test.statistic;
    out.biased = out.test.rejects(cfg.test.alpha);
    return out;
}

std::vector<Responsibility> responsibility(const CountCache& context, const ResolvedQuery& q, const AttrSet& v,
                                           Estimator est) {
    if (v.empty()) return {};
    const AttrSet t{q.treatment};
    EntropyCache cache;
    const double total = cmi(context, t, v, {}, est, &cache).value;
    std::vector<Responsibility> out;
    double denom = 0.0;
    for (AttrId a : v) {
        const AttrSet rest = without(v, {a});
        const double cond = rest.empty() ? 0.0 : cmi(context, t, rest, {a}, est, &cache).value;
        const double num = std::max(0.0, total - cond);
        out.push_back({a, context.dataset().name(a), num});
        denom += num;
    }
    if (denom <= kZeroInformation) return {};
    for (auto& r : out) r.rho /= denom;
    std::sort(out.begin(), out.end(), [](const Responsibility& a, const Responsibility& b) {
        if (a.rho != b.rho) return a.rho > b.rho;
        return a.name < b.name;
    });
    return out;
}

std::vector<std::size_t> borda_scores(const std::vector<double>& first, const std::vector<double>& second) {
    if (first.size() != second.size()) throw UsageError("borda_scores: rankings differ in length");
    std::vector<std::size_t> out(first.size(), 0);
    for (const auto* scores : {&first, &second}) {
        std::vector<double> sorted = *scores;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), (*scores)[i]) -
                                               sorted.begin());
    }
    return out;
}

std::vector<FineExplanation> fine_explanations(const CountCache& context, const ResolvedQuery& q, AttrId z,
                                               AttrId outcome, std::size_t k) {
    if (k == 0) throw UsageError("fine_explanations: k must be at least 1");
    const auto tz = context.table({q.treatment, z});
    const auto yz = context.table({outcome, z});
    if (mutual_information_plugin(*tz) <= kZeroInformation && mutual_information_plugin(*yz) <= kZeroInformation)
        return {};

    std::map<std::pair<Code, Code>, double> k_tz, k_yz;
    for (std::size_t c = 0; c < tz->cell_count(); ++c) {
        const auto key = tz->key(c);
        k_tz[{key[0], key[1]}] = kappa(*tz, key[0], key[1]);
    }
    for (std::size_t c = 0; c < yz->cell_count(); ++c) {
        const auto key = yz->key(c);
        k_yz[{key[0], key[1]}] = kappa(*yz, key[0], key[1]);
    }

    const auto& ds = context.dataset();
    const auto tyz = context.table({q.treatment, outcome, z});
    std::vector<FineExplanation> all;
    std::vector<double> a, b;
    for (std::size_t c = 0; c < tyz->cell_count(); ++c) {
        const auto key = tyz->key(c);
        FineExplanation e;
        e.t = ds.column(q.treatment).decode(key[0]);
        e.y = ds.column(outcome).decode(key[1]);
        e.z = ds.column(z).decode(key[2]);
        e.kappa_tz = k_tz.at({key[0], key[2]});
        e.kappa_yz = k_yz.at({key[1], key[2]});
        a.push_back(e.kappa_tz);
        b.push_back(e.kappa_yz);
        all.push_back(std::move(e));
    }
    const auto scores = borda_scores(a, b);
    for (std::size_t i = 0; i < all.size(); ++i) all[i].borda = scores[i];
    std::sort(all.begin(), all.end(), [](const FineExplanation& x, const FineExplanation& y) {
        if (x.borda != y.borda) return x.borda > y.borda;
        return std::tie(x.t, x.y, x.z) < std::tie(y.t, y.y, y.z);
    });
    if (all.size() > k) all.resize(k);
    return all;
}

EffectEstimate naive_estimate(const CountCache& context, const ResolvedQuery& q, AttrId outcome,
                              const AnalysisConfig& cfg) {
    EffectEstimate e;
    e.kind = EstimateKind::naive;
    const auto blocks = blocks_of(context, q, {}, outcome);
    e.blocks = blocks.size();
    if (blocks.empty() || !blocks.front().arms.both()) {
        e.note = "both treatment values are needed";
        return e;
    }
    const auto& arms = blocks.front().arms;
    e.defined = true;
    e.blocks_kept = 1;
    e.avg_t0 = arms.avg0();
    e.avg_t1 = arms.avg1();
    e.delta = e.avg_t1 - e.avg_t0;
    e.matched_fraction = 1.0;
    e.significance = significance(context, q, outcome, {}, cfg);
    return e;
}

EffectEstimate rewrite_total(const CountCache& context, const ResolvedQuery& q, const AttrSet& z, AttrId outcome,
                             const AnalysisConfig& cfg) {
    EffectEstimate e;
    e.kind = EstimateKind::total;
    const auto blocks = blocks_of(context, q, z, outcome);
    e.blocks = blocks.size();
    std::uint64_t matched = 0;
    std::set<std::vector<Code>> kept;
    for (const auto& b : blocks) {
        if (!b.arms.both()) continue;
        matched += b.arms.n();
        kept.insert(b.key);
    }
    e.blocks_kept = kept.size();
    const auto rows = arm_rows(blocks);
    if (matched == 0) {
        e.note = "no covariate block contains both treatment values";
        return e;
    }
    e.matched_fraction = static_cast<double>(matched) / static_cast<double>(rows);
    for (const auto& b : blocks) {
        if (!b.arms.both()) continue;
        const double w = static_cast<double>(b.arms.n()) / static_cast<double>(matched);
        const double a0 = b.arms.avg0();
        const double a1 = b.arms.avg1();
        e.avg_t0 += w * a0;
        e.avg_t1 += w * a1;
        e.delta += (a1 - a0) * w;
    }
    e.defined = true;
    if (kept.size() == blocks.size()) {
        e.significance = significance(context, q, outcome, z, cfg);
    } else {
        CountCache sub(context.dataset(), matched_rows(context, q, z, kept));
        e.significance = significance(sub, q, outcome, z, cfg);
    }
    return e;
}

EffectEstimate rewrite_direct(const CountCache& context, const ResolvedQuery& q, const AttrSet& z,
                              const AttrSet& m, AttrId outcome, const AnalysisConfig& cfg) {
    EffectEstimate e;
    e.kind = EstimateKind::direct;
    const AttrSet mm = without(m, z);
    const AttrSet prefix = with(z, mm);
    const auto blocks = blocks_of(context, q, prefix, outcome);
    e.blocks = blocks.size();

    std::set<std::vector<Code>> kept;
    std::map<std::vector<Code>, std::uint64_t> n_z, n1_z;  // over kept blocks
    std::uint64_t matched = 0;
    for (const auto& b : blocks) {
        if (!b.arms.both()) continue;
        kept.insert(b.key);
        const std::vector<Code> zk(b.key.begin(), b.key.begin() + z.size());
        n_z[zk] += b.arms.n();
        n1_z[zk] += b.arms.n1;
        matched += b.arms.n();
    }
    e.blocks_kept = kept.size();
    if (matched == 0) {
        e.note = "no (covariate, mediator) block contains both treatment values";
        return e;
    }
    e.matched_fraction = static_cast<double>(matched) / static_cast<double>(arm_rows(blocks));
    for (const auto& b : blocks) {
        if (!b.arms.both()) continue;
        const std::vector<Code> zk(b.key.begin(), b.key.begin() + z.size());
        const double pz = static_cast<double>(n_z.at(zk)) / static_cast<double>(matched);
        const double pm = static_cast<double>(b.arms.n1) / static_cast<double>(n1_z.at(zk));
        const double a0 = b.arms.avg0();
        const double a1 = b.arms.avg1();
        e.avg_t0 += a0 * pm * pz;
        e.avg_t1 += a1 * pm * pz;
        e.delta += (a0 - a1) * pm * pz;
    }
    e.defined = true;
    e.note = "effect of moving t1 -> t0";
    const AttrSet cond = unique_sorted(prefix);
    if (kept.size() == blocks.size()) {
        e.significance = significance(context, q, outcome, cond, cfg);
    } else {
        CountCache sub(context.dataset(), matched_rows(context, q, prefix, kept));
        e.significance = significance(sub, q, outcome, cond, cfg);
    }
    return e;
}

std::string rewritten_sql(const CausalQuery& q, const std::vector<std::string>& covariates,
                          const std::string& table) {
    auto join = [](const std::vector<std::string>& xs) {
        std::string s;
        for (const auto& x : xs) s += (s.empty() ? "" : ",") + x;
        return s;
    };
    auto quote = [](const std::string& v) {
        std::string s = "'";
        for (char c : v) s += c == '\'' ? std::string("''") : std::string(1, c);
        return s + "'";
    };
    std::string where = q.treatment + " IN (" + quote(q.t0) + "," + quote(q.t1) + ")";
    for (const auto& term : q.where.terms) {
        where += " AND " + term.attribute;
        if (term.values.size() == 1) {
            where += " = " + quote(term.values.front());
        } else {
            std::vector<std::string> qs;
            for (const auto& v : term.values) qs.push_back(quote(v));
            where += " IN (" + join(qs) + ")";
        }
    }
    const std::string xz = join(with(std::vector<std::string>(q.groupby), covariates));
    const std::string x = join(q.groupby);
    std::vector<std::string> avgs, sums;
    for (std::size_t i = 0; i < q.outcomes.size(); ++i) {
        const std::string a = "Avg" + std::to_string(i + 1);
        avgs.push_back("avg(" + q.outcomes[i] + ") AS " + a);
        sums.push_back("sum(" + a + " * W)");
    }
    std::vector<std::string> eqs;
    for (const auto& c : with(std::vector<std::string>(covariates), q.groupby))
        eqs.push_back("Blocks." + c + " = Weights." + c);

    std::ostringstream s;
    s << "WITH Blocks\nAS(\n  SELECT " << q.treatment << (xz.empty() ? "" : "," + xz) << "," << join(avgs)
      << "\n  FROM " << table << "\n  WHERE " << where << "\n  GROUP BY " << q.treatment
      << (xz.empty() ? "" : "," + xz) << "),\nWeights\nAS(\n  SELECT " << (xz.empty() ? "" : xz + ",")
      << "count(*)/n AS W\n  FROM " << table << "\n  WHERE " << where;
    if (!xz.empty()) s << "\n  GROUP BY " << xz;
    s << "\n  HAVING count(DISTINCT " << q.treatment << ")=2)\nSELECT " << q.treatment << (x.empty() ? "" : "," + x)
      << "," << join(sums) << "\nFROM Blocks,Weights";
    if (!eqs.empty()) {
        s << "\nWHERE ";
        for (std::size_t i = 0; i < eqs.size(); ++i) s << (i ? " AND\n  " : "") << eqs[i];
    }
    s << "\nGROUP BY " << q.treatment << (x.empty() ? "" : "," + x) << "\n";
    return s.str();
}

bool BiasReport::any_undetermined() const {
    return std::any_of(contexts.begin(), contexts.end(),
                       [](const ContextReport& c) { return c.status == "undetermined"; });
}

bool BiasReport::any_error() const {
    return std::any_of(contexts.begin(), contexts.end(), [](const ContextReport& c) { return c.status == "error"; });
}

namespace {

AttrSet resolve_names(const Dataset& ds, const std::vector<std::string>& names) { return ds.attrs(names); }

void explain(const CountCache& ctx, const ResolvedQuery& rq, const AttrSet& v, const AnalysisConfig& cfg,
             std::vector<Responsibility>& rho, std::string& note) {
    rho = responsibility(ctx, rq, v, cfg.responsibility_estimator);
    if (rho.empty() && !v.empty()) note = "no single-attribute attribution";
}

ContextReport analyze_context(const Dataset& ds, const ResolvedQuery& rq, const Selection& sel,
                              const AttrSet& z, const std::map<AttrId, AttrSet>& mediators, EffectKind kind,
                              const AnalysisConfig& cfg) {
    ContextReport out;
    out.rows = sel.size();
    CountCache ctx(ds, sel);
    out.bias = detect_bias(ctx, rq, z, cfg);
    if (!out.bias.determined) {
        out.status = "undetermined";
        out.message = out.bias.note;
        return out;
    }
    out.status = "ok";
    if (out.bias.biased) explain(ctx, rq, z, cfg, out.responsibility, out.responsibility_note);

    for (AttrId y : rq.outcomes) {
        OutcomeReport o;
        o.outcome = ds.name(y);
        o.naive = naive_estimate(ctx, rq, y, cfg);
        o.total = rewrite_total(ctx, rq, z, y, cfg);
        if (out.bias.biased && !out.responsibility.empty()) {
            for (AttrId a : z) {
                auto fine = fine_explanations(ctx, rq, a, y, cfg.top_k);
                if (!fine.empty()) o.fine[ds.name(a)] = std::move(fine);
            }
        }
        if (kind == EffectKind::direct) {
            const AttrSet& m = mediators.at(y);
            const AttrSet v = unique_sorted(with(z, m));
            o.direct_bias = detect_bias(ctx, rq, v, cfg);
            if (o.direct_bias->biased) {
                std::string note;
                explain(ctx, rq, v, cfg, o.direct_responsibility, note);
            }
            o.direct = rewrite_direct(ctx, rq, z, m, y, cfg);
        }
        out.outcomes.push_back(std::move(o));
    }
    return out;
}

}  // namespace

BiasReport analyze(const Dataset& ds, const CausalQuery& q, const AnalysisConfig& cfg) {
    cfg.test.validate();
    const ResolvedQuery rq = ResolvedQuery::resolve(ds, q);

    BiasReport report;
    report.query = q;
    report.config = cfg;

    Context base = q.where;
    base.where(q.treatment, {q.t0, q.t1});
    const Selection where_sel = select(ds, base);
    report.where_rows = where_sel.size();

    AttrSet z;
    std::map<AttrId, AttrSet> meds;
    auto& disc = report.discovery;
    if (cfg.covariates) {
        disc.supplied = true;
        z = resolve_names(ds, *cfg.covariates);
        for (AttrId y : rq.outcomes) {
            AttrSet m;
            if (cfg.mediators) {
                auto it = cfg.mediators->find(ds.name(y));
                if (it != cfg.mediators->end()) m = resolve_names(ds, it->second);
            }
            meds[y] = without(m, {rq.treatment, y});
        }
    } else if (!where_sel.empty()) {
        CountCache counts(ds, where_sel);
        AttrSet universe;
        for (AttrId a = 0; a < ds.column_count(); ++a) {
            if (a == rq.treatment) continue;
            // Attributes constant on the selection carry no information.
            if (counts.table({a})->cell_count() < 2) continue;
            universe.push_back(a);
        }
        AttrSet candidates = without(universe, with(rq.outcomes, rq.groupby));
        const AttrSet fd = drop_fd_attrs(counts, rq.treatment, candidates, cfg.fd_epsilon);
        disc.dropped_fd = ds.names(fd);
        candidates = without(candidates, fd);
        if (cfg.drop_keylike) {
            KeylikeOptions ko = cfg.keylike;
            ko.seed = derive_seed(cfg.test.seed, 0x6b65796c696b65ULL);
            const AttrSet keys = drop_keylike_attrs(ds, where_sel, candidates, ko);
            disc.dropped_keylike = ds.names(keys);
            candidates = without(candidates, keys);
        }
        universe = without(universe, with(fd, ds.attrs(disc.dropped_keylike)));
        universe.push_back(rq.treatment);
        std::sort(universe.begin(), universe.end());

        DataOracle oracle(counts, cfg.discovery_test, cfg.test);
        ParentDiscovery pd(oracle, universe, cfg.max_boundary);
        const ParentSearch cov = cd_covariates(pd, rq.treatment, rq.outcomes);
        // Group-by attributes are constant within each context.
        z = without(cov.parents, rq.groupby);
        disc.boundary = ds.names(cov.boundary.members);
        disc.fallback_used = cov.fallback_used;
        disc.warnings = cov.warnings;
        if (q.effect == EffectKind::direct) {
            for (AttrId y : rq.outcomes) {
                const ParentSearch med = mediators(pd, rq.treatment, y);
                meds[y] = without(med.parents, with(z, rq.groupby));
                for (const auto& w : med.warnings) disc.warnings.push_back(ds.name(y) + ": " + w);
            }
        }
        disc.tests = oracle.tests_run();
    }
    if (q.effect == EffectKind::direct)
        for (AttrId y : rq.outcomes) meds.try_emplace(y);
    disc.covariates = ds.names(z);
    if (q.effect == EffectKind::direct)
        for (const auto& [y, m] : meds) disc.mediators[ds.name(y)] = ds.names(m);
    report.sql = rewritten_sql(q, disc.covariates);

    // One context per observed group-by value combination, in code order.
    std::vector<std::pair<std::vector<std::pair<std::string, std::string>>, Selection>> contexts;
    if (rq.groupby.empty()) {
        contexts.push_back({{}, where_sel});
    } else if (!where_sel.empty()) {
        const auto gt = contingency(ds, where_sel, rq.groupby);
        for (std::size_t c = 0; c < gt.cell_count(); ++c) {
            const auto key = gt.key(c);
            Context ctx;
            std::vector<std::pair<std::string, std::string>> label;
            for (std::size_t i = 0; i < rq.groupby.size(); ++i) {
                const auto& value = ds.column(rq.groupby[i]).decode(key[i]);
                ctx.where(ds.name(rq.groupby[i]), {value});
                label.emplace_back(ds.name(rq.groupby[i]), value);
            }
            contexts.push_back({std::move(label), select(ds, where_sel, ctx)});
        }
    }

    for (auto& [label, sel] : contexts) {
        ContextReport cr;
        try {
            cr = analyze_context(ds, rq, sel, z, meds, q.effect, cfg);
        } catch (const std::exception& e) {
            cr.rows = sel.size();
            cr.status = "error";
            cr.message = e.what();
        }
        cr.key = label;
        report.contexts.push_back(std::move(cr));
    }
    if (report.contexts.empty()) {
        ContextReport cr;
        cr.status = "undetermined";
        cr.message = "the where clause selects no rows with either treatment value";
        report.contexts.push_back(std::move(cr));
    }
    return report;
}

}  // namespace causalq
