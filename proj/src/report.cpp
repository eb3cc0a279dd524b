#include "causalq/report.hpp"

#include <cmath>
#include <cstdio>

namespace causalq {

using nlohmann::ordered_json;

namespace {

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json verdict_json(const BiasVerdict& v) {
    ordered_json j;
    j["determined"] = v.determined;
    j["biased"] = v.biased;
    j["statistic"] = number(v.statistic);
    if (v.determined && v.note.empty()) j["test"] = to_json(v.test);
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

ordered_json responsibility_json(const std::vector<Responsibility>& rho) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rho) arr.push_back({{"attribute", r.name}, {"rho", number(r.rho)}});
    return arr;
}

ordered_json trace_json(const Dataset& ds, const std::vector<TraceEntry>& trace) {
    ordered_json arr = ordered_json::array();
    for (const auto& t : trace) {
        arr.push_back({{"step", t.step},
                       {"candidate", ds.name(t.candidate)},
                       {"other", ds.name(t.other)},
                       {"given", ds.names(t.given)},
                       {"p_value", number(t.p_value)},
                       {"independent", t.independent}});
    }
    return arr;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.4f", v);
    return buf;
}

}  // namespace

ordered_json to_json(const TestResult& r) {
    ordered_json j;
    j["method"] = to_string(r.method);
    j["statistic"] = number(r.statistic);
    j["p_value"] = number(r.p_value);
    if (r.method == Method::chi2) {
        j["df"] = number(r.df);
    } else {
        j["ci"] = {number(r.ci_low), number(r.ci_high)};
        j["permutations"] = r.permutations;
    }
    j["groups"] = r.groups;
    if (r.method == Method::mit_sampled) j["groups_used"] = r.groups_used;
    return j;
}

ordered_json to_json(const EffectEstimate& e) {
    ordered_json j;
    j["kind"] = to_string(e.kind);
    j["defined"] = e.defined;
    if (e.defined) {
        j["avg_t0"] = number(e.avg_t0);
        j["avg_t1"] = number(e.avg_t1);
        j["delta"] = number(e.delta);
        j["delta_label"] = e.kind == EstimateKind::direct ? "avg_t0 - avg_t1 (NDE of moving t1 -> t0)"
                                                          : "avg_t1 - avg_t0";
        j["significance"] = to_json(e.significance);
        j["matched_fraction"] = number(e.matched_fraction);
        j["blocks"] = e.blocks;
        j["blocks_kept"] = e.blocks_kept;
    }
    if (!e.note.empty() && !(e.defined && e.kind == EstimateKind::direct)) j["note"] = e.note;
    return j;
}

ordered_json to_json(const BiasReport& report) {
    const auto& q = report.query;
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    ordered_json qj;
    qj["treatment"] = q.treatment;
    qj["t0"] = q.t0;
    qj["t1"] = q.t1;
    qj["outcomes"] = q.outcomes;
    qj["groupby"] = q.groupby;
    qj["where"] = q.where.to_string();
    qj["effect"] = to_string(q.effect);
    j["query"] = qj;
    const auto& c = report.config;
    j["config"] = {{"alpha", c.test.alpha},
                   {"permutations", c.test.permutations},
                   {"beta", c.test.beta},
                   {"group_sampling", c.test.group_sample.enabled},
                   {"seed", c.test.seed},
                   {"discovery_test", to_string(c.discovery_test)},
                   {"bias_test", to_string(c.bias_test)},
                   {"top_k", c.top_k}};
    j["where_rows"] = report.where_rows;

    const auto& d = report.discovery;
    ordered_json dj;
    dj["supplied"] = d.supplied;
    dj["dropped_fd"] = d.dropped_fd;
    dj["dropped_keylike"] = d.dropped_keylike;
    dj["boundary"] = d.boundary;
    dj["covariates"] = d.covariates;
    if (q.effect == EffectKind::direct) dj["mediators"] = d.mediators;
    dj["fallback_used"] = d.fallback_used;
    dj["tests"] = d.tests;
    dj["warnings"] = d.warnings;
    j["discovery"] = dj;

    ordered_json contexts = ordered_json::array();
    for (const auto& cr : report.contexts) {
        ordered_json cj;
        ordered_json key = ordered_json::object();
        for (const auto& [a, v] : cr.key) key[a] = v;
        cj["context"] = key;
        cj["rows"] = cr.rows;
        cj["status"] = cr.status;
        if (!cr.message.empty()) cj["message"] = cr.message;
        if (cr.status == "ok") {
            cj["bias"] = verdict_json(cr.bias);
            if (cr.bias.biased) {
                cj["responsibility"] = responsibility_json(cr.responsibility);
                if (!cr.responsibility_note.empty()) cj["responsibility_note"] = cr.responsibility_note;
            }
            ordered_json outs = ordered_json::array();
            for (const auto& o : cr.outcomes) {
                ordered_json oj;
                oj["outcome"] = o.outcome;
                oj["naive"] = to_json(o.naive);
                oj["total"] = to_json(o.total);
                if (o.naive.defined && o.total.defined)
                    oj["sign_reversal"] = (o.naive.delta > 0) != (o.total.delta > 0) && o.naive.delta != 0.0 &&
                                          o.total.delta != 0.0;
                if (!o.fine.empty()) {
                    ordered_json fj;
                    for (const auto& [attr, triples] : o.fine) {
                        ordered_json arr = ordered_json::array();
                        for (const auto& f : triples) {
                            arr.push_back({{q.treatment, f.t},
                                           {o.outcome, f.y},
                                           {attr, f.z},
                                           {"kappa_tz", number(f.kappa_tz)},
                                           {"kappa_yz", number(f.kappa_yz)},
                                           {"borda", f.borda}});
                        }
                        fj[attr] = arr;
                    }
                    oj["fine"] = fj;
                }
                if (o.direct) {
                    ordered_json dj2;
                    if (o.direct_bias) dj2["bias"] = verdict_json(*o.direct_bias);
                    if (o.direct_bias && o.direct_bias->biased)
                        dj2["responsibility"] = responsibility_json(o.direct_responsibility);
                    dj2["estimate"] = to_json(*o.direct);
                    oj["direct"] = dj2;
                }
                outs.push_back(oj);
            }
            cj["outcomes"] = outs;
        }
        contexts.push_back(cj);
    }
    j["contexts"] = contexts;
    j["sql"] = report.sql;
    return j;
}

ordered_json to_json(const Dataset& ds, const ParentSearch& s) {
    ordered_json j;
    j["target"] = ds.name(s.target);
    j["parents"] = ds.names(s.parents);
    j["phase1"] = ds.names(s.phase1);
    j["boundary"] = ds.names(s.boundary.members);
    j["boundary_truncated"] = s.boundary.truncated;
    j["fallback_used"] = s.fallback_used;
    j["warnings"] = s.warnings;
    ordered_json trace = trace_json(ds, s.boundary.trace);
    for (auto& e : trace_json(ds, s.trace)) trace.push_back(e);
    j["trace"] = trace;
    return j;
}

void write_summary(std::ostream& out, const BiasReport& report) {
    const bool direct = report.query.effect == EffectKind::direct;
    out << "covariates: ";
    if (report.discovery.covariates.empty()) out << "(none)";
    for (std::size_t i = 0; i < report.discovery.covariates.size(); ++i)
        out << (i ? ", " : "") << report.discovery.covariates[i];
    out << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %-12s %-10s %10s %10s %10s  %s\n", "context", "outcome", "bias",
                  "naive", "total", direct ? "direct" : "", "");
    out << line;
    for (const auto& cr : report.contexts) {
        std::string key;
        for (const auto& [a, v] : cr.key) key += (key.empty() ? "" : ",") + a + "=" + v;
        if (key.empty()) key = "(all)";
        if (cr.status != "ok") {
            out << key << "  " << cr.status << ": " << cr.message << "\n";
            continue;
        }
        const std::string bias = cr.bias.biased ? "biased" : "unbiased";
        for (const auto& o : cr.outcomes) {
            auto cell = [](const EffectEstimate& e) { return e.defined ? fmt(e.delta) : std::string("n/a"); };
            std::string flag;
            if (o.naive.defined && o.total.defined && o.naive.delta * o.total.delta < 0) flag = "sign reversal";
            std::snprintf(line, sizeof line, "%-28s %-12s %-10s %10s %10s %10s  %s\n", key.c_str(),
                          o.outcome.c_str(), bias.c_str(), cell(o.naive).c_str(), cell(o.total).c_str(),
                          o.direct ? cell(*o.direct).c_str() : "", flag.c_str());
            out << line;
        }
    }
}

}  // namespace causalq
