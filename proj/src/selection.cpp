#include "causalq/selection.hpp"

#include "causalq/error.hpp"
#include "causalq/rng.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace causalq {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

// Case-insensitive search for " IN " as a whole word.
std::size_t find_in_keyword(const std::string& s) {
    for (std::size_t i = 0; i + 2 <= s.size(); ++i) {
        const bool before = i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t';
        const bool after = i + 2 == s.size() || s[i + 2] == ' ' || s[i + 2] == '\t';
        if (before && after && (s[i] == 'I' || s[i] == 'i') && (s[i + 1] == 'N' || s[i + 1] == 'n')) {
            return i;
        }
    }
    return std::string::npos;
}

std::vector<std::vector<bool>> allowed_codes(const Dataset& ds, const Context& ctx, std::vector<AttrId>& attrs) {
    std::vector<std::vector<bool>> allowed;
    for (const auto& term : ctx.terms) {
        const AttrId a = ds.attr(term.attribute);
        const auto& col = ds.column(a);
        std::vector<bool> ok(col.cardinality(), false);
        for (const auto& v : term.values) {
            if (auto c = col.encode(v)) ok[*c] = true;
        }
        attrs.push_back(a);
        allowed.push_back(std::move(ok));
    }
    return allowed;
}

}  // namespace

Context Context::conjoin(const Context& other) const {
    Context out = *this;
    out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
    return out;
}

std::string Context::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += ", ";
        out += terms[i].attribute;
        if (terms[i].values.size() == 1) {
            out += "=" + terms[i].values.front();
        } else {
            out += " IN ";
            for (std::size_t j = 0; j < terms[i].values.size(); ++j) {
                if (j) out += "|";
                out += terms[i].values[j];
            }
        }
    }
    return out;
}

Context parse_context(const std::string& text) {
    Context ctx;
    if (trim(text).empty()) return ctx;
    for (const auto& raw : split(text, ',')) {
        if (raw.empty()) throw UsageError("where: empty term in '" + text + "'");
        if (auto eq = raw.find('='); eq != std::string::npos) {
            auto attr = trim(raw.substr(0, eq));
            auto value = trim(raw.substr(eq + 1));
            if (attr.empty()) throw UsageError("where: missing attribute in '" + raw + "'");
            ctx.where(attr, {value});
        } else if (auto in = find_in_keyword(raw); in != std::string::npos) {
            auto attr = trim(raw.substr(0, in));
            auto values = split(trim(raw.substr(in + 2)), '|');
            if (attr.empty() || values.empty()) throw UsageError("where: malformed IN term '" + raw + "'");
            ctx.where(attr, values);
        } else {
            throw UsageError("where: expected 'A=v' or 'A IN v1|v2', got '" + raw + "'");
        }
    }
    return ctx;
}

Selection::Selection(std::vector<std::uint32_t> rows) : rows_(std::move(rows)) {
    std::sort(rows_.begin(), rows_.end());
    rows_.erase(std::unique(rows_.begin(), rows_.end()), rows_.end());
    std::uint64_t h = splitmix64(rows_.size());
    for (auto r : rows_) h = splitmix64(h ^ r);
    fingerprint_ = h;
}

Selection Selection::all(const Dataset& ds) {
    std::vector<std::uint32_t> rows(ds.row_count());
    std::iota(rows.begin(), rows.end(), 0u);
    return Selection(std::move(rows));
}

Selection Selection::intersect(const Selection& other) const {
    std::vector<std::uint32_t> out;
    std::set_intersection(rows_.begin(), rows_.end(), other.rows_.begin(), other.rows_.end(),
                          std::back_inserter(out));
    return Selection(std::move(out));
}

Selection select(const Dataset& ds, const Selection& base, const Context& ctx) {
    std::vector<AttrId> attrs;
    const auto allowed = allowed_codes(ds, ctx, attrs);
    std::vector<std::uint32_t> rows;
    rows.reserve(base.size());
    for (auto r : base.rows()) {
        bool keep = true;
        for (std::size_t t = 0; t < attrs.size() && keep; ++t) {
            keep = allowed[t][ds.column(attrs[t]).code(r)];
        }
        if (keep) rows.push_back(r);
    }
    return Selection(std::move(rows));
}

Selection select(const Dataset& ds, const Context& ctx) {
    return select(ds, Selection::all(ds), ctx);
}

}  // namespace causalq
