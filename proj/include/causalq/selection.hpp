#pragma once

#include "causalq/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace causalq {

/// One conjunct: attribute IN {values}. Equality is the single-value case.
struct Term {
    std::string attribute;
    std::vector<std::string> values;
};

/// Conjunction of terms; the empty context selects every row.
struct Context {
    std::vector<Term> terms;

    Context& where(std::string attribute, std::vector<std::string> values) {
        terms.push_back({std::move(attribute), std::move(values)});
        return *this;
    }
    Context conjoin(const Context& other) const;
    std::string to_string() const;
};

/// Parses "A=a, B IN x|y" style predicates.
Context parse_context(const std::string& text);

/// Immutable, sorted set of selected row indices with a content fingerprint.
class Selection {
public:
    Selection() = default;
    explicit Selection(std::vector<std::uint32_t> rows);

    static Selection all(const Dataset& ds);

    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    const std::vector<std::uint32_t>& rows() const { return rows_; }
    std::uint64_t fingerprint() const { return fingerprint_; }

    Selection intersect(const Selection& other) const;
    friend bool operator==(const Selection& a, const Selection& b) { return a.rows_ == b.rows_; }

private:
    std::vector<std::uint32_t> rows_;
    std::uint64_t fingerprint_ = 0;
};

/// Rows satisfying `ctx`. Values absent from a dictionary simply match nothing.
Selection select(const Dataset& ds, const Context& ctx);
/// Restricts an existing selection.
Selection select(const Dataset& ds, const Selection& base, const Context& ctx);

}  // namespace causalq
