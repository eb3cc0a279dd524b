#pragma once

#include "causalq/dataset.hpp"
#include "causalq/selection.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace causalq {

/// Sparse k-way table of counts over an ordered attribute list.
///
/// Nonempty cells are stored sorted lexicographically by code tuple, so two
/// tables over the same rows and attributes compare equal regardless of how
/// they were produced (direct scan or marginalization).
class ContingencyTable {
public:
    ContingencyTable() = default;
    ContingencyTable(AttrSet attrs, std::vector<std::size_t> cardinalities,
                     std::vector<Code> keys, std::vector<std::uint64_t> counts);

    const AttrSet& attrs() const { return attrs_; }
    std::size_t arity() const { return attrs_.size(); }
    const std::vector<std::size_t>& cardinalities() const { return cards_; }
    std::size_t cell_count() const { return counts_.size(); }
    std::uint64_t total() const { return total_; }

    std::span<const Code> key(std::size_t cell) const {
        return {keys_.data() + cell * attrs_.size(), attrs_.size()};
    }
    std::uint64_t count(std::size_t cell) const { return counts_[cell]; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    /// Count for an explicit code tuple (0 when the cell is empty).
    std::uint64_t lookup(std::span<const Code> codes) const;

    /// Position of `a` in attrs(), or throws UsageError.
    std::size_t position(AttrId a) const;

    /// Row-major dense counts; only defined for one- and two-way tables.
    std::vector<std::uint64_t> dense() const;

    friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;

private:
    AttrSet attrs_;
    std::vector<std::size_t> cards_;
    std::vector<Code> keys_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Exact group-by counts of `attrs` over the selected rows.
ContingencyTable contingency(const Dataset& ds, const Selection& sel, const AttrSet& attrs);

/// Sums out every attribute not in `keep`; result columns follow `keep`'s order.
ContingencyTable marginalize(const ContingencyTable& ct, const AttrSet& keep);

}  // namespace causalq
