#pragma once

#include "causalq/contingency.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

namespace causalq {

/// Contingency tables for one (dataset, selection) pair.
///
/// Requests over a subset of a materialized attribute set are answered by
/// marginalizing the cached table instead of rescanning rows. Every answer
/// is memoized. Reads are concurrent; inserts take an exclusive lock.
class CountCache {
public:
    CountCache(const Dataset& ds, Selection sel);

    CountCache(const CountCache&) = delete;
    CountCache& operator=(const CountCache&) = delete;

    const Dataset& dataset() const { return *ds_; }
    const Selection& selection() const { return sel_; }

    /// Table over `attrs` in the given order.
    std::shared_ptr<const ContingencyTable> table(const AttrSet& attrs) const;

    /// Scans once per set and keeps the result as a source for marginals.
    void materialize(const std::vector<AttrSet>& attr_sets);

    /// Number of row scans performed so far.
    std::size_t scan_count() const { return scans_.load(); }

    /// Upper bound on memoized cells before the memo is flushed.
    void set_memo_limit(std::size_t cells) { memo_limit_ = cells; }

private:
    std::shared_ptr<const ContingencyTable> find_source(const AttrSet& attrs) const;

    const Dataset* ds_;
    Selection sel_;
    mutable std::shared_mutex mutex_;
    std::vector<std::shared_ptr<const ContingencyTable>> sources_;
    mutable std::map<AttrSet, std::shared_ptr<const ContingencyTable>> memo_;
    mutable std::size_t memo_cells_ = 0;
    std::size_t memo_limit_ = std::size_t{1} << 24;
    mutable std::atomic<std::size_t> scans_{0};
};

std::unique_ptr<CountCache> materialize_cache(const Dataset& ds, const Selection& sel, const std::vector<AttrSet>& attr_sets);

}  // namespace causalq
