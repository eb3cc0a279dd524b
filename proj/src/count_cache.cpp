#include "causalq/count_cache.hpp"

#include <algorithm>
#include <mutex>

namespace causalq {

CountCache::CountCache(const Dataset& ds, Selection sel) : ds_(&ds), sel_(std::move(sel)) {}

std::shared_ptr<const ContingencyTable> CountCache::find_source(const AttrSet& attrs) const {
    std::shared_ptr<const ContingencyTable> best;
    for (const auto& src : sources_) {
        const auto& have = src->attrs();
        const bool covers = std::all_of(attrs.begin(), attrs.end(), [&](AttrId a) {
            return std::find(have.begin(), have.end(), a) != have.end();
        });
        if (covers && (!best || src->cell_count() < best->cell_count())) best = src;
    }
    return best;
}

std::shared_ptr<const ContingencyTable> CountCache::table(const AttrSet& attrs) const {
    std::shared_ptr<const ContingencyTable> source;
    {
        std::shared_lock lock(mutex_);
        if (auto it = memo_.find(attrs); it != memo_.end()) return it->second;
        source = find_source(attrs);
    }
    std::shared_ptr<const ContingencyTable> result;
    if (source) {
        result = std::make_shared<const ContingencyTable>(marginalize(*source, attrs));
    } else {
        ++scans_;
        result = std::make_shared<const ContingencyTable>(contingency(*ds_, sel_, attrs));
    }
    std::unique_lock lock(mutex_);
    if (memo_cells_ + result->cell_count() > memo_limit_) {
        memo_.clear();
        memo_cells_ = 0;
    }
    auto [it, inserted] = memo_.emplace(attrs, result);
    if (inserted) memo_cells_ += result->cell_count();
    return it->second;
}

void CountCache::materialize(const std::vector<AttrSet>& attr_sets) {
    for (const auto& set : attr_sets) {
        {
            std::shared_lock lock(mutex_);
            if (find_source(set)) continue;
        }
        ++scans_;
        auto table = std::make_shared<const ContingencyTable>(contingency(*ds_, sel_, set));
        std::unique_lock lock(mutex_);
        sources_.push_back(std::move(table));
    }
}

std::unique_ptr<CountCache> materialize_cache(const Dataset& ds, const Selection& sel,
                                              const std::vector<AttrSet>& attr_sets) {
    auto cache = std::make_unique<CountCache>(ds, sel);
    cache->materialize(attr_sets);
    return cache;
}

}  // namespace causalq
