#include "causalq/contingency.hpp"

#include "causalq/error.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>

namespace causalq {

namespace {

constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 20;

// Product of cardinalities, or nullopt on uint64 overflow.
std::optional<std::uint64_t> radix_product(const std::vector<std::size_t>& cards) {
    std::uint64_t p = 1;
    for (auto c : cards) {
        const std::uint64_t m = std::max<std::uint64_t>(c, 1);
        if (p > std::numeric_limits<std::uint64_t>::max() / m) return std::nullopt;
        p *= m;
    }
    return p;
}

// Accumulates weighted code tuples and emits a sorted sparse table. `emit(i, out)`
// writes the codes of item i into `out`.
template <typename Emit>
ContingencyTable accumulate(AttrSet attrs, std::vector<std::size_t> cards, std::size_t items,
                            Emit&& emit, const std::vector<std::uint64_t>* weights) {
    const std::size_t k = attrs.size();
    std::vector<Code> scratch(k);
    std::vector<Code> keys;
    std::vector<std::uint64_t> counts;
    auto weight = [&](std::size_t i) { return weights ? (*weights)[i] : std::uint64_t{1}; };

    if (k == 0) {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < items; ++i) total += weight(i);
        if (total > 0) counts.push_back(total);
        return ContingencyTable(std::move(attrs), std::move(cards), std::move(keys), std::move(counts));
    }

    auto unpack = [&](std::uint64_t packed) {
        const std::size_t base = keys.size();
        keys.resize(base + k);
        for (std::size_t j = k; j-- > 0;) {
            const std::uint64_t radix = std::max<std::uint64_t>(cards[j], 1);
            keys[base + j] = static_cast<Code>(packed % radix);
            packed /= radix;
        }
    };
    auto pack = [&]() {
        std::uint64_t p = 0;
        for (std::size_t j = 0; j < k; ++j) p = p * cards[j] + scratch[j];
        return p;
    };

    const auto product = radix_product(cards);
    if (product && *product <= kDenseLimit && *product <= 8 * items + 1024) {
        std::vector<std::uint64_t> dense(*product, 0);
        for (std::size_t i = 0; i < items; ++i) {
            emit(i, scratch);
            dense[pack()] += weight(i);
        }
        for (std::uint64_t p = 0; p < *product; ++p) {
            if (dense[p] == 0) continue;
            unpack(p);
            counts.push_back(dense[p]);
        }
    } else if (product) {
        std::unordered_map<std::uint64_t, std::uint64_t> sparse;
        sparse.reserve(std::min<std::size_t>(items, 1 << 16));
        for (std::size_t i = 0; i < items; ++i) {
            emit(i, scratch);
            sparse[pack()] += weight(i);
        }
        std::vector<std::pair<std::uint64_t, std::uint64_t>> cells(sparse.begin(), sparse.end());
        std::sort(cells.begin(), cells.end());
        for (const auto& [p, c] : cells) {
            if (c == 0) continue;
            unpack(p);
            counts.push_back(c);
        }
    } else {
        std::map<std::vector<Code>, std::uint64_t> tree;
        for (std::size_t i = 0; i < items; ++i) {
            emit(i, scratch);
            tree[scratch] += weight(i);
        }
        for (const auto& [key, c] : tree) {
            if (c == 0) continue;
            keys.insert(keys.end(), key.begin(), key.end());
            counts.push_back(c);
        }
    }
    return ContingencyTable(std::move(attrs), std::move(cards), std::move(keys), std::move(counts));
}

}  // namespace

ContingencyTable::ContingencyTable(AttrSet attrs, std::vector<std::size_t> cardinalities,
                                   std::vector<Code> keys, std::vector<std::uint64_t> counts)
    : attrs_(std::move(attrs)),
      cards_(std::move(cardinalities)),
      keys_(std::move(keys)),
      counts_(std::move(counts)) {
    total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ContingencyTable::lookup(std::span<const Code> codes) const {
    if (codes.size() != attrs_.size()) throw UsageError("lookup: tuple arity mismatch");
    std::size_t lo = 0, hi = counts_.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        auto k = key(mid);
        if (std::lexicographical_compare(k.begin(), k.end(), codes.begin(), codes.end())) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo < counts_.size() && std::equal(codes.begin(), codes.end(), key(lo).begin())) return counts_[lo];
    return 0;
}

std::size_t ContingencyTable::position(AttrId a) const {
    auto it = std::find(attrs_.begin(), attrs_.end(), a);
    if (it == attrs_.end()) throw UsageError("attribute not in contingency table");
    return static_cast<std::size_t>(it - attrs_.begin());
}

std::vector<std::uint64_t> ContingencyTable::dense() const {
    if (attrs_.empty() || attrs_.size() > 2) throw UsageError("dense(): only 1- and 2-way tables");
    const std::size_t cols = attrs_.size() == 2 ? cards_[1] : 1;
    std::vector<std::uint64_t> out(cards_[0] * cols, 0);
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        auto k = key(i);
        out[k[0] * cols + (attrs_.size() == 2 ? k[1] : 0)] = counts_[i];
    }
    return out;
}

ContingencyTable contingency(const Dataset& ds, const Selection& sel, const AttrSet& attrs) {
    std::vector<std::size_t> cards;
    std::vector<const std::vector<Code>*> cols;
    for (AttrId a : attrs) {
        cards.push_back(ds.column(a).cardinality());
        cols.push_back(&ds.column(a).codes());
    }
    const auto& rows = sel.rows();
    return accumulate(
        attrs, std::move(cards), rows.size(),
        [&](std::size_t i, std::vector<Code>& out) {
            const auto r = rows[i];
            for (std::size_t j = 0; j < cols.size(); ++j) out[j] = (*cols[j])[r];
        },
        nullptr);
}

ContingencyTable marginalize(const ContingencyTable& ct, const AttrSet& keep) {
    std::vector<std::size_t> positions;
    std::vector<std::size_t> cards;
    for (AttrId a : keep) {
        positions.push_back(ct.position(a));
        cards.push_back(ct.cardinalities()[positions.back()]);
    }
    return accumulate(
        keep, std::move(cards), ct.cell_count(),
        [&](std::size_t i, std::vector<Code>& out) {
            auto k = ct.key(i);
            for (std::size_t j = 0; j < positions.size(); ++j) out[j] = k[positions[j]];
        },
        &ct.counts());
}

}  // namespace causalq
