#include "causalq/info.hpp"

#include "causalq/error.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace causalq {

namespace {

AttrSet canonical(AttrSet attrs) {
    std::sort(attrs.begin(), attrs.end());
    attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
    return attrs;
}

AttrSet join(const AttrSet& a, const AttrSet& b) {
    AttrSet out = a;
    out.insert(out.end(), b.begin(), b.end());
    return canonical(std::move(out));
}

}  // namespace

double entropy_plugin(const ContingencyTable& ct) {
    const double n = static_cast<double>(ct.total());
    if (ct.total() == 0) throw UsageError("entropy of an empty table is undefined");
    double h = 0.0;
    for (auto c : ct.counts()) {
        const double f = static_cast<double>(c) / n;
        h -= f * std::log(f);
    }
    return h;
}

double entropy_mm(const ContingencyTable& ct) {
    const double plug = entropy_plugin(ct);
    const double m = static_cast<double>(ct.cell_count());
    return plug + (m - 1.0) / (2.0 * static_cast<double>(ct.total()));
}

double entropy(const ContingencyTable& ct, Estimator est) {
    return est == Estimator::plugin ? entropy_plugin(ct) : entropy_mm(ct);
}

std::optional<double> EntropyCache::get(const AttrSet& sorted_attrs, std::uint64_t fingerprint,
                                        Estimator est) const {
    std::shared_lock lock(mutex_);
    auto it = values_.find(Key{sorted_attrs, fingerprint, static_cast<int>(est)});
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

void EntropyCache::put(const AttrSet& sorted_attrs, std::uint64_t fingerprint, Estimator est, double value) {
    std::unique_lock lock(mutex_);
    values_.emplace(Key{sorted_attrs, fingerprint, static_cast<int>(est)}, value);
}

std::size_t EntropyCache::size() const {
    std::shared_lock lock(mutex_);
    return values_.size();
}

double entropy(const CountCache& counts, AttrSet attrs, Estimator est, EntropyCache* cache) {
    attrs = canonical(std::move(attrs));
    if (attrs.empty()) {
        if (counts.selection().empty()) throw UsageError("entropy over an empty selection");
        return 0.0;
    }
    const auto fp = counts.selection().fingerprint();
    if (cache) {
        if (auto hit = cache->get(attrs, fp, est)) return *hit;
    }
    const double h = entropy(*counts.table(attrs), est);
    if (cache) cache->put(attrs, fp, est, h);
    return h;
}

MiEstimate cmi(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
               Estimator est, EntropyCache* cache) {
    if (x.empty() || y.empty()) throw UsageError("cmi: X and Y must be nonempty");
    if (counts.selection().empty()) throw UsageError("cmi: empty selection");
    MiEstimate out;
    out.h_xz = entropy(counts, join(x, z), est, cache);
    out.h_yz = entropy(counts, join(y, z), est, cache);
    out.h_xyz = entropy(counts, join(join(x, y), z), est, cache);
    out.h_z = entropy(counts, canonical(z), est, cache);
    out.raw = out.h_xz + out.h_yz - out.h_xyz - out.h_z;
    out.value = std::max(0.0, out.raw);
    return out;
}

double kappa(const ContingencyTable& ct2, Code x, Code y) {
    if (ct2.arity() != 2) throw UsageError("kappa: table must be two-way");
    const Code key[2] = {x, y};
    const auto nxy = ct2.lookup(key);
    if (nxy == 0) return 0.0;
    std::uint64_t nx = 0, ny = 0;
    for (std::size_t i = 0; i < ct2.cell_count(); ++i) {
        auto k = ct2.key(i);
        if (k[0] == x) nx += ct2.count(i);
        if (k[1] == y) ny += ct2.count(i);
    }
    const double n = static_cast<double>(ct2.total());
    const double pxy = static_cast<double>(nxy) / n;
    const double px = static_cast<double>(nx) / n;
    const double py = static_cast<double>(ny) / n;
    return pxy * std::log(pxy / (px * py));
}

double mutual_information_plugin(const ContingencyTable& ct2) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ct2.cell_count(); ++i) {
        auto k = ct2.key(i);
        sum += kappa(ct2, k[0], k[1]);
    }
    return sum;
}

}  // namespace causalq
