#pragma once

#include "causalq/count_cache.hpp"

#include <map>
#include <optional>
#include <shared_mutex>
#include <tuple>

namespace causalq {

/// Entropy estimator. Values are always in nats.
enum class Estimator { miller_madow, plugin };

/// -sum F ln F over nonempty cells.
double entropy_plugin(const ContingencyTable& ct);

/// Plug-in entropy plus the (m-1)/(2n) bias correction, m = nonempty cells.
/// Throws UsageError on an empty table.
double entropy_mm(const ContingencyTable& ct);

double entropy(const ContingencyTable& ct, Estimator est);

/// Memo of entropies keyed by (sorted attribute set, selection fingerprint, estimator).
class EntropyCache {
public:
    std::optional<double> get(const AttrSet& sorted_attrs, std::uint64_t fingerprint, Estimator est) const;
    void put(const AttrSet& sorted_attrs, std::uint64_t fingerprint, Estimator est, double value);
    std::size_t size() const;

private:
    using Key = std::tuple<AttrSet, std::uint64_t, int>;
    mutable std::shared_mutex mutex_;
    std::map<Key, double> values_;
};

/// Entropy of the joint of `attrs` on the cache's selection. H(empty set) = 0.
double entropy(const CountCache& counts, AttrSet attrs, Estimator est, EntropyCache* cache = nullptr);

struct MiEstimate {
    double value = 0.0;  // clamped at 0
    double raw = 0.0;    // before clamping
    double h_xz = 0.0;
    double h_yz = 0.0;
    double h_xyz = 0.0;
    double h_z = 0.0;
};

/// I(X;Y|Z) = H(XZ) + H(YZ) - H(XYZ) - H(Z). Z empty gives plain mutual information.
MiEstimate cmi(const CountCache& counts, const AttrSet& x, const AttrSet& y, const AttrSet& z,
               Estimator est = Estimator::miller_madow, EntropyCache* cache = nullptr);

/// Signed contribution of cell (x, y) of a two-way table to its plug-in mutual information.
double kappa(const ContingencyTable& ct2, Code x, Code y);

/// Plug-in mutual information of a two-way table, the sum of kappa over its cells.
double mutual_information_plugin(const ContingencyTable& ct2);

}  // namespace causalq
