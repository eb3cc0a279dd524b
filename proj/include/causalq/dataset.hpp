#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace causalq {

/// Index of a column within a Dataset.
using AttrId = std::size_t;
/// Ordered list of attributes. Most operations treat it as a set.
using AttrSet = std::vector<AttrId>;
/// Dense dictionary code of a categorical value.
using Code = std::uint32_t;

/// Category assigned to empty / missing cells.
inline constexpr std::string_view kMissing = "⟂";

/// A dictionary-encoded categorical column.
class Column {
public:
    Column(std::string name, std::vector<std::string> dictionary, std::vector<Code> codes);

    const std::string& name() const { return name_; }
    std::size_t size() const { return codes_.size(); }
    std::size_t cardinality() const { return dictionary_.size(); }
    Code code(std::size_t row) const { return codes_[row]; }
    const std::vector<Code>& codes() const { return codes_; }
    const std::string& decode(Code c) const { return dictionary_.at(c); }
    std::optional<Code> encode(std::string_view value) const;
    const std::vector<std::string>& dictionary() const { return dictionary_; }

    /// True iff the observed domain is a subset of {"0","1"}.
    bool is_binary_outcome() const;

private:
    std::string name_;
    std::vector<std::string> dictionary_;
    std::unordered_map<std::string, Code> index_;
    std::vector<Code> codes_;
};

struct CsvOptions {
    char delimiter = ',';
};

/// Immutable columnar table of categorical attributes.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<Column> columns);

    /// Builds a dataset from raw string cells, one vector per column.
    static Dataset from_strings(const std::vector<std::string>& names,
                                const std::vector<std::vector<std::string>>& cells);
    /// Same, one vector per row.
    static Dataset from_rows(const std::vector<std::string>& names,
                             const std::vector<std::vector<std::string>>& rows);

    std::size_t row_count() const { return rows_; }
    std::size_t column_count() const { return columns_.size(); }
    const Column& column(AttrId a) const { return columns_.at(a); }
    const std::vector<Column>& columns() const { return columns_; }
    const std::string& name(AttrId a) const { return columns_.at(a).name(); }

    std::optional<AttrId> find(std::string_view name) const;
    /// Like find(), but throws UsageError for unknown names.
    AttrId attr(std::string_view name) const;
    AttrSet attrs(const std::vector<std::string>& names) const;
    std::vector<std::string> names(const AttrSet& attrs) const;

    void write_csv(std::ostream& out, const CsvOptions& options = {}) const;

private:
    std::vector<Column> columns_;
    std::unordered_map<std::string, AttrId> by_name_;
    std::size_t rows_ = 0;
};

Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(std::istream& in, const CsvOptions& options = {});

}  // namespace causalq
