#include "causalq/dataset.hpp"

#include "causalq/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>

namespace causalq {

namespace {

bool parse_integer(const std::string& s, long long& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// Integers sort numerically, everything else lexicographically, missing last.
std::vector<std::string> ordered_dictionary(const std::vector<std::string>& cells) {
    std::set<std::string> distinct(cells.begin(), cells.end());
    const bool has_missing = distinct.erase(std::string(kMissing)) > 0;
    std::vector<std::string> dict(distinct.begin(), distinct.end());
    const bool numeric = std::all_of(dict.begin(), dict.end(), [](const std::string& s) {
        long long v = 0;
        return parse_integer(s, v);
    });
    if (numeric) {
        std::sort(dict.begin(), dict.end(), [](const std::string& a, const std::string& b) {
            long long x = 0, y = 0;
            parse_integer(a, x);
            parse_integer(b, y);
            return x < y;
        });
    }
    if (has_missing) dict.emplace_back(kMissing);
    return dict;
}

Column encode_column(std::string name, const std::vector<std::string>& cells) {
    auto dict = ordered_dictionary(cells);
    std::unordered_map<std::string, Code> index;
    for (Code c = 0; c < dict.size(); ++c) index.emplace(dict[c], c);
    std::vector<Code> codes;
    codes.reserve(cells.size());
    for (const auto& cell : cells) codes.push_back(index.at(cell));
    return Column(std::move(name), std::move(dict), std::move(codes));
}

// Reads one RFC-4180 record. Returns false at end of input.
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields) {
    fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (;;) {
        const int ch = in.get();
        if (ch == std::char_traits<char>::eof()) {
            if (quoted) throw InputError("csv: unterminated quoted field");
            fields.push_back(std::move(field));
            return true;
        }
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == delim) {
            fields.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
}

bool needs_quoting(const std::string& s, char delim) {
    return s.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos;
}

}  // namespace

Column::Column(std::string name, std::vector<std::string> dictionary, std::vector<Code> codes)
    : name_(std::move(name)), dictionary_(std::move(dictionary)), codes_(std::move(codes)) {
    for (Code c = 0; c < dictionary_.size(); ++c) {
        if (!index_.emplace(dictionary_[c], c).second) {
            throw UsageError("column '" + name_ + "': duplicate dictionary value '" + dictionary_[c] + "'");
        }
    }
    for (Code c : codes_) {
        if (c >= dictionary_.size()) {
            throw UsageError("column '" + name_ + "': code out of dictionary range");
        }
    }
}

std::optional<Code> Column::encode(std::string_view value) const {
    auto it = index_.find(std::string(value));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool Column::is_binary_outcome() const {
    std::vector<bool> seen(dictionary_.size(), false);
    for (Code c : codes_) seen[c] = true;
    for (Code c = 0; c < dictionary_.size(); ++c) {
        if (seen[c] && dictionary_[c] != "0" && dictionary_[c] != "1") return false;
    }
    return true;
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
    rows_ = columns_.empty() ? 0 : columns_.front().size();
    for (AttrId a = 0; a < columns_.size(); ++a) {
        if (columns_[a].size() != rows_) {
            throw InputError("column '" + columns_[a].name() + "' has " +
                             std::to_string(columns_[a].size()) + " rows, expected " +
                             std::to_string(rows_));
        }
        if (!by_name_.emplace(columns_[a].name(), a).second) {
            throw InputError("duplicate column name '" + columns_[a].name() + "'");
        }
    }
}

Dataset Dataset::from_strings(const std::vector<std::string>& names,
                              const std::vector<std::vector<std::string>>& cells) {
    if (names.size() != cells.size()) throw UsageError("from_strings: names/columns size mismatch");
    std::vector<Column> columns;
    columns.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::vector<std::string> values = cells[i];
        for (auto& v : values) {
            if (v.empty()) v = std::string(kMissing);
        }
        columns.push_back(encode_column(names[i], values));
    }
    return Dataset(std::move(columns));
}

Dataset Dataset::from_rows(const std::vector<std::string>& names,
                           const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::vector<std::string>> cells(names.size());
    for (auto& c : cells) c.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != names.size())
            throw UsageError("from_rows: row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                             " cells, expected " + std::to_string(names.size()));
        for (std::size_t i = 0; i < names.size(); ++i) cells[i].push_back(rows[r][i]);
    }
    return from_strings(names, cells);
}

std::optional<AttrId> Dataset::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

AttrId Dataset::attr(std::string_view name) const {
    auto a = find(name);
    if (!a) throw UsageError("unknown attribute '" + std::string(name) + "'");
    return *a;
}

AttrSet Dataset::attrs(const std::vector<std::string>& names) const {
    AttrSet out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(attr(n));
    return out;
}

std::vector<std::string> Dataset::names(const AttrSet& attrs) const {
    std::vector<std::string> out;
    out.reserve(attrs.size());
    for (AttrId a : attrs) out.push_back(name(a));
    return out;
}

void Dataset::write_csv(std::ostream& out, const CsvOptions& options) const {
    auto emit = [&](const std::string& s) {
        if (s == kMissing) return;
        if (!needs_quoting(s, options.delimiter)) {
            out << s;
            return;
        }
        out << '"';
        for (char c : s) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    };
    for (AttrId a = 0; a < columns_.size(); ++a) {
        if (a) out << options.delimiter;
        emit(columns_[a].name());
    }
    out << '\n';
    for (std::size_t r = 0; r < rows_; ++r) {
        for (AttrId a = 0; a < columns_.size(); ++a) {
            if (a) out << options.delimiter;
            const auto& col = columns_[a];
            emit(col.decode(col.code(r)));
        }
        out << '\n';
    }
}

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
    std::vector<std::string> header;
    if (!read_record(in, options.delimiter, header)) throw InputError("csv: missing header row");
    std::vector<std::vector<std::string>> cells(header.size());
    std::vector<std::string> record;
    std::size_t line = 1;
    while (read_record(in, options.delimiter, record)) {
        ++line;
        if (record.size() == 1 && record.front().empty() && header.size() != 1) continue;
        if (record.size() != header.size()) {
            throw InputError("csv: record " + std::to_string(line) + " has " +
                             std::to_string(record.size()) + " fields, header has " +
                             std::to_string(header.size()));
        }
        for (std::size_t i = 0; i < record.size(); ++i) cells[i].push_back(std::move(record[i]));
    }
    return Dataset::from_strings(header, cells);
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    return parse_csv(in, options);
}

}  // namespace causalq
