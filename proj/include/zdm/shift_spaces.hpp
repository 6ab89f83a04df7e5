#pragma once

// Finite-alphabet symbolic core: alphabets, words, array windows, rectangle
// patterns, subshifts with cached languages, empirical frequency tables and
// the cylinder-indicator distance between them.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace zdm {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

/// Cell value for array positions that carry no symbol (unfilled rows of a
/// finite window). Never a valid alphabet index.
inline constexpr Symbol kUnfilled = 0xFF;

class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> symbols);

    static Alphabet binary() { return Alphabet({"0", "1"}); }

    std::size_t size() const noexcept { return symbols_.size(); }
    const std::string& symbol(Symbol s) const;
    const std::vector<std::string>& symbols() const noexcept { return symbols_; }
    std::optional<Symbol> index_of(std::string_view name) const;

    /// Words are written as plain strings when every symbol is one character
    /// long, otherwise as comma-separated symbol names.
    Word parse(std::string_view text) const;
    std::string render(std::span<const Symbol> word) const;

    bool operator==(const Alphabet&) const = default;

private:
    std::vector<std::string> symbols_;
    bool single_char_ = true;
};

struct ArraySchema {
    std::vector<Alphabet> rows;

    ArraySchema() = default;
    explicit ArraySchema(std::vector<Alphabet> row_alphabets);
    static ArraySchema uniform(const Alphabet& alphabet, std::size_t depth);

    std::size_t depth() const noexcept { return rows.size(); }
    bool operator==(const ArraySchema&) const = default;
};

struct Shape {
    std::size_t rows = 1;     // k
    std::size_t cols = 1;     // n

    static Shape parse(std::string_view text);  // "1x2"
    std::string to_string() const;
    auto operator<=>(const Shape&) const = default;
};

std::vector<Shape> parse_shapes(std::string_view csv);

/// A finite piece of an array x = (x_{k,n}) over columns
/// [first_col, first_col + cols). Row 0 is the top row (vertical index 1).
class ArrayWindow {
public:
    ArrayWindow() = default;
    ArrayWindow(ArraySchema schema, std::int64_t first_col, std::size_t cols,
                Symbol fill = kUnfilled);
    ArrayWindow(ArraySchema schema, std::int64_t first_col, const std::vector<Word>& rows);

    static ArrayWindow single_row(const Alphabet& alphabet, const Word& row,
                                  std::int64_t first_col = 0);

    const ArraySchema& schema() const noexcept { return schema_; }
    std::size_t depth() const noexcept { return schema_.depth(); }
    std::size_t cols() const noexcept { return cols_; }
    std::int64_t first_col() const noexcept { return first_col_; }
    std::int64_t end_col() const noexcept { return first_col_ + static_cast<std::int64_t>(cols_); }

    Symbol at(std::size_t row, std::size_t offset) const { return cells_[row * cols_ + offset]; }
    Symbol at_col(std::size_t row, std::int64_t col) const { return at(row, offset_of(col)); }
    void set(std::size_t row, std::size_t offset, Symbol value);
    std::span<const Symbol> row(std::size_t r) const {
        return {cells_.data() + r * cols_, cols_};
    }

    std::size_t offset_of(std::int64_t col) const;

    /// Columns [begin, end) in absolute coordinates.
    ArrayWindow slice(std::int64_t begin, std::int64_t end) const;
    /// Rows [begin, end).
    ArrayWindow rows_slice(std::size_t begin, std::size_t end) const;
    /// The window of sigma^n(x): same cells, first column moved left by n.
    ArrayWindow shifted(std::int64_t n) const;

    bool fully_filled() const;
    std::size_t unfilled_count() const;

    bool operator==(const ArrayWindow&) const = default;

private:
    ArraySchema schema_;
    std::int64_t first_col_ = 0;
    std::size_t cols_ = 0;
    std::vector<Symbol> cells_;
};

/// A (k x n)-rectangle a_{[1,k] x [0,n-1]}, cells row-major.
struct RectanglePattern {
    Shape shape;
    std::vector<Symbol> cells;

    auto operator<=>(const RectanglePattern&) const = default;
};

/// True when the k x n subgrid of `x` whose top-left corner is at row 0 and
/// column offset `offset` equals `pattern` (membership of sigma^j(x) in the
/// cylinder [a]).
bool matches(const ArrayWindow& x, std::size_t offset, const RectanglePattern& pattern);

std::string render_pattern(const ArraySchema& schema, const RectanglePattern& pattern);

class Subshift {
public:
    enum class Kind { Sft, Substitution };

    static Subshift sft(Alphabet alphabet, std::vector<Word> forbidden);
    static Subshift substitution(Alphabet alphabet, std::vector<Word> images);
    static Subshift from_json(const nlohmann::json& spec);
    static Subshift load(const std::filesystem::path& path);

    /// Well-known systems used across tests and the desk suite.
    static Subshift fibonacci();
    static Subshift thue_morse();
    static Subshift full_shift(std::size_t symbols = 2);

    const Alphabet& alphabet() const noexcept { return alphabet_; }
    Kind kind() const noexcept { return kind_; }
    const std::vector<Word>& forbidden() const noexcept { return rules_; }
    const std::vector<Word>& images() const noexcept { return rules_; }

    /// Sorted admissible words of length `length`; cached. Throws
    /// EmptyLanguage when no word of that length is admissible.
    const std::vector<Word>& language(std::size_t length) const;
    bool admissible(std::span<const Symbol> word) const;
    /// Index of `word` in language(word.size()), if admissible.
    std::optional<std::size_t> word_index(std::span<const Symbol> word) const;

    /// sigma^m(seed) for the smallest m giving at least `min_length` letters.
    Word iterate(Symbol seed, std::size_t min_length) const;
    Word apply(std::span<const Symbol> word) const;

    nlohmann::json to_json() const;

private:
    struct Cache;

    Subshift(Alphabet alphabet, Kind kind, std::vector<Word> rules);

    std::vector<Word> compute_language(std::size_t length) const;
    std::vector<Word> compute_sft_language(std::size_t length) const;
    std::vector<Word> compute_substitution_language(std::size_t length) const;

    Alphabet alphabet_;
    Kind kind_;
    std::vector<Word> rules_;
    std::shared_ptr<Cache> cache_;
};

/// The language of a subshift as a set: alias kept for the operation name.
const std::vector<Word>& enumerate_language(const Subshift& s, std::size_t length);

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

struct Frequency {
    double value = 0.0;
    std::optional<Rational> exact;
};

/// Windows up to this many columns keep exact counts next to the float value.
inline constexpr std::size_t kExactFrequencyLimit = 1'000'000;

class FrequencyTable {
public:
    enum class Provenance { Empirical, Exact };

    FrequencyTable(ArraySchema schema, std::vector<Shape> shapes, Provenance provenance,
                   std::size_t window_length = 0);

    const ArraySchema& schema() const noexcept { return schema_; }
    const std::vector<Shape>& shapes() const noexcept { return shapes_; }
    Provenance provenance() const noexcept { return provenance_; }
    std::size_t window_length() const noexcept { return window_length_; }

    /// Patterns with nonzero frequency for shape `i`, in canonical order.
    const std::map<std::vector<Symbol>, Frequency>& entries(std::size_t shape_index) const {
        return entries_.at(shape_index);
    }
    double frequency(std::size_t shape_index, const std::vector<Symbol>& cells) const;
    void set(std::size_t shape_index, std::vector<Symbol> cells, Frequency f);

    /// Sums per shape within 1e-9 and every value in [0, 1].
    bool is_consistent(double tolerance = 1e-9) const;

    /// CSV with columns shape_k, shape_n, pattern, frequency.
    std::string to_csv() const;

private:
    ArraySchema schema_;
    std::vector<Shape> shapes_;
    std::vector<std::map<std::vector<Symbol>, Frequency>> entries_;
    Provenance provenance_;
    std::size_t window_length_;
};

/// Empirical frequencies of top-anchored k x n rectangles over all column
/// placements of `x`.
FrequencyTable frequency_table(const ArrayWindow& x, std::span<const Shape> shapes);

/// Sum over the canonical pattern enumeration R_1, R_2, ... (shapes in the
/// table's order, patterns lexicographic row-major over the full product of
/// row alphabets) of 2^-m |a(R_m) - b(R_m)|.
double measure_distance(const FrequencyTable& a, const FrequencyTable& b);

/// Letter frequencies of a primitive substitution (Perron eigenvector).
std::vector<double> substitution_letter_frequencies(const Subshift& s);

/// Exact word frequencies of a primitive substitution for every shape; a
/// k-row shape is read as k identical stacked copies of the sequence, so
/// patterns with unequal rows have frequency zero.
FrequencyTable substitution_frequency_table(const Subshift& s, std::span<const Shape> shapes);

}  // namespace zdm
