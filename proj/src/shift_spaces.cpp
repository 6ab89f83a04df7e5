#include "zdm/shift_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include "zdm/error.hpp"

namespace zdm {

// ---------------------------------------------------------------------------
// Alphabet

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "alphabet needs at least two symbols");
    }
    if (symbols_.size() >= kUnfilled) {
        throw Error(ErrorKind::InvalidArgument, "alphabet too large");
    }
    std::set<std::string> seen;
    for (const auto& s : symbols_) {
        if (s.empty()) {
            throw Error(ErrorKind::InvalidArgument, "empty symbol name");
        }
        if (!seen.insert(s).second) {
            throw Error(ErrorKind::InvalidArgument, "duplicate symbol '" + s + "'");
        }
        single_char_ = single_char_ && s.size() == 1;
    }
}

const std::string& Alphabet::symbol(Symbol s) const {
    if (s >= symbols_.size()) {
        throw Error(ErrorKind::InvalidArgument, "symbol index out of range");
    }
    return symbols_[s];
}

std::optional<Symbol> Alphabet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (symbols_[i] == name) {
            return static_cast<Symbol>(i);
        }
    }
    return std::nullopt;
}

Word Alphabet::parse(std::string_view text) const {
    Word out;
    auto push = [&](std::string_view name) {
        auto idx = index_of(name);
        if (!idx) {
            throw Error(ErrorKind::ParseError, "unknown symbol '" + std::string(name) + "'");
        }
        out.push_back(*idx);
    };
    if (single_char_) {
        for (char c : text) {
            push(std::string_view(&c, 1));
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size() && !text.empty()) {
        auto next = text.find(',', pos);
        auto token = text.substr(pos, next == std::string_view::npos ? text.npos : next - pos);
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        push(token);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string Alphabet::render(std::span<const Symbol> word) const {
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (!single_char_ && i > 0) out += ',';
        out += word[i] == kUnfilled ? std::string("?") : symbol(word[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schema, shapes, windows

ArraySchema::ArraySchema(std::vector<Alphabet> row_alphabets) : rows(std::move(row_alphabets)) {
    if (rows.empty()) {
        throw Error(ErrorKind::InvalidArgument, "array schema needs at least one row");
    }
}

ArraySchema ArraySchema::uniform(const Alphabet& alphabet, std::size_t depth) {
    return ArraySchema(std::vector<Alphabet>(depth, alphabet));
}

Shape Shape::parse(std::string_view text) {
    auto x = text.find('x');
    if (x == std::string_view::npos) {
        throw Error(ErrorKind::ParseError, "shape must look like KxN: " + std::string(text));
    }
    Shape s;
    try {
        s.rows = std::stoul(std::string(text.substr(0, x)));
        s.cols = std::stoul(std::string(text.substr(x + 1)));
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "bad shape: " + std::string(text));
    }
    if (s.rows == 0 || s.cols == 0) {
        throw Error(ErrorKind::ParseError, "shape dimensions must be positive");
    }
    return s;
}

std::string Shape::to_string() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

std::vector<Shape> parse_shapes(std::string_view csv) {
    std::vector<Shape> shapes;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        auto next = csv.find(',', pos);
        if (next == std::string_view::npos) next = csv.size();
        if (next > pos) shapes.push_back(Shape::parse(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return shapes;
}

ArrayWindow::ArrayWindow(ArraySchema schema, std::int64_t first_col, std::size_t cols, Symbol fill)
    : schema_(std::move(schema)), first_col_(first_col), cols_(cols),
      cells_(schema_.depth() * cols, fill) {}

ArrayWindow::ArrayWindow(ArraySchema schema, std::int64_t first_col, const std::vector<Word>& rows)
    : schema_(std::move(schema)), first_col_(first_col) {
    if (rows.size() != schema_.depth()) {
        throw Error(ErrorKind::InvalidArgument, "row count does not match schema depth");
    }
    cols_ = rows.front().size();
    cells_.reserve(rows.size() * cols_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols_) {
            throw Error(ErrorKind::InvalidArgument, "ragged rows");
        }
        for (Symbol s : rows[r]) {
            if (s != kUnfilled && s >= schema_.rows[r].size()) {
                throw Error(ErrorKind::InvalidArgument, "cell outside its row alphabet");
            }
            cells_.push_back(s);
        }
    }
}

ArrayWindow ArrayWindow::single_row(const Alphabet& alphabet, const Word& row,
                                    std::int64_t first_col) {
    return ArrayWindow(ArraySchema({alphabet}), first_col, std::vector<Word>{row});
}

void ArrayWindow::set(std::size_t row, std::size_t offset, Symbol value) {
    if (value != kUnfilled && value >= schema_.rows[row].size()) {
        throw Error(ErrorKind::InvalidArgument, "cell outside its row alphabet");
    }
    cells_[row * cols_ + offset] = value;
}

std::size_t ArrayWindow::offset_of(std::int64_t col) const {
    if (col < first_col_ || col >= end_col()) {
        throw Error(ErrorKind::InvalidArgument,
                    "column " + std::to_string(col) + " outside window");
    }
    return static_cast<std::size_t>(col - first_col_);
}

ArrayWindow ArrayWindow::slice(std::int64_t begin, std::int64_t end) const {
    if (begin < first_col_ || end > end_col() || begin > end) {
        throw Error(ErrorKind::InvalidArgument, "slice outside window");
    }
    ArrayWindow out(schema_, begin, static_cast<std::size_t>(end - begin));
    const auto skip = static_cast<std::size_t>(begin - first_col_);
    for (std::size_t r = 0; r < depth(); ++r) {
        std::copy_n(cells_.begin() + static_cast<std::ptrdiff_t>(r * cols_ + skip), out.cols_,
                    out.cells_.begin() + static_cast<std::ptrdiff_t>(r * out.cols_));
    }
    return out;
}

ArrayWindow ArrayWindow::rows_slice(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > depth()) {
        throw Error(ErrorKind::InvalidArgument, "row slice outside window");
    }
    ArrayWindow out(ArraySchema(std::vector<Alphabet>(schema_.rows.begin() + begin,
                                                      schema_.rows.begin() + end)),
                    first_col_, cols_);
    std::copy(cells_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
              cells_.begin() + static_cast<std::ptrdiff_t>(end * cols_), out.cells_.begin());
    return out;
}

ArrayWindow ArrayWindow::shifted(std::int64_t n) const {
    ArrayWindow out = *this;
    out.first_col_ -= n;
    return out;
}

bool ArrayWindow::fully_filled() const { return unfilled_count() == 0; }

std::size_t ArrayWindow::unfilled_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), kUnfilled));
}

bool matches(const ArrayWindow& x, std::size_t offset, const RectanglePattern& pattern) {
    const auto [k, n] = pattern.shape;
    if (k > x.depth() || offset + n > x.cols()) return false;
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            if (x.at(r, offset + c) != pattern.cells[r * n + c]) return false;
        }
    }
    return true;
}

std::string render_pattern(const ArraySchema& schema, const RectanglePattern& pattern) {
    std::string out;
    const auto [k, n] = pattern.shape;
    for (std::size_t r = 0; r < k; ++r) {
        if (r > 0) out += '|';
        out += schema.rows.at(r).render(
            std::span<const Symbol>(pattern.cells.data() + r * n, n));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subshifts

struct Subshift::Cache {
    std::mutex mutex;
    std::map<std::size_t, std::vector<Word>> languages;
    std::set<Word> two_words;  // substitution only
    bool two_words_ready = false;
};

namespace {

bool contains(std::span<const Symbol> word, const Word& pattern) {
    if (pattern.size() > word.size()) return false;
    return std::search(word.begin(), word.end(), pattern.begin(), pattern.end()) != word.end();
}

bool avoids_all(std::span<const Symbol> word, const std::vector<Word>& forbidden) {
    return std::none_of(forbidden.begin(), forbidden.end(),
                        [&](const Word& f) { return contains(word, f); });
}

void validate_word(const Alphabet& a, const Word& w, const char* what) {
    for (Symbol s : w) {
        if (s >= a.size()) {
            throw Error(ErrorKind::InvalidArgument, std::string(what) + " uses an invalid symbol");
        }
    }
}

// Substitution matrix M[a][b] = occurrences of a in sigma(b).
std::vector<std::vector<std::size_t>> substitution_matrix(const Alphabet& a,
                                                          const std::vector<Word>& images) {
    std::vector<std::vector<std::size_t>> m(a.size(), std::vector<std::size_t>(a.size(), 0));
    for (std::size_t b = 0; b < images.size(); ++b) {
        for (Symbol s : images[b]) ++m[s][b];
    }
    return m;
}

bool is_primitive(const std::vector<std::vector<std::size_t>>& m) {
    // Wielandt: a primitive d x d matrix has a positive power of exponent
    // at most (d-1)^2 + 1. Work with the boolean pattern.
    const std::size_t d = m.size();
    std::vector<std::vector<bool>> p(d, std::vector<bool>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) p[i][j] = m[i][j] > 0;
    auto power = p;
    const std::size_t bound = (d - 1) * (d - 1) + 1;
    for (std::size_t e = 1; e <= bound; ++e) {
        bool positive = true;
        for (const auto& row : power)
            for (bool v : row) positive = positive && v;
        if (positive) return true;
        std::vector<std::vector<bool>> next(d, std::vector<bool>(d, false));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k)
                if (power[i][k])
                    for (std::size_t j = 0; j < d; ++j)
                        if (p[k][j]) next[i][j] = true;
        power = std::move(next);
    }
    return false;
}

std::vector<double> perron_vector(const std::vector<std::vector<double>>& m) {
    const std::size_t d = m.size();
    std::vector<double> v(d, 1.0 / static_cast<double>(d));
    for (int iter = 0; iter < 200000; ++iter) {
        std::vector<double> next(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) next[i] += m[i][j] * v[j];
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double change = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            next[i] /= total;
            change = std::max(change, std::abs(next[i] - v[i]));
        }
        v = std::move(next);
        if (change < 1e-16) break;
    }
    return v;
}

}  // namespace

Subshift::Subshift(Alphabet alphabet, Kind kind, std::vector<Word> rules)
    : alphabet_(std::move(alphabet)), kind_(kind), rules_(std::move(rules)),
      cache_(std::make_shared<Cache>()) {}

Subshift Subshift::sft(Alphabet alphabet, std::vector<Word> forbidden) {
    for (const auto& w : forbidden) {
        if (w.empty()) throw Error(ErrorKind::InvalidArgument, "empty forbidden word");
        validate_word(alphabet, w, "forbidden word");
    }
    std::sort(forbidden.begin(), forbidden.end());
    forbidden.erase(std::unique(forbidden.begin(), forbidden.end()), forbidden.end());
    return Subshift(std::move(alphabet), Kind::Sft, std::move(forbidden));
}

Subshift Subshift::substitution(Alphabet alphabet, std::vector<Word> images) {
    if (images.size() != alphabet.size()) {
        throw Error(ErrorKind::InvalidArgument, "substitution needs one image per symbol");
    }
    for (const auto& w : images) {
        if (w.empty()) throw Error(ErrorKind::InvalidArgument, "erasing substitution");
        validate_word(alphabet, w, "substitution image");
    }
    if (!is_primitive(substitution_matrix(alphabet, images))) {
        throw Error(ErrorKind::InvalidArgument, "substitution is not primitive");
    }
    return Subshift(std::move(alphabet), Kind::Substitution, std::move(images));
}

Subshift Subshift::fibonacci() {
    return substitution(Alphabet::binary(), {{0, 1}, {0}});
}

Subshift Subshift::thue_morse() {
    return substitution(Alphabet::binary(), {{0, 1}, {1, 0}});
}

Subshift Subshift::full_shift(std::size_t symbols) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < symbols; ++i) names.push_back(std::to_string(i));
    return sft(Alphabet(std::move(names)), {});
}

Subshift Subshift::from_json(const nlohmann::json& spec) {
    try {
        std::vector<std::string> names = spec.at("alphabet").get<std::vector<std::string>>();
        Alphabet alphabet(std::move(names));
        auto read_word = [&](const nlohmann::json& j) -> Word {
            if (j.is_string()) return alphabet.parse(j.get<std::string>());
            Word w;
            for (const auto& s : j) {
                auto idx = alphabet.index_of(s.get<std::string>());
                if (!idx) throw Error(ErrorKind::ParseError, "unknown symbol in word");
                w.push_back(*idx);
            }
            return w;
        };
        const auto type = spec.at("type").get<std::string>();
        if (type == "sft") {
            std::vector<Word> forbidden;
            if (spec.contains("forbidden")) {
                for (const auto& f : spec.at("forbidden")) forbidden.push_back(read_word(f));
            }
            return sft(std::move(alphabet), std::move(forbidden));
        }
        if (type == "substitution") {
            std::vector<Word> images(alphabet.size());
            std::vector<bool> seen(alphabet.size(), false);
            for (const auto& [key, value] : spec.at("rules").items()) {
                auto idx = alphabet.index_of(key);
                if (!idx) throw Error(ErrorKind::ParseError, "rule for unknown symbol " + key);
                images[*idx] = read_word(value);
                seen[*idx] = true;
            }
            if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
                throw Error(ErrorKind::ParseError, "substitution rule missing for some symbol");
            }
            return substitution(std::move(alphabet), std::move(images));
        }
        throw Error(ErrorKind::ParseError, "unknown subshift type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

Subshift Subshift::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
}

nlohmann::json Subshift::to_json() const {
    nlohmann::json j;
    j["alphabet"] = alphabet_.symbols();
    if (kind_ == Kind::Sft) {
        j["type"] = "sft";
        j["forbidden"] = nlohmann::json::array();
        for (const auto& f : rules_) j["forbidden"].push_back(alphabet_.render(f));
    } else {
        j["type"] = "substitution";
        j["rules"] = nlohmann::json::object();
        for (std::size_t a = 0; a < rules_.size(); ++a) {
            j["rules"][alphabet_.symbol(static_cast<Symbol>(a))] = alphabet_.render(rules_[a]);
        }
    }
    return j;
}

const std::vector<Word>& Subshift::language(std::size_t length) const {
    if (length == 0) throw Error(ErrorKind::InvalidArgument, "word length must be >= 1");
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->languages.find(length);
    if (it == cache_->languages.end()) {
        auto words = compute_language(length);
        it = cache_->languages.emplace(length, std::move(words)).first;
    }
    if (it->second.empty()) {
        throw Error(ErrorKind::EmptyLanguage,
                    "no admissible word of length " + std::to_string(length));
    }
    return it->second;
}

const std::vector<Word>& enumerate_language(const Subshift& s, std::size_t length) {
    return s.language(length);
}

bool Subshift::admissible(std::span<const Symbol> word) const {
    return word_index(word).has_value();
}

std::optional<std::size_t> Subshift::word_index(std::span<const Symbol> word) const {
    if (word.empty()) return std::nullopt;
    const auto& lang = language(word.size());
    auto it = std::lower_bound(lang.begin(), lang.end(), word,
                               [](const Word& a, std::span<const Symbol> b) {
                                   return std::lexicographical_compare(a.begin(), a.end(),
                                                                       b.begin(), b.end());
                               });
    if (it != lang.end() && std::equal(it->begin(), it->end(), word.begin(), word.end())) {
        return static_cast<std::size_t>(it - lang.begin());
    }
    return std::nullopt;
}

Word Subshift::apply(std::span<const Symbol> word) const {
    if (kind_ != Kind::Substitution) {
        throw Error(ErrorKind::InvalidArgument, "apply() needs a substitution subshift");
    }
    Word out;
    for (Symbol s : word) {
        const auto& img = rules_.at(s);
        out.insert(out.end(), img.begin(), img.end());
    }
    return out;
}

Word Subshift::iterate(Symbol seed, std::size_t min_length) const {
    Word w{seed};
    for (int i = 0; w.size() < min_length; ++i) {
        if (i > 256) throw Error(ErrorKind::InvalidArgument, "substitution does not grow");
        w = apply(w);
    }
    return w;
}

std::vector<Word> Subshift::compute_language(std::size_t length) const {
    return kind_ == Kind::Sft ? compute_sft_language(length)
                              : compute_substitution_language(length);
}

// The SFT language is read off the essential part of the higher-block
// (de Bruijn) graph: states are locally admissible words of length s, edges
// locally admissible words of length s + 1, and states without a predecessor
// or a successor are pruned until stable. What remains is exactly the set of
// blocks that extend to bi-infinite points.
std::vector<Word> Subshift::compute_sft_language(std::size_t length) const {
    std::size_t longest = 0;
    for (const auto& f : rules_) longest = std::max(longest, f.size());
    const std::size_t s = std::max<std::size_t>(longest > 0 ? longest - 1 : 1, 1);
    const auto a = static_cast<Symbol>(alphabet_.size());

    std::vector<Word> states;
    Word cur;
    auto grow = [&](auto&& self) -> void {
        if (cur.size() == s) {
            states.push_back(cur);
            return;
        }
        for (Symbol c = 0; c < a; ++c) {
            cur.push_back(c);
            if (avoids_all(cur, rules_)) self(self);
            cur.pop_back();
        }
    };
    grow(grow);

    std::map<Word, std::size_t> id;
    for (std::size_t i = 0; i < states.size(); ++i) id.emplace(states[i], i);
    std::vector<std::vector<std::size_t>> succ(states.size()), pred(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        Word edge = states[i];
        edge.push_back(0);
        for (Symbol c = 0; c < a; ++c) {
            edge.back() = c;
            if (!avoids_all(edge, rules_)) continue;
            Word target(edge.begin() + 1, edge.end());
            auto it = id.find(target);
            if (it == id.end()) continue;
            succ[i].push_back(it->second);
            pred[it->second].push_back(i);
        }
    }
    std::vector<bool> alive(states.size(), true);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (!alive[i]) continue;
            auto live = [&](const std::vector<std::size_t>& v) {
                return std::any_of(v.begin(), v.end(), [&](std::size_t j) { return alive[j]; });
            };
            if (!live(succ[i]) || !live(pred[i])) {
                alive[i] = false;
                changed = true;
            }
        }
    }

    std::set<Word> words;
    if (length <= s) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (!alive[i]) continue;
            for (std::size_t p = 0; p + length <= s; ++p) {
                words.emplace(states[i].begin() + static_cast<std::ptrdiff_t>(p),
                              states[i].begin() + static_cast<std::ptrdiff_t>(p + length));
            }
        }
        return {words.begin(), words.end()};
    }
    std::vector<Word> out;
    Word path;
    auto walk = [&](auto&& self, std::size_t state) -> void {
        if (path.size() == length) {
            out.push_back(path);
            return;
        }
        for (std::size_t next : succ[state]) {
            if (!alive[next]) continue;
            path.push_back(states[next].back());
            self(self, next);
            path.pop_back();
        }
    };
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!alive[i]) continue;
        path = states[i];
        walk(walk, i);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Admissible 2-words are the fixed point of "2-subwords of sigma(ab)" started
// from the 2-subwords of the letter images: the set is stable across one
// substitution application. Longer words of length L are the L-subwords of
// sigma^k(ab) over admissible ab, with k chosen so every sigma^k(c) has at
// least L-1 letters; then each admissible L-word straddles at most two
// consecutive image blocks.
std::vector<Word> Subshift::compute_substitution_language(std::size_t length) const {
    const auto a = alphabet_.size();
    if (!cache_->two_words_ready) {
        std::set<Word> found;
        std::vector<Word> queue;
        auto add_subwords = [&](const Word& w) {
            for (std::size_t p = 0; p + 2 <= w.size(); ++p) {
                Word pair{w[p], w[p + 1]};
                if (found.insert(pair).second) queue.push_back(pair);
            }
        };
        for (const auto& img : rules_) add_subwords(img);
        while (!queue.empty()) {
            Word pair = queue.back();
            queue.pop_back();
            add_subwords(apply(pair));
        }
        cache_->two_words = std::move(found);
        cache_->two_words_ready = true;
    }
    std::set<Word> words;
    if (length == 1) {
        for (const auto& img : rules_)
            for (Symbol s : img) words.insert(Word{s});
        return {words.begin(), words.end()};
    }
    std::vector<Word> blocks(a);
    for (std::size_t c = 0; c < a; ++c) blocks[c] = Word{static_cast<Symbol>(c)};
    auto shortest = [&] {
        std::size_t m = blocks[0].size();
        for (const auto& b : blocks) m = std::min(m, b.size());
        return m;
    };
    while (shortest() < length - 1) {
        for (auto& b : blocks) b = apply(b);
    }
    for (const auto& pair : cache_->two_words) {
        Word w = blocks[pair[0]];
        w.insert(w.end(), blocks[pair[1]].begin(), blocks[pair[1]].end());
        for (std::size_t p = 0; p + length <= w.size(); ++p) {
            words.emplace(w.begin() + static_cast<std::ptrdiff_t>(p),
                          w.begin() + static_cast<std::ptrdiff_t>(p + length));
        }
    }
    return {words.begin(), words.end()};
}

// ---------------------------------------------------------------------------
// Frequencies

FrequencyTable::FrequencyTable(ArraySchema schema, std::vector<Shape> shapes,
                               Provenance provenance, std::size_t window_length)
    : schema_(std::move(schema)), shapes_(std::move(shapes)), entries_(shapes_.size()),
      provenance_(provenance), window_length_(window_length) {
    for (const auto& s : shapes_) {
        if (s.rows == 0 || s.cols == 0) {
            throw Error(ErrorKind::InvalidArgument, "shape dimensions must be positive");
        }
        if (s.rows > schema_.depth()) {
            throw Error(ErrorKind::ShapeTooLarge, "shape deeper than the table schema");
        }
    }
}

double FrequencyTable::frequency(std::size_t shape_index, const std::vector<Symbol>& cells) const {
    const auto& e = entries_.at(shape_index);
    auto it = e.find(cells);
    return it == e.end() ? 0.0 : it->second.value;
}

void FrequencyTable::set(std::size_t shape_index, std::vector<Symbol> cells, Frequency f) {
    const auto& shape = shapes_.at(shape_index);
    if (cells.size() != shape.rows * shape.cols) {
        throw Error(ErrorKind::InvalidArgument, "pattern size does not match its shape");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] >= schema_.rows[i / shape.cols].size()) {
            throw Error(ErrorKind::InvalidArgument, "pattern cell outside row alphabet");
        }
    }
    if (f.value == 0.0) {
        entries_[shape_index].erase(cells);
        return;
    }
    entries_[shape_index][std::move(cells)] = f;
}

bool FrequencyTable::is_consistent(double tolerance) const {
    for (const auto& e : entries_) {
        double total = 0.0;
        for (const auto& [cells, f] : e) {
            if (f.value < 0.0 || f.value > 1.0) return false;
            total += f.value;
        }
        if (std::abs(total - 1.0) > tolerance) return false;
    }
    return true;
}

std::string FrequencyTable::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "shape_k,shape_n,pattern,frequency\n";
    for (std::size_t i = 0; i < shapes_.size(); ++i) {
        for (const auto& [cells, f] : entries_[i]) {
            out << shapes_[i].rows << ',' << shapes_[i].cols << ','
                << render_pattern(schema_, RectanglePattern{shapes_[i], cells}) << ','
                << f.value << '\n';
        }
    }
    return out.str();
}

FrequencyTable frequency_table(const ArrayWindow& x, std::span<const Shape> shapes) {
    std::size_t deepest = 1;
    for (const auto& s : shapes) {
        if (s.rows == 0 || s.cols == 0) {
            throw Error(ErrorKind::InvalidArgument, "shape dimensions must be positive");
        }
        if (s.rows > x.depth() || s.cols > x.cols()) {
            throw Error(ErrorKind::ShapeTooLarge,
                        "shape " + s.to_string() + " exceeds the window");
        }
        deepest = std::max(deepest, s.rows);
    }
    ArraySchema schema(std::vector<Alphabet>(x.schema().rows.begin(),
                                             x.schema().rows.begin() +
                                                 static_cast<std::ptrdiff_t>(deepest)));
    FrequencyTable table(std::move(schema), {shapes.begin(), shapes.end()},
                         FrequencyTable::Provenance::Empirical, x.cols());
    const bool exact = x.cols() <= kExactFrequencyLimit;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto [k, n] = shapes[i];
        const std::size_t placements = x.cols() - n + 1;
        std::map<std::vector<Symbol>, std::uint64_t> counts;
        std::vector<Symbol> cells(k * n);
        for (std::size_t j = 0; j < placements; ++j) {
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t c = 0; c < n; ++c) {
                    const Symbol s = x.at(r, j + c);
                    if (s == kUnfilled) {
                        throw Error(ErrorKind::InvalidArgument,
                                    "frequency window touches an unfilled cell");
                    }
                    cells[r * n + c] = s;
                }
            }
            ++counts[cells];
        }
        for (auto& [pattern, count] : counts) {
            Frequency f;
            f.value = static_cast<double>(count) / static_cast<double>(placements);
            if (exact) {
                const auto g = std::gcd(count, static_cast<std::uint64_t>(placements));
                f.exact = Rational{count / g, placements / g};
            }
            table.set(i, pattern, f);
        }
    }
    return table;
}

namespace {

constexpr double kNegligibleIndex = 1100.0;  // 2^-1100 underflows a double

double universe_size(const ArraySchema& schema, const Shape& shape) {
    double size = 1.0;
    for (std::size_t r = 0; r < shape.rows; ++r) {
        size *= std::pow(static_cast<double>(schema.rows[r].size()),
                         static_cast<double>(shape.cols));
        if (size > 1e300) return 1e300;
    }
    return size;
}

// Lexicographic rank of a row-major pattern among all patterns of its shape,
// saturating once it is beyond any index with a representable weight.
double pattern_rank(const ArraySchema& schema, const Shape& shape,
                    const std::vector<Symbol>& cells) {
    double rank = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto radix = static_cast<double>(schema.rows[i / shape.cols].size());
        rank = rank * radix + static_cast<double>(cells[i]);
        if (rank > 1e300) return 1e300;
    }
    return rank;
}

}  // namespace

double measure_distance(const FrequencyTable& a, const FrequencyTable& b) {
    if (a.shapes() != b.shapes()) {
        throw Error(ErrorKind::ShapeMismatch, "tables have different shape lists");
    }
    std::size_t deepest = 0;
    for (const auto& s : a.shapes()) deepest = std::max(deepest, s.rows);
    for (std::size_t r = 0; r < deepest; ++r) {
        if (a.schema().rows[r].size() != b.schema().rows[r].size()) {
            throw Error(ErrorKind::ShapeMismatch, "tables use different row alphabets");
        }
    }
    double total = 0.0;
    double offset = 0.0;
    for (std::size_t i = 0; i < a.shapes().size(); ++i) {
        const Shape& shape = a.shapes()[i];
        if (offset <= kNegligibleIndex) {
            std::set<std::vector<Symbol>> keys;
            for (const auto& [cells, f] : a.entries(i)) keys.insert(cells);
            for (const auto& [cells, f] : b.entries(i)) keys.insert(cells);
            for (const auto& cells : keys) {
                const double m = offset + pattern_rank(a.schema(), shape, cells) + 1.0;
                if (m > kNegligibleIndex) continue;
                const double diff = std::abs(a.frequency(i, cells) - b.frequency(i, cells));
                total += std::ldexp(diff, -static_cast<int>(m));
            }
        }
        offset += universe_size(a.schema(), shape);
    }
    return total;
}

std::vector<double> substitution_letter_frequencies(const Subshift& s) {
    if (s.kind() != Subshift::Kind::Substitution) {
        throw Error(ErrorKind::InvalidArgument, "letter frequencies need a substitution");
    }
    const auto counts = substitution_matrix(s.alphabet(), s.images());
    std::vector<std::vector<double>> m(counts.size(), std::vector<double>(counts.size()));
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts.size(); ++j) m[i][j] = static_cast<double>(counts[i][j]);
    return perron_vector(m);
}

namespace {

// Frequencies of admissible n-words from the induced substitution on n-words:
// sigma_n(w) lists the n-subwords of sigma(w) starting inside sigma(w_0).
std::map<Word, double> word_frequencies(const Subshift& s, std::size_t n) {
    std::map<Word, double> out;
    if (n == 1) {
        const auto f = substitution_letter_frequencies(s);
        for (std::size_t a = 0; a < f.size(); ++a) {
            if (f[a] > 0.0) out.emplace(Word{static_cast<Symbol>(a)}, f[a]);
        }
        return out;
    }
    const auto& states = s.language(n);
    const std::size_t d = states.size();
    std::vector<std::vector<double>> m(d, std::vector<double>(d, 0.0));
    for (std::size_t j = 0; j < d; ++j) {
        const Word image = s.apply(states[j]);
        const std::size_t starts = s.images()[states[j][0]].size();
        for (std::size_t p = 0; p < starts; ++p) {
            auto idx = s.word_index(std::span<const Symbol>(image.data() + p, n));
            if (!idx) throw Error(ErrorKind::InvalidArgument, "induced substitution left language");
            m[*idx][j] += 1.0;
        }
    }
    const auto v = perron_vector(m);
    for (std::size_t i = 0; i < d; ++i) out.emplace_hint(out.end(), states[i], v[i]);
    return out;
}

}  // namespace

FrequencyTable substitution_frequency_table(const Subshift& s, std::span<const Shape> shapes) {
    std::size_t deepest = 1;
    for (const auto& sh : shapes) deepest = std::max(deepest, sh.rows);
    FrequencyTable table(ArraySchema::uniform(s.alphabet(), deepest), {shapes.begin(), shapes.end()},
                         FrequencyTable::Provenance::Exact);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto [k, n] = shapes[i];
        for (const auto& [w, f] : word_frequencies(s, n)) {
            std::vector<Symbol> cells;
            for (std::size_t r = 0; r < k; ++r) cells.insert(cells.end(), w.begin(), w.end());
            table.set(i, std::move(cells), Frequency{f, std::nullopt});
        }
    }
    return table;
}

}  // namespace zdm
