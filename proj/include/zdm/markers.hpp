#pragma once

// n-markers in subshifts: clopen sets F = union of cylinders [w], w in W,
// certified against the exhaustive language of the subshift.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "zdm/shift_spaces.hpp"

namespace zdm {

struct MarkerVerdict {
    bool valid = false;
    std::optional<std::size_t> N;  // minimal covering bound, absent above the cap
    std::size_t N_cap = 0;
    std::optional<Word> witness;   // separation or covering counterexample
};

struct MarkerSet {
    Subshift subshift;
    std::size_t n = 0;
    std::size_t L = 0;
    std::vector<Word> W;  // sorted
    std::size_t N = 0;

    /// Word lengths at which separation and covering were checked.
    std::size_t separation_length() const { return L + n - 1; }
    std::size_t covering_length() const { return L + N - 1; }

    bool contains(std::span<const Symbol> word) const;
    /// Offsets p with row[p, p+L) in W.
    std::vector<std::size_t> hits(std::span<const Symbol> row) const;

    nlohmann::json to_json() const;
};

inline std::size_t default_cover_cap(std::size_t n) { return 4 * n; }

/// Separation over the language of length L+n-1, then the least N <= cap
/// such that every admissible word of length L+N-1 contains a W-word.
MarkerVerdict verify_marker(const Subshift& s, const std::vector<Word>& W, std::size_t n,
                            std::optional<std::size_t> N_cap = std::nullopt);

/// Greedy lexicographic search for L = 1..max_L. Throws NotFound.
MarkerSet find_marker(const Subshift& s, std::size_t n, std::size_t max_L,
                      std::optional<std::size_t> N_cap = std::nullopt);

/// Finite aperiodicity surrogate: no admissible word of length 2n is periodic
/// with a period below n. Diagnostic only.
struct AperiodicityCheck {
    bool passed = true;
    std::optional<Word> witness;
    std::size_t period = 0;
};
AperiodicityCheck aperiodicity_surrogate(const Subshift& s, std::size_t n);

/// Smallest and largest distance between consecutive W-occurrences over
/// every admissible word of the given length.
struct GapRange {
    std::size_t min_gap = 0;
    std::size_t max_gap = 0;
};
GapRange observed_gaps(const MarkerSet& m, std::size_t word_length);

}  // namespace zdm
