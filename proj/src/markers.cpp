#include "zdm/markers.hpp"

#include <algorithm>
#include <limits>

#include "zdm/error.hpp"

namespace zdm {

namespace {

// Flags over language(L): marked[i] iff language(L)[i] is in W.
std::vector<bool> mark_words(const Subshift& s, std::size_t L, const std::vector<Word>& W) {
    std::vector<bool> marked(s.language(L).size(), false);
    for (const auto& w : W) {
        if (w.size() != L) {
            throw Error(ErrorKind::InvalidArgument, "marker words must share one length");
        }
        auto idx = s.word_index(w);
        if (!idx) {
            throw Error(ErrorKind::InvalidArgument,
                        "marker word " + s.alphabet().render(w) + " is not admissible");
        }
        marked[*idx] = true;
    }
    return marked;
}

bool marked_at(const Subshift& s, const std::vector<bool>& marked, const Word& u, std::size_t p,
               std::size_t L) {
    auto idx = s.word_index(std::span<const Symbol>(u.data() + p, L));
    return idx && marked[*idx];
}

}  // namespace

bool MarkerSet::contains(std::span<const Symbol> word) const {
    return std::binary_search(W.begin(), W.end(), word,
                              [](const auto& a, const auto& b) {
                                  return std::lexicographical_compare(a.begin(), a.end(),
                                                                      b.begin(), b.end());
                              });
}

std::vector<std::size_t> MarkerSet::hits(std::span<const Symbol> row) const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p + L <= row.size(); ++p) {
        if (contains(row.subspan(p, L))) out.push_back(p);
    }
    return out;
}

nlohmann::json MarkerSet::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["L"] = L;
    j["W"] = nlohmann::json::array();
    for (const auto& w : W) j["W"].push_back(subshift.alphabet().render(w));
    j["N"] = N;
    j["certificate_lengths"] = {{"separation", separation_length()},
                                {"covering", covering_length()}};
    return j;
}

MarkerVerdict verify_marker(const Subshift& s, const std::vector<Word>& W, std::size_t n,
                            std::optional<std::size_t> N_cap) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
    if (W.empty()) throw Error(ErrorKind::InvalidArgument, "marker word set is empty");
    MarkerVerdict verdict;
    verdict.N_cap = N_cap.value_or(default_cover_cap(n));
    if (verdict.N_cap == 0) throw Error(ErrorKind::InvalidArgument, "covering cap must be >= 1");
    const std::size_t L = W.front().size();
    const auto marked = mark_words(s, L, W);

    for (const auto& u : s.language(L + n - 1)) {
        std::size_t visits = 0;
        for (std::size_t p = 0; p < n; ++p) visits += marked_at(s, marked, u, p, L) ? 1 : 0;
        if (visits > 1) {
            verdict.witness = u;
            return verdict;
        }
    }
    verdict.valid = true;

    // Every admissible word of length L+N-1 sits inside some admissible word
    // of length L+cap-1, so the longest run of offsets without an occurrence
    // in the latter decides the least N.
    std::size_t longest_hole = 0;
    for (const auto& u : s.language(L + verdict.N_cap - 1)) {
        std::size_t run = 0;
        for (std::size_t p = 0; p < verdict.N_cap; ++p) {
            run = marked_at(s, marked, u, p, L) ? 0 : run + 1;
            longest_hole = std::max(longest_hole, run);
        }
        if (run == verdict.N_cap) {
            verdict.witness = u;
            return verdict;
        }
    }
    verdict.N = longest_hole + 1;
    return verdict;
}

MarkerSet find_marker(const Subshift& s, std::size_t n, std::size_t max_L,
                      std::optional<std::size_t> N_cap) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
    const std::size_t cap = N_cap.value_or(default_cover_cap(n));
    for (std::size_t L = 1; L <= max_L; ++L) {
        const auto& candidates = s.language(L);
        const auto& windows = s.language(L + n - 1);

        // occurrences[c] lists the windows holding candidate c at an offset
        // below n, once per offset.
        std::vector<std::vector<std::uint32_t>> occurrences(candidates.size());
        for (std::size_t j = 0; j < windows.size(); ++j) {
            for (std::size_t p = 0; p < n; ++p) {
                auto idx = s.word_index(std::span<const Symbol>(windows[j].data() + p, L));
                occurrences[*idx].push_back(static_cast<std::uint32_t>(j));
            }
        }
        std::vector<std::uint8_t> visits(windows.size(), 0);
        std::vector<Word> W;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const auto& occ = occurrences[c];
            bool separated = true;
            for (std::size_t i = 0; i < occ.size() && separated; ++i) {
                const bool repeated = i + 1 < occ.size() && occ[i + 1] == occ[i];
                separated = visits[occ[i]] == 0 && !repeated;
            }
            if (!separated) continue;
            for (auto j : occ) visits[j] = 1;
            W.push_back(candidates[c]);
        }
        if (W.empty()) continue;
        auto verdict = verify_marker(s, W, n, cap);
        if (verdict.valid && verdict.N) {
            return MarkerSet{s, n, L, std::move(W), *verdict.N};
        }
    }
    throw Error(ErrorKind::NotFound, "no marker with max_L=" + std::to_string(max_L) +
                                         ", N_cap=" + std::to_string(cap));
}

AperiodicityCheck aperiodicity_surrogate(const Subshift& s, std::size_t n) {
    AperiodicityCheck check;
    if (n < 2) return check;
    for (const auto& u : s.language(2 * n)) {
        for (std::size_t p = 1; p < n; ++p) {
            bool periodic = true;
            for (std::size_t i = 0; i + p < u.size() && periodic; ++i) periodic = u[i] == u[i + p];
            if (periodic) {
                check.passed = false;
                check.witness = u;
                check.period = p;
                return check;
            }
        }
    }
    return check;
}

GapRange observed_gaps(const MarkerSet& m, std::size_t word_length) {
    GapRange range{std::numeric_limits<std::size_t>::max(), 0};
    for (const auto& u : m.subshift.language(word_length)) {
        auto h = m.hits(u);
        for (std::size_t i = 1; i < h.size(); ++i) {
            range.min_gap = std::min(range.min_gap, h[i] - h[i - 1]);
            range.max_gap = std::max(range.max_gap, h[i] - h[i - 1]);
        }
    }
    if (range.max_gap == 0) range.min_gap = 0;
    return range;
}

}  // namespace zdm
