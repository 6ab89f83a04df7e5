#pragma once

// Marker-aligned row insertion: append N0 rows copied from a generic sample
// between consecutive marker hits so that every image point has rectangle
// frequencies close to a target profile.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zdm/markers.hpp"
#include "zdm/shift_spaces.hpp"

namespace zdm {

struct NeighborhoodSpec {
    FrequencyTable target;
    std::size_t i0 = 0;  // shapes 1..i0 of the target are constrained
    double eps = 0.0;

    /// All shapes of the target, checked to be strictly increasing.
    static NeighborhoodSpec make(FrequencyTable target, double eps);
    const Shape& last_shape() const { return target.shapes().at(i0 - 1); }
};

std::size_t required_block_length(std::size_t n_last, std::size_t k_last, double eps);
std::size_t required_block_length(const NeighborhoodSpec& spec);

struct GenericPointSample {
    ArrayWindow cells;              // N0 rows, columns [0, M)
    double certified_error = 0.0;   // sup over prefix widths in [N0, M]

    std::size_t rows() const { return cells.depth(); }
    std::size_t cols() const { return cells.cols(); }
};

/// Worst |prefix frequency - target| over widths N0..grid.cols(), over all
/// vertical offsets of each shape inside the grid.
double prefix_window_error(const ArrayWindow& grid, const NeighborhoodSpec& spec,
                           std::size_t min_width);

/// Sample = the first M letters of an iterate of `target`, stacked N0 times.
/// Throws NotGenericEnough when M < N0 or the error exceeds eps/2.
GenericPointSample build_generic_sample(const Subshift& target, std::size_t N0, std::size_t M,
                                        const NeighborhoodSpec& spec);
GenericPointSample build_generic_sample(const ArrayWindow& grid, const NeighborhoodSpec& spec);

enum class TrailingSegment { Unfilled, FromSample };

/// New rows first, then the rows of x. Each block [h_i, h_{i+1}) receives
/// sample columns 0..gap-1. Columns before the first hit stay unfilled; the
/// segment after the last hit too unless `trailing` says otherwise.
ArrayWindow insert_rows(const ArrayWindow& x, const std::vector<std::int64_t>& hits,
                        const GenericPointSample& sample, std::size_t N0,
                        TrailingSegment trailing = TrailingSegment::Unfilled);

struct EmbeddingPlan {
    Subshift host;
    NeighborhoodSpec spec;
    GenericPointSample sample;
    MarkerSet marker;
    std::size_t N0 = 0;
    std::size_t marker_row = 0;

    std::size_t gap_min() const { return marker.n; }
    std::size_t gap_max() const { return marker.N; }
    /// Output column j depends on input columns [j - r, j + r] only.
    std::size_t locality_radius() const;

    nlohmann::json to_json() const;
};

struct PlanOptions {
    std::size_t max_word_len = 256;
    std::optional<std::size_t> cover_cap;
    std::optional<std::size_t> sample_cols;  // default: the covering bound N
};

EmbeddingPlan plan_embedding(const Subshift& host, const Subshift& target,
                             const std::vector<Shape>& shapes, double eps,
                             const PlanOptions& options = {});

/// Absolute columns where the marker row reads a W-word.
std::vector<std::int64_t> marker_hits(const EmbeddingPlan& plan, const ArrayWindow& x);

ArrayWindow build_phi(const EmbeddingPlan& plan, const ArrayWindow& x);

struct RectangleDeviation {
    std::size_t shape_index = 0;
    std::vector<Symbol> cells;
    double target = 0.0;
    double measured = 0.0;  // value at the worst output
    double deviation = 0.0;
};

struct DensityVerdict {
    bool inside = false;
    double worst_deviation = 0.0;
    std::vector<RectangleDeviation> rectangles;
};

/// Frequencies of the new rows over the filled span of each output.
/// `strict` also measures every vertical offset inside the new rows.
DensityVerdict verify_density(const EmbeddingPlan& plan, const std::vector<ArrayWindow>& outputs,
                              bool strict = false);

/// One-sided variant: fill from the first hit, then move the new rows left
/// by 2N0-1. Output covers columns [0, last hit - (2N0-1)).
ArrayWindow phi_noninvertible(const EmbeddingPlan& plan, const ArrayWindow& x);

}  // namespace zdm
