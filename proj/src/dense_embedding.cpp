#include "zdm/dense_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "zdm/error.hpp"

namespace zdm {

NeighborhoodSpec NeighborhoodSpec::make(FrequencyTable target, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    const auto& shapes = target.shapes();
    if (shapes.empty()) throw Error(ErrorKind::InvalidArgument, "no rectangle shapes given");
    for (std::size_t i = 1; i < shapes.size(); ++i) {
        const bool grows = shapes[i].rows >= shapes[i - 1].rows &&
                           shapes[i].cols >= shapes[i - 1].cols && shapes[i] != shapes[i - 1];
        if (!grows) {
            throw Error(ErrorKind::InvalidArgument,
                        "shapes must increase: " + shapes[i - 1].to_string() + " then " +
                            shapes[i].to_string());
        }
    }
    const std::size_t i0 = shapes.size();
    return NeighborhoodSpec{std::move(target), i0, eps};
}

std::size_t required_block_length(std::size_t n_last, std::size_t k_last, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    double ratio = 2.0 * static_cast<double>(n_last) / eps;
    // 2n/eps is often an integer in exact arithmetic; snap rounding noise.
    const double nearest = std::nearbyint(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) ratio = nearest;
    const double bound = std::max(ratio, static_cast<double>(k_last));
    return static_cast<std::size_t>(std::floor(bound)) + 1;
}

std::size_t required_block_length(const NeighborhoodSpec& spec) {
    return required_block_length(spec.last_shape().cols, spec.last_shape().rows, spec.eps);
}

double prefix_window_error(const ArrayWindow& grid, const NeighborhoodSpec& spec,
                           std::size_t min_width) {
    if (grid.unfilled_count() > 0) {
        throw Error(ErrorKind::InvalidArgument, "sample grid has unfilled cells");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < spec.i0; ++i) {
        const auto [k, n] = spec.target.shapes()[i];
        if (k > grid.depth()) {
            throw Error(ErrorKind::ShapeTooLarge, "shape deeper than the sample");
        }
        const auto& target = spec.target.entries(i);
        for (std::size_t v = 0; v + k <= grid.depth(); ++v) {
            std::map<std::vector<Symbol>, std::size_t> counts;
            std::vector<Symbol> cells(k * n);
            for (std::size_t width = n; width <= grid.cols(); ++width) {
                const std::size_t col = width - n;
                for (std::size_t r = 0; r < k; ++r)
                    for (std::size_t c = 0; c < n; ++c) cells[r * n + c] = grid.at(v + r, col + c);
                ++counts[cells];
                if (width < min_width) continue;
                const double placements = static_cast<double>(width - n + 1);
                for (const auto& [pattern, f] : target) {
                    auto it = counts.find(pattern);
                    const double seen = it == counts.end() ? 0.0 : static_cast<double>(it->second);
                    worst = std::max(worst, std::abs(seen / placements - f.value));
                }
                for (const auto& [pattern, count] : counts) {
                    if (target.count(pattern)) continue;
                    worst = std::max(worst, static_cast<double>(count) / placements);
                }
            }
        }
    }
    return worst;
}

GenericPointSample build_generic_sample(const ArrayWindow& grid, const NeighborhoodSpec& spec) {
    const std::size_t N0 = grid.depth();
    if (grid.cols() < N0) {
        throw Error(ErrorKind::NotGenericEnough,
                    "sample has " + std::to_string(grid.cols()) + " columns, fewer than N0");
    }
    GenericPointSample sample{grid, prefix_window_error(grid, spec, N0)};
    if (sample.certified_error > spec.eps / 2.0) {
        throw Error(ErrorKind::NotGenericEnough,
                    "certified error " + std::to_string(sample.certified_error) + " > eps/2");
    }
    return sample;
}

GenericPointSample build_generic_sample(const Subshift& target, std::size_t N0, std::size_t M,
                                        const NeighborhoodSpec& spec) {
    if (N0 == 0) throw Error(ErrorKind::InvalidArgument, "N0 must be positive");
    if (M < N0) {
        throw Error(ErrorKind::NotGenericEnough, "M < N0: no full sample window");
    }
    Word row = target.iterate(0, M);
    row.resize(M);
    ArrayWindow grid(ArraySchema::uniform(target.alphabet(), N0), 0,
                     std::vector<Word>(N0, row));
    return build_generic_sample(grid, spec);
}

ArrayWindow insert_rows(const ArrayWindow& x, const std::vector<std::int64_t>& hits,
                        const GenericPointSample& sample, std::size_t N0,
                        TrailingSegment trailing) {
    if (sample.rows() != N0) {
        throw Error(ErrorKind::InvalidArgument, "sample row count differs from N0");
    }
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (hits[i] < x.first_col() || hits[i] >= x.end_col()) {
            throw Error(ErrorKind::InvalidArgument, "marker hit outside the window");
        }
        if (i > 0 && hits[i] <= hits[i - 1]) {
            throw Error(ErrorKind::InvalidArgument, "marker hits must be strictly increasing");
        }
    }
    std::vector<Alphabet> rows = sample.cells.schema().rows;
    rows.insert(rows.end(), x.schema().rows.begin(), x.schema().rows.end());
    ArrayWindow out(ArraySchema(std::move(rows)), x.first_col(), x.cols());
    for (std::size_t r = 0; r < x.depth(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out.set(N0 + r, c, x.at(r, c));

    auto fill = [&](std::int64_t begin, std::size_t width) {
        const std::size_t base = x.offset_of(begin);
        for (std::size_t r = 0; r < N0; ++r)
            for (std::size_t k = 0; k < width; ++k) out.set(r, base + k, sample.cells.at(r, k));
    };
    for (std::size_t i = 0; i + 1 < hits.size(); ++i) {
        const auto gap = static_cast<std::size_t>(hits[i + 1] - hits[i]);
        if (gap < N0 || gap > sample.cols()) {
            throw Error(ErrorKind::GapOutOfRange,
                        "(" + std::to_string(hits[i]) + ", " + std::to_string(gap) + ")");
        }
        fill(hits[i], gap);
    }
    if (trailing == TrailingSegment::FromSample && !hits.empty()) {
        const auto tail = static_cast<std::size_t>(x.end_col() - hits.back());
        fill(hits.back(), std::min(tail, sample.cols()));
    }
    return out;
}

std::size_t EmbeddingPlan::locality_radius() const {
    return std::max(marker.N, 2 * N0) + marker.L;
}

nlohmann::json EmbeddingPlan::to_json() const {
    return {{"N0", N0},
            {"marker", marker.to_json()},
            {"gap_window", {gap_min(), gap_max()}},
            {"sample_cols", sample.cols()},
            {"sample_certified_error", sample.certified_error},
            {"locality_radius", locality_radius()},
            {"eps", spec.eps},
            {"i0", spec.i0}};
}

EmbeddingPlan plan_embedding(const Subshift& host, const Subshift& target,
                             const std::vector<Shape>& shapes, double eps,
                             const PlanOptions& options) {
    auto spec = NeighborhoodSpec::make(substitution_frequency_table(target, shapes), eps);
    const std::size_t N0 = required_block_length(spec);
    auto marker = find_marker(host, N0, options.max_word_len, options.cover_cap);
    const std::size_t M = options.sample_cols.value_or(marker.N);
    if (M < marker.N) {
        throw Error(ErrorKind::InvalidArgument,
                    "sample narrower than the marker covering bound " + std::to_string(marker.N));
    }
    auto sample = build_generic_sample(target, N0, M, spec);
    return EmbeddingPlan{host, std::move(spec), std::move(sample), std::move(marker), N0, 0};
}

std::vector<std::int64_t> marker_hits(const EmbeddingPlan& plan, const ArrayWindow& x) {
    if (plan.marker_row >= x.depth()) {
        throw Error(ErrorKind::InvalidArgument, "marker row outside the window");
    }
    std::vector<std::int64_t> out;
    for (auto p : plan.marker.hits(x.row(plan.marker_row))) {
        out.push_back(x.first_col() + static_cast<std::int64_t>(p));
    }
    return out;
}

ArrayWindow build_phi(const EmbeddingPlan& plan, const ArrayWindow& x) {
    auto hits = marker_hits(plan, x);
    if (hits.size() < 2) {
        throw Error(ErrorKind::NoMarkers,
                    std::to_string(hits.size()) + " marker hit(s) in the window");
    }
    return insert_rows(x, hits, plan.sample, plan.N0);
}

DensityVerdict verify_density(const EmbeddingPlan& plan, const std::vector<ArrayWindow>& outputs,
                              bool strict) {
    const auto& spec = plan.spec;
    std::map<std::pair<std::size_t, std::vector<Symbol>>, RectangleDeviation> worst;
    auto record = [&](std::size_t i, const std::vector<Symbol>& cells, double target,
                      double measured) {
        auto& entry = worst[{i, cells}];
        const double d = std::abs(measured - target);
        if (d >= entry.deviation) entry = RectangleDeviation{i, cells, target, measured, d};
    };
    for (const auto& out : outputs) {
        if (out.depth() < plan.N0) {
            throw Error(ErrorKind::InvalidArgument, "output lacks the new rows");
        }
        const auto top = out.row(0);
        auto first = std::find_if(top.begin(), top.end(), [](Symbol s) { return s != kUnfilled; });
        auto last = std::find(first, top.end(), kUnfilled);
        const auto begin = out.first_col() + (first - top.begin());
        const auto end = out.first_col() + (last - top.begin());
        if (end <= begin) throw Error(ErrorKind::InvalidArgument, "output has no filled span");
        const ArrayWindow rows = out.rows_slice(0, plan.N0).slice(begin, end);
        for (std::size_t i = 0; i < spec.i0; ++i) {
            const Shape shape = spec.target.shapes()[i];
            const std::size_t offsets = strict ? plan.N0 - shape.rows + 1 : 1;
            for (std::size_t v = 0; v < offsets; ++v) {
                const std::vector<Shape> one{shape};
                const auto table = frequency_table(rows.rows_slice(v, plan.N0), one);
                for (const auto& [cells, f] : spec.target.entries(i)) {
                    record(i, cells, f.value, table.frequency(0, cells));
                }
                for (const auto& [cells, f] : table.entries(0)) {
                    record(i, cells, spec.target.frequency(i, cells), f.value);
                }
            }
        }
    }
    DensityVerdict verdict;
    for (auto& [key, r] : worst) {
        verdict.worst_deviation = std::max(verdict.worst_deviation, r.deviation);
        verdict.rectangles.push_back(std::move(r));
    }
    verdict.inside = !outputs.empty() && verdict.worst_deviation < spec.eps;
    return verdict;
}

ArrayWindow phi_noninvertible(const EmbeddingPlan& plan, const ArrayWindow& x) {
    if (x.first_col() != 0) {
        throw Error(ErrorKind::InvalidArgument, "one-sided windows start at column 0");
    }
    const auto hits = marker_hits(plan, x);
    if (hits.empty()) throw Error(ErrorKind::NoMarkers, "no marker hit in the window");
    const auto shift = static_cast<std::int64_t>(2 * plan.N0 - 1);
    if (hits.front() > shift) {
        throw Error(ErrorKind::UncoveredPrefix,
                    "first marker hit at " + std::to_string(hits.front()) + " > 2N0-1");
    }
    if (hits.size() < 2 || hits.back() <= shift) {
        throw Error(ErrorKind::NoMarkers, "window too short for the one-sided construction");
    }
    const auto filled = insert_rows(x, hits, plan.sample, plan.N0);
    const auto width = static_cast<std::size_t>(hits.back() - shift);
    ArrayWindow out(filled.schema(), 0, width);
    for (std::size_t c = 0; c < width; ++c) {
        for (std::size_t r = 0; r < plan.N0; ++r) {
            out.set(r, c, filled.at(r, c + static_cast<std::size_t>(shift)));
        }
        for (std::size_t r = plan.N0; r < filled.depth(); ++r) out.set(r, c, filled.at(r, c));
    }
    return out;
}

}  // namespace zdm
