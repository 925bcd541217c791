#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "btprint/dataset.hpp"
#include "btprint/learners.hpp"
#include "btprint/metrics.hpp"

namespace btprint {

/// How the signature grid's upper bound is chosen: the 99th percentile of
/// the training split's IATs (frozen into the model), or a fixed value.
struct TMaxPolicy {
    enum class Kind { p99, fixed };
    Kind kind = Kind::p99;
    double fixed_seconds = 0.0;

    static TMaxPolicy p99() { return {Kind::p99, 0.0}; }
    static TMaxPolicy fixed(double seconds) { return {Kind::fixed, seconds}; }
};

/// Stratified seeded split: per class, ceil(fraction * n) sessions go to
/// training. Deterministic given the seed.
/// Throws TooFewSessions when any class has fewer than 2 sessions.
std::pair<Dataset, Dataset> split_train_validation(const Dataset& ds, double fraction,
                                                   std::uint64_t seed);

/// One (algorithm, filter) evaluation. Accuracy is absent when the filter
/// starved a class of usable sessions or left no validation instances.
struct GridCell {
    AlgorithmId algorithm = AlgorithmId::CartTree;
    FilterSpec filter;
    std::optional<double> accuracy;
    std::size_t train_count = 0;
    std::size_t validation_count = 0;
    double t_max = 0.0;
};

struct SelectionConfig {
    double split_fraction = 0.66;
    bool resubstitution = false;  // test on the training signatures themselves
    TMaxPolicy t_max_policy = TMaxPolicy::p99();
    DensityEstimator estimator = DensityEstimator::gaussian_kde;
    std::size_t jobs = 1;
};

struct SelectionResult {
    AlgorithmId best = AlgorithmId::CartTree;
    std::vector<GridCell> grid;  // algorithms x filters, in argument order
};

/// The election rule over a completed grid: keep the top
/// ceil(0.15 * n_valid) cells by accuracy including every cell tied at the
/// cut, count algorithm frequencies among the kept cells, return the most
/// frequent algorithm. Frequency ties break to the higher best accuracy,
/// then to AlgorithmId order.
/// Throws NoValidCells when no cell has an accuracy.
AlgorithmId elect(std::span<const GridCell> grid);

/// Runs the full training-phase grid: per filter, applies the filter,
/// generates signatures, splits train/validation, then fits and scores
/// every algorithm. Returns the elected algorithm and the whole grid.
SelectionResult pick_best(std::span<const LabeledSession> sessions,
                          std::span<const AlgorithmId> algorithms,
                          std::span<const FilterSpec> filters, std::uint64_t seed,
                          const SelectionConfig& config = {});

/// The per-filter half of a grid cell, reusable across algorithms and for
/// refitting the elected one: filtered sessions split into train/validation
/// signature sets on a shared t_max grid. Deterministic given (seed,
/// filter, config); usable_classes lists per-class usable session counts.
struct FilterData {
    Dataset train;
    Dataset validation;
    double t_max = 0.0;
    std::vector<std::size_t> usable_per_class;  // aligned with train.class_names
    bool valid = false;                         // every class usable and validation non-empty
};

FilterData prepare_filter_data(std::span<const LabeledSession> sessions, const FilterSpec& f,
                               std::uint64_t seed, const SelectionConfig& config);

/// Deterministic per-(seed, filter[, algorithm]) sub-seeds, so grid cells
/// are independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view a, std::string_view b = {});

/// Outcome of classifying an unknown capture. Every failure mode maps to
/// unidentified with a machine-readable reason.
struct ClassificationOutcome {
    enum class Kind { identified, unidentified };
    Kind kind = Kind::unidentified;
    std::string label;        // identified only
    double confidence = 0.0;  // identified only
    std::string reason;       // unidentified only: "insufficient_data" | "low_confidence"
};

/// Runs the model's own feature pipeline over the session and applies the
/// confidence threshold.
ClassificationOutcome classify_unknown(const TrainedModel& m,
                                       std::span<const PacketRecord> session, double threshold);

}  // namespace btprint
