#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "btprint/dataset.hpp"
#include "btprint/learners.hpp"

namespace btprint {

/// counts(i, j) = instances of true class i predicted as class j.
class ConfusionMatrix {
   public:
    explicit ConfusionMatrix(std::vector<std::string> class_names);

    void add(std::size_t true_idx, std::size_t predicted_idx, std::size_t n = 1);
    std::size_t count(std::size_t true_idx, std::size_t predicted_idx) const;
    std::size_t total() const;
    std::size_t support(std::size_t true_idx) const;  // row sum

    std::size_t size() const { return class_names_.size(); }
    const std::vector<std::string>& class_names() const { return class_names_; }

   private:
    std::vector<std::string> class_names_;
    std::vector<std::size_t> counts_;  // row-major n x n
};

struct ClassMetrics {
    double tp_rate = 0.0;
    double fp_rate = 0.0;
    double precision = 0.0;
    double recall = 0.0;  // identical to tp_rate
    double f_measure = 0.0;
    double mcc = 0.0;
    std::size_t support = 0;
};

/// Per-class metrics plus their support-weighted averages, mirroring the
/// detailed accuracy table layout (TP Rate, FP Rate, Precision, Recall,
/// F-Measure, MCC, Weighted Avg. row).
struct EvaluationReport {
    std::vector<std::string> class_names;
    std::vector<ClassMetrics> per_class;
    ClassMetrics weighted_avg;
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // counts[i][j]
};

/// Derives every metric from a confusion matrix. Undefined ratios (empty
/// denominators) are reported as 0.
EvaluationReport report_from_matrix(const ConfusionMatrix& m);

/// Predicts every signature in ds with m and reports the metrics.
/// Throws EmptyDataset when ds has no signatures.
EvaluationReport evaluate(const TrainedModel& m, const Dataset& ds);

std::string report_to_json(const EvaluationReport& r);

/// Renders the per-class table with the Weighted Avg. row as fixed-width
/// text, for --pretty output.
std::string report_to_table(const EvaluationReport& r);

}  // namespace btprint
