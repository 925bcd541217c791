#include "btprint/metrics.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace btprint {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : class_names_(std::move(class_names)),
      counts_(class_names_.size() * class_names_.size(), 0) {}

void ConfusionMatrix::add(std::size_t true_idx, std::size_t predicted_idx, std::size_t n) {
    counts_[true_idx * class_names_.size() + predicted_idx] += n;
}

std::size_t ConfusionMatrix::count(std::size_t true_idx, std::size_t predicted_idx) const {
    return counts_[true_idx * class_names_.size() + predicted_idx];
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (std::size_t c : counts_) t += c;
    return t;
}

std::size_t ConfusionMatrix::support(std::size_t true_idx) const {
    std::size_t t = 0;
    for (std::size_t j = 0; j < class_names_.size(); ++j) t += count(true_idx, j);
    return t;
}

namespace {

double ratio(double num, double denom) {
    return denom == 0.0 ? 0.0 : num / denom;
}

}  // namespace

EvaluationReport report_from_matrix(const ConfusionMatrix& m) {
    const std::size_t C = m.size();
    const double total = static_cast<double>(m.total());

    EvaluationReport rep;
    rep.class_names = m.class_names();
    rep.per_class.resize(C);
    rep.confusion.assign(C, std::vector<std::size_t>(C, 0));

    double trace = 0.0;
    for (std::size_t i = 0; i < C; ++i) {
        for (std::size_t j = 0; j < C; ++j) rep.confusion[i][j] = m.count(i, j);
        trace += static_cast<double>(m.count(i, i));
    }
    rep.accuracy = ratio(trace, total);

    for (std::size_t c = 0; c < C; ++c) {
        const double tp = static_cast<double>(m.count(c, c));
        const double fn = static_cast<double>(m.support(c)) - tp;
        double fp = 0.0;
        for (std::size_t i = 0; i < C; ++i)
            if (i != c) fp += static_cast<double>(m.count(i, c));
        const double tn = total - tp - fn - fp;

        ClassMetrics& cm = rep.per_class[c];
        cm.support = m.support(c);
        cm.tp_rate = ratio(tp, tp + fn);
        cm.fp_rate = ratio(fp, fp + tn);
        cm.precision = ratio(tp, tp + fp);
        cm.recall = cm.tp_rate;
        cm.f_measure = ratio(2.0 * cm.precision * cm.recall, cm.precision + cm.recall);
        const double denom =
            std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
        cm.mcc = denom == 0.0 ? 0.0 : (tp * tn - fp * fn) / denom;
    }

    // Support-weighted averages.
    ClassMetrics& w = rep.weighted_avg;
    w.support = m.total();
    for (std::size_t c = 0; c < C; ++c) {
        const double weight = ratio(static_cast<double>(rep.per_class[c].support), total);
        w.tp_rate += weight * rep.per_class[c].tp_rate;
        w.fp_rate += weight * rep.per_class[c].fp_rate;
        w.precision += weight * rep.per_class[c].precision;
        w.recall += weight * rep.per_class[c].recall;
        w.f_measure += weight * rep.per_class[c].f_measure;
        w.mcc += weight * rep.per_class[c].mcc;
    }
    return rep;
}

EvaluationReport evaluate(const TrainedModel& m, const Dataset& ds) {
    if (ds.signatures.empty()) throw EmptyDataset("no signatures to evaluate");
    ds.validate();
    ConfusionMatrix matrix(m.class_names);
    for (const Signature& s : ds.signatures) {
        const Prediction pred = predict(m, s);
        std::size_t true_idx = 0;
        for (std::size_t c = 0; c < m.class_names.size(); ++c)
            if (m.class_names[c] == *s.label) true_idx = c;
        std::size_t pred_idx = 0;
        for (std::size_t c = 0; c < m.class_names.size(); ++c)
            if (m.class_names[c] == pred.label) pred_idx = c;
        matrix.add(true_idx, pred_idx);
    }
    return report_from_matrix(matrix);
}

namespace {

json metrics_to_json(const ClassMetrics& cm) {
    json j;
    j["tp_rate"] = cm.tp_rate;
    j["fp_rate"] = cm.fp_rate;
    j["precision"] = cm.precision;
    j["recall"] = cm.recall;
    j["f_measure"] = cm.f_measure;
    j["mcc"] = cm.mcc;
    j["support"] = cm.support;
    return j;
}

}  // namespace

std::string report_to_json(const EvaluationReport& r) {
    json j;
    j["schema_version"] = 1;
    j["accuracy"] = r.accuracy;
    json classes = json::array();
    for (std::size_t c = 0; c < r.class_names.size(); ++c) {
        json row = metrics_to_json(r.per_class[c]);
        row["class"] = r.class_names[c];
        classes.push_back(std::move(row));
    }
    j["classes"] = std::move(classes);
    j["weighted_avg"] = metrics_to_json(r.weighted_avg);
    j["confusion"] = {{"class_names", r.class_names}, {"counts", r.confusion}};
    return j.dump(2) + "\n";
}

std::string report_to_table(const EvaluationReport& r) {
    std::string out =
        "TP Rate  FP Rate  Precision  Recall  F-Measure  MCC     Class\n";
    char line[256];
    auto row = [&](const ClassMetrics& cm, const std::string& name) {
        std::snprintf(line, sizeof(line), "%-7.3f  %-7.3f  %-9.3f  %-6.3f  %-9.3f  %-6.3f  %s\n",
                      cm.tp_rate, cm.fp_rate, cm.precision, cm.recall, cm.f_measure, cm.mcc,
                      name.c_str());
        out += line;
    };
    for (std::size_t c = 0; c < r.class_names.size(); ++c)
        row(r.per_class[c], r.class_names[c]);
    row(r.weighted_avg, "Weighted Avg.");
    std::snprintf(line, sizeof(line), "Accuracy: %.4f%%\n", r.accuracy * 100.0);
    out += line;
    return out;
}

}  // namespace btprint
