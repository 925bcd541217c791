#include <algorithm>
#include <cmath>

#include "learner_impl.hpp"

namespace btprint::detail {

using nlohmann::json;

namespace {

double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

constexpr std::size_t kIterations = 500;
constexpr double kLogisticStep = 4.0;
constexpr double kSvmLambda = 1e-3;
// Hinge training drives support vectors to margin 1, so the squashing
// needs a gain for margins to read as confident scores.
constexpr double kSvmSquashGain = 3.0;

/// One-vs-rest linear scorers. Both the logistic and the hinge-trained
/// variant squash the per-class linear score through a sigmoid and
/// normalize across classes.
struct LinearOvrParams final : ModelParameters {
    std::vector<std::vector<double>> weights;  // [class][feature]
    std::vector<double> bias;                  // [class]
    std::string kind;                          // "logistic" | "svm"

    std::vector<double> class_scores(std::span<const double> x) const override {
        const double gain = kind == "svm" ? kSvmSquashGain : 1.0;
        std::vector<double> scores(bias.size());
        for (std::size_t c = 0; c < bias.size(); ++c) {
            double z = bias[c];
            for (std::size_t i = 0; i < x.size(); ++i) z += weights[c][i] * x[i];
            scores[c] = sigmoid(gain * z);
        }
        normalize_scores(scores);
        return scores;
    }

    std::string params_json() const override {
        json j;
        j["kind"] = kind;
        j["iterations"] = kIterations;
        if (kind == "svm") j["squash_gain"] = double_to_string(kSvmSquashGain);
        json w = json::array();
        for (const auto& row : weights) w.push_back(doubles_to_json(row));
        j["weights"] = std::move(w);
        j["bias"] = doubles_to_json(bias);
        return j.dump();
    }
};

}  // namespace

ParamsPtr fit_logistic_regression(const FitInput& in) {
    auto p = std::make_shared<LinearOvrParams>();
    p->kind = "logistic";
    const std::size_t C = in.n_classes, d = in.dim, n = in.n();
    p->weights.assign(C, std::vector<double>(d, 0.0));
    p->bias.assign(C, 0.0);

    std::vector<double> grad(d);
    for (std::size_t c = 0; c < C; ++c) {
        auto& w = p->weights[c];
        double& b = p->bias[c];
        for (std::size_t it = 0; it < kIterations; ++it) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double z = b;
                for (std::size_t f = 0; f < d; ++f) z += w[f] * in.x(i, f);
                const double err = sigmoid(z) - (in.y[i] == c ? 1.0 : 0.0);
                for (std::size_t f = 0; f < d; ++f) grad[f] += err * in.x(i, f);
                grad_b += err;
            }
            const double scale = kLogisticStep / static_cast<double>(n);
            for (std::size_t f = 0; f < d; ++f) w[f] -= scale * grad[f];
            b -= scale * grad_b;
        }
    }
    return p;
}

ParamsPtr fit_linear_svm(const FitInput& in) {
    auto p = std::make_shared<LinearOvrParams>();
    p->kind = "svm";
    const std::size_t C = in.n_classes, d = in.dim, n = in.n();
    p->weights.assign(C, std::vector<double>(d, 0.0));
    p->bias.assign(C, 0.0);

    // Full-batch Pegasos: eta_t = 1/(lambda (t+1)), projection onto the
    // 1/sqrt(lambda) ball keeps the iterates bounded.
    std::vector<double> grad(d);
    for (std::size_t c = 0; c < C; ++c) {
        auto& w = p->weights[c];
        double& b = p->bias[c];
        for (std::size_t it = 0; it < kIterations; ++it) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double target = in.y[i] == c ? 1.0 : -1.0;
                double z = b;
                for (std::size_t f = 0; f < d; ++f) z += w[f] * in.x(i, f);
                if (target * z < 1.0) {
                    for (std::size_t f = 0; f < d; ++f) grad[f] -= target * in.x(i, f);
                    grad_b -= target;
                }
            }
            const double eta = 1.0 / (kSvmLambda * static_cast<double>(it + 1));
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t f = 0; f < d; ++f)
                w[f] -= eta * (kSvmLambda * w[f] + grad[f] * inv_n);
            b -= eta * grad_b * inv_n;

            double norm_sq = b * b;
            for (double v : w) norm_sq += v * v;
            const double cap = 1.0 / std::sqrt(kSvmLambda);
            if (norm_sq > cap * cap) {
                const double shrink = cap / std::sqrt(norm_sq);
                for (double& v : w) v *= shrink;
                b *= shrink;
            }
        }
    }
    return p;
}

ParamsPtr linear_params_from_json(AlgorithmId, const json& j) {
    auto p = std::make_shared<LinearOvrParams>();
    p->kind = j.at("kind").get<std::string>();
    for (const json& row : j.at("weights")) p->weights.push_back(doubles_from_json(row));
    p->bias = doubles_from_json(j.at("bias"));
    return p;
}

}  // namespace btprint::detail
