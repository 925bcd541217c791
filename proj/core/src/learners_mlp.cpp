#include <algorithm>
#include <cmath>

#include "learner_impl.hpp"

namespace btprint::detail {

using nlohmann::json;

namespace {

constexpr std::size_t kHiddenUnits = 32;
constexpr std::size_t kEpochs = 200;
constexpr double kStep = 0.01;

/// tanh hidden layer, softmax output, trained per-instance with SGD.
struct MlpParams final : ModelParameters {
    std::vector<std::vector<double>> w1;  // [hidden][feature]
    std::vector<double> b1;               // [hidden]
    std::vector<std::vector<double>> w2;  // [class][hidden]
    std::vector<double> b2;               // [class]

    std::vector<double> hidden(std::span<const double> x) const {
        std::vector<double> a(w1.size());
        for (std::size_t h = 0; h < w1.size(); ++h) {
            double z = b1[h];
            for (std::size_t i = 0; i < x.size(); ++i) z += w1[h][i] * x[i];
            a[h] = std::tanh(z);
        }
        return a;
    }

    std::vector<double> class_scores(std::span<const double> x) const override {
        const std::vector<double> a = hidden(x);
        std::vector<double> z(b2.size());
        for (std::size_t c = 0; c < b2.size(); ++c) {
            double v = b2[c];
            for (std::size_t h = 0; h < a.size(); ++h) v += w2[c][h] * a[h];
            z[c] = v;
        }
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double& v : z) {
            v = std::exp(v - m);
            sum += v;
        }
        for (double& v : z) v /= sum;
        return z;
    }

    std::string params_json() const override {
        json j;
        j["hidden_units"] = kHiddenUnits;
        j["epochs"] = kEpochs;
        j["step"] = double_to_string(kStep);
        json jw1 = json::array(), jw2 = json::array();
        for (const auto& r : w1) jw1.push_back(doubles_to_json(r));
        for (const auto& r : w2) jw2.push_back(doubles_to_json(r));
        j["w1"] = std::move(jw1);
        j["b1"] = doubles_to_json(b1);
        j["w2"] = std::move(jw2);
        j["b2"] = doubles_to_json(b2);
        return j.dump();
    }
};

}  // namespace

ParamsPtr fit_mlp(const FitInput& in, Rng& rng) {
    auto p = std::make_shared<MlpParams>();
    const std::size_t C = in.n_classes, d = in.dim, n = in.n();

    const double limit1 = std::sqrt(6.0 / static_cast<double>(d + kHiddenUnits));
    const double limit2 = std::sqrt(6.0 / static_cast<double>(kHiddenUnits + C));
    p->w1.assign(kHiddenUnits, std::vector<double>(d));
    p->w2.assign(C, std::vector<double>(kHiddenUnits));
    p->b1.assign(kHiddenUnits, 0.0);
    p->b2.assign(C, 0.0);
    for (auto& row : p->w1)
        for (double& v : row) v = rng.uniform(-limit1, limit1);
    for (auto& row : p->w2)
        for (double& v : row) v = rng.uniform(-limit2, limit2);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::vector<double> a(kHiddenUnits), dz2(C), da1(kHiddenUnits);
    for (std::size_t epoch = 0; epoch < kEpochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const auto x = in.row(idx);
            // forward
            for (std::size_t h = 0; h < kHiddenUnits; ++h) {
                double z = p->b1[h];
                for (std::size_t i = 0; i < d; ++i) z += p->w1[h][i] * x[i];
                a[h] = std::tanh(z);
            }
            double m = -1e300;
            for (std::size_t c = 0; c < C; ++c) {
                double v = p->b2[c];
                for (std::size_t h = 0; h < kHiddenUnits; ++h) v += p->w2[c][h] * a[h];
                dz2[c] = v;
                m = std::max(m, v);
            }
            double sum = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                dz2[c] = std::exp(dz2[c] - m);
                sum += dz2[c];
            }
            // softmax probabilities become the output-layer error in place
            for (std::size_t c = 0; c < C; ++c) {
                dz2[c] /= sum;
                if (c == in.y[idx]) dz2[c] -= 1.0;
            }
            // backprop through the current weights, then update
            for (std::size_t h = 0; h < kHiddenUnits; ++h) {
                double acc = 0.0;
                for (std::size_t c = 0; c < C; ++c) acc += p->w2[c][h] * dz2[c];
                da1[h] = acc * (1.0 - a[h] * a[h]);
            }
            for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t h = 0; h < kHiddenUnits; ++h)
                    p->w2[c][h] -= kStep * dz2[c] * a[h];
                p->b2[c] -= kStep * dz2[c];
            }
            for (std::size_t h = 0; h < kHiddenUnits; ++h) {
                if (da1[h] == 0.0) continue;
                for (std::size_t i = 0; i < d; ++i) p->w1[h][i] -= kStep * da1[h] * x[i];
                p->b1[h] -= kStep * da1[h];
            }
        }
    }
    return p;
}

ParamsPtr mlp_params_from_json(const json& j) {
    auto p = std::make_shared<MlpParams>();
    for (const json& r : j.at("w1")) p->w1.push_back(doubles_from_json(r));
    p->b1 = doubles_from_json(j.at("b1"));
    for (const json& r : j.at("w2")) p->w2.push_back(doubles_from_json(r));
    p->b2 = doubles_from_json(j.at("b2"));
    return p;
}

}  // namespace btprint::detail
