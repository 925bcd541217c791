#include "btprint/features.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "btprint/jsonutil.hpp"

namespace btprint {

using nlohmann::json;

IatVector extract_iat(std::span<const PacketRecord> session) {
    IatVector iat;
    if (!session.empty()) iat.session_id = session.front().session_id;
    for (std::size_t i = 0; i + 1 < session.size(); ++i) {
        const std::int64_t delta_us = session[i + 1].timestamp_us - session[i].timestamp_us;
        if (delta_us == 0) continue;  // duplicate timestamps carry no timing signal
        iat.values.push_back(static_cast<double>(delta_us) * 1e-6);
    }
    return iat;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw Error("percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double rank = (p / 100.0) * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

constexpr double kMinBandwidth = 1e-9;  // seconds

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double silverman_bandwidth(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / (n - 1.0));
    const double iqr = percentile(x, 75.0) - percentile(x, 25.0);
    const double h = 0.9 * std::min(sigma, iqr / 1.34) * std::pow(n, -0.2);
    return std::max(h, kMinBandwidth);
}

// Exact integral of the KDE over each bin: bin masses are differences of the
// mixture CDF at the 301 edges.
std::vector<double> kde_bin_masses(const std::vector<double>& x, double t_max) {
    const double h = silverman_bandwidth(x);
    const double width = t_max / static_cast<double>(kSignatureBins);
    std::vector<double> cdf(kSignatureBins + 1, 0.0);
    for (double xi : x) {
        for (std::size_t e = 0; e <= kSignatureBins; ++e) {
            const double edge = width * static_cast<double>(e);
            cdf[e] += std_normal_cdf((edge - xi) / h);
        }
    }
    std::vector<double> mass(kSignatureBins, 0.0);
    for (std::size_t i = 0; i < kSignatureBins; ++i)
        mass[i] = std::max(0.0, cdf[i + 1] - cdf[i]) / static_cast<double>(x.size());
    return mass;
}

std::vector<double> histogram_bin_masses(const std::vector<double>& x, double t_max) {
    const double width = t_max / static_cast<double>(kSignatureBins);
    std::vector<double> mass(kSignatureBins, 0.0);
    for (double xi : x) {
        if (xi < 0.0 || xi > t_max) continue;
        auto bin = static_cast<std::size_t>(xi / width);
        if (bin >= kSignatureBins) bin = kSignatureBins - 1;
        mass[bin] += 1.0;
    }
    return mass;
}

}  // namespace

DensityCurve density_distribution(const IatVector& iat, double t_max,
                                  DensityEstimator estimator) {
    if (iat.values.size() < 2)
        throw InsufficientData("density needs at least 2 inter-arrival times, got " +
                               std::to_string(iat.values.size()));
    if (!(t_max > 0.0)) throw Error("t_max must be positive");

    std::vector<double> mass = estimator == DensityEstimator::gaussian_kde
                                   ? kde_bin_masses(iat.values, t_max)
                                   : histogram_bin_masses(iat.values, t_max);

    double total = 0.0;
    for (double m : mass) total += m;
    if (total <= 0.0) {
        // Every observation lies beyond t_max (or the in-range mass
        // underflowed); the nearest representable statement is all mass in
        // the last bin.
        std::fill(mass.begin(), mass.end(), 0.0);
        mass.back() = 1.0;
        total = 1.0;
    }

    DensityCurve dd;
    dd.t_max = t_max;
    dd.heights.resize(kSignatureBins);
    const double width = t_max / static_cast<double>(kSignatureBins);
    for (std::size_t i = 0; i < kSignatureBins; ++i)
        dd.heights[i] = mass[i] / total / width;  // renormalize out-of-range mass
    return dd;
}

Signature to_features(const DensityCurve& dd, std::optional<std::string> label,
                      const FilterSpec& f, std::string session_id) {
    Signature s;
    s.features.resize(kSignatureBins);
    for (std::size_t i = 0; i < kSignatureBins; ++i) s.features[i] = dd.bin_area(i);
    s.label = std::move(label);
    s.filter = f;
    s.t_max = dd.t_max;
    s.session_id = std::move(session_id);
    return s;
}

std::string signature_batch_to_json(std::span<const Signature> signatures) {
    if (signatures.empty()) throw Error("cannot serialize an empty signature batch");
    const FilterSpec& filter = signatures.front().filter;
    const double t_max = signatures.front().t_max;
    json doc;
    doc["schema_version"] = 1;
    doc["filter"] = filter.name();
    doc["t_max"] = double_to_string(t_max);
    json arr = json::array();
    for (const Signature& s : signatures) {
        if (s.filter != filter || s.t_max != t_max)
            throw Error("signature batch must share one filter and t_max");
        json js;
        js["session"] = s.session_id;
        js["label"] = s.label ? json(*s.label) : json(nullptr);
        js["features"] = s.features;
        arr.push_back(std::move(js));
    }
    doc["signatures"] = std::move(arr);
    return doc.dump(2) + "\n";
}

std::vector<Signature> signature_batch_from_json(std::string_view text) {
    json doc = json::parse(text);
    const FilterSpec filter = FilterSpec::from_name(doc.at("filter").get<std::string>());
    const double t_max = double_from_string(doc.at("t_max").get<std::string>());
    std::vector<Signature> out;
    for (const json& js : doc.at("signatures")) {
        Signature s;
        s.session_id = js.at("session").get<std::string>();
        if (!js.at("label").is_null()) s.label = js.at("label").get<std::string>();
        s.features = js.at("features").get<std::vector<double>>();
        if (s.features.size() != kSignatureBins)
            throw Error("signature with " + std::to_string(s.features.size()) + " features");
        s.filter = filter;
        s.t_max = t_max;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace btprint
