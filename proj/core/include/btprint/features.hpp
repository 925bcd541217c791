#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btprint/filter.hpp"
#include "btprint/packet.hpp"

namespace btprint {

/// Number of histogram bins a signature carries, fixed for every session.
inline constexpr std::size_t kSignatureBins = 300;

/// Inter-arrival times of one session, in seconds, zero deltas removed.
struct IatVector {
    std::vector<double> values;
    std::string session_id;
};

/// values[i] = ts[i+1] - ts[i] in seconds; duplicates (zero deltas) dropped;
/// both directions pooled. Sessions with fewer than 2 packets yield an
/// empty vector. Expects the session time-ordered.
IatVector extract_iat(std::span<const PacketRecord> session);

enum class DensityEstimator { gaussian_kde, histogram };

/// A probability density over [0, t_max] sampled as 300 equal-width bins.
/// Heights are nonnegative and integrate to 1.
struct DensityCurve {
    double t_max = 0.0;
    std::vector<double> heights;  // kSignatureBins entries

    double bin_width() const { return t_max / static_cast<double>(kSignatureBins); }
    double bin_area(std::size_t i) const { return heights[i] * bin_width(); }
};

/// Estimates the IAT density and integrates it over 300 bins spanning
/// [0, t_max]. The default estimator is a Gaussian KDE with Silverman
/// bandwidth h = 0.9 * min(sigma, IQR/1.34) * n^(-1/5), clipped below at
/// 1e-9 s; probability mass outside [0, t_max] is renormalized back in.
/// The histogram estimator is a raw-count fallback for ablation runs.
///
/// Throws InsufficientData when iat has fewer than 2 values.
DensityCurve density_distribution(const IatVector& iat, double t_max,
                                  DensityEstimator estimator = DensityEstimator::gaussian_kde);

/// A 300-dimensional density-histogram feature vector. features[i] is the
/// area of bin i, so the entries are in [0,1] and sum to 1.
struct Signature {
    std::vector<double> features;       // kSignatureBins entries
    std::optional<std::string> label;   // nullopt = unknown
    FilterSpec filter;
    double t_max = 0.0;
    std::string session_id;
};

Signature to_features(const DensityCurve& dd, std::optional<std::string> label,
                      const FilterSpec& f, std::string session_id);

/// Sorted-percentile with linear interpolation, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Signature database document: {schema_version, filter, t_max, signatures}.
/// All signatures must share one filter and t_max.
std::string signature_batch_to_json(std::span<const Signature> signatures);
std::vector<Signature> signature_batch_from_json(std::string_view text);

}  // namespace btprint
