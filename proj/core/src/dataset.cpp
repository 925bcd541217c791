#include "btprint/dataset.hpp"

#include <algorithm>

namespace btprint {

void Dataset::validate() const {
    if (signatures.empty()) return;
    const FilterSpec& filter = signatures.front().filter;
    const double t_max = signatures.front().t_max;
    for (const Signature& s : signatures) {
        if (!s.label) throw Error("dataset signature without a label: " + s.session_id);
        if (std::find(class_names.begin(), class_names.end(), *s.label) == class_names.end())
            throw Error("label outside class_names: " + *s.label);
        if (s.filter != filter || s.t_max != t_max)
            throw Error("dataset signatures must share one filter and t_max");
        if (s.features.size() != kSignatureBins)
            throw Error("signature with " + std::to_string(s.features.size()) + " features");
    }
}

std::size_t Dataset::class_index(const std::string& name) const {
    auto it = std::find(class_names.begin(), class_names.end(), name);
    if (it == class_names.end()) throw Error("unknown class: " + name);
    return static_cast<std::size_t>(it - class_names.begin());
}

std::vector<std::size_t> Dataset::class_supports() const {
    std::vector<std::size_t> supports(class_names.size(), 0);
    for (const Signature& s : signatures)
        if (s.label) ++supports[class_index(*s.label)];
    return supports;
}

}  // namespace btprint
