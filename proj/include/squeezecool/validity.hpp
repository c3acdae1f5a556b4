#pragma once

#include <string>
#include <vector>

namespace squeezecool {

/// A "should be much smaller than" condition, reported rather than enforced.
struct ValidityFlag {
    std::string name;
    double ratio = 0.0;
    double threshold = 0.0;

    bool violated() const { return !(ratio <= threshold); }
};

inline bool any_violated(const std::vector<ValidityFlag>& flags) {
    for (const auto& f : flags)
        if (f.violated()) return true;
    return false;
}

}  // namespace squeezecool
