#pragma once

#include <map>
#include <string>

namespace markinspect {

inline constexpr const char* kToolVersion = "0.1.0";

// Bumped whenever a detector's observable behavior changes; reports carry
// these so identical inputs plus identical versions imply identical output.
inline std::map<std::string, std::string> detector_versions()
{
    return {
        { "metadata", "1" }, { "c2pa", "1" },        { "lsb", "1" },
        { "dwtdct", "1" },   { "fingerprint", "1" },
    };
}

} // namespace markinspect
