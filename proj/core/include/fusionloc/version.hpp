#pragma once

namespace fusionloc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fusionloc
