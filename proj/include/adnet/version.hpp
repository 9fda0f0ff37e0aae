#pragma once

namespace adnet {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace adnet
