#pragma once

namespace onramp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace onramp
