#pragma once

namespace oce {

inline constexpr const char* kVersion = "0.1.0";

} // namespace oce
