#pragma once

namespace drf {

inline constexpr const char* kVersion = "0.1.0";

} // namespace drf
