#pragma once

namespace jtcqed {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace jtcqed
