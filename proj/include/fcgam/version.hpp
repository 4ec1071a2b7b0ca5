#pragma once

namespace fcgam {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fcgam
