#pragma once

namespace adqc {

inline constexpr const char* version = "0.1.0";

}  // namespace adqc
