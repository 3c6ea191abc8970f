#pragma once

namespace malalab {

inline constexpr const char* kVersion = "0.1.0";

}
