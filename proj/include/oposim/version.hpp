#pragma once

namespace oposim {

inline constexpr const char* kVersion = "0.1.0";

}
