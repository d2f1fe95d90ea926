#pragma once

namespace qcr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qcr
