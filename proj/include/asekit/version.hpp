// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace asekit {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace asekit
