#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace md3 {

inline std::atomic<bool>& warnings_enabled() {
    static std::atomic<bool> enabled{true};
    return enabled;
}

inline void log_warning(std::string_view message) {
    if (warnings_enabled())
        std::clog << "warning: " << message << '\n';
}

} // namespace md3
