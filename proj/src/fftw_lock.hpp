#pragma once

#include <mutex>

namespace roughfem::detail {

// FFTW planning is not thread-safe; plan execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace roughfem::detail
