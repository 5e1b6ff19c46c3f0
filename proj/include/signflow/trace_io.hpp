#pragma once

#include <string>

#include "signflow/core.hpp"

namespace signflow {

/// Exact trace CSV header.
inline constexpr const char* kTraceHeader =
    "iter,f_gap,dist_sq,eta,grad_l1,active_size,S_k,freezes,slides,restarts";

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Trace as CSV; f_gap and dist_sq cells are empty when the run had no reference.
std::string trace_csv(const RunTrace& trace);

/// Writes `content` to `path`, creating parent directories. Throws std::runtime_error.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace signflow
