#pragma once

#include <cstdint>
#include <string>

namespace casc {

// %.*g rendering; the fixed precision keeps every CSV byte-deterministic.
std::string fmt_g(double value, int precision = 9);

// Thresholds are grid multiples; 6 significant digits absorbs the
// accumulated float error (0.15000000000000002 -> "0.15").
inline std::string fmt_threshold(double value) { return fmt_g(value, 6); }

std::string csv_escape(const std::string& field);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace casc
