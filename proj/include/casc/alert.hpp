#pragma once

#include <cstdint>
#include <string_view>

namespace casc {

// Three-valued spray recommendation, ordered by severity.
enum class AlertLevel : std::uint8_t {
    NoAction = 0,
    Cautious = 1,
    Spray = 2,
};

inline constexpr int kAlertLevels = 3;

// Count-to-alert rule: 0 -> NoAction, 1..7 -> Cautious, >= 8 -> Spray.
// Monotone non-decreasing in the count. Every alert in the system is derived
// through this single function.
constexpr AlertLevel alert_of_count(std::uint64_t count) {
    if (count == 0) return AlertLevel::NoAction;
    if (count <= 7) return AlertLevel::Cautious;
    return AlertLevel::Spray;
}

constexpr std::string_view alert_name(AlertLevel a) {
    switch (a) {
        case AlertLevel::NoAction: return "no_action";
        case AlertLevel::Cautious: return "cautious";
        case AlertLevel::Spray: return "spray";
    }
    return "?";
}

constexpr int alert_index(AlertLevel a) { return static_cast<int>(a); }

}  // namespace casc
