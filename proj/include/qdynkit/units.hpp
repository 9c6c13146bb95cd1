#pragma once

#include <string_view>

namespace qdk::units {

/// Atomic units per femtosecond.
inline constexpr double fs = 41.341373;
/// Hartree per wavenumber.
inline constexpr double cm1 = 1.0 / 219474.63;
/// Atomic field units per MV/cm.
inline constexpr double mv_per_cm = 1.0 / 5142.2064;

enum class Dimension { none, time, energy, field };

std::string_view to_string(Dimension d);

/// Parses "<number> [unit]" into atomic units. Accepted units: fs (time),
/// cm-1 (energy or frequency), MV/cm (field) and au (any dimension). A bare
/// number is taken as atomic units. Throws ConfigError on malformed text or a
/// unit of the wrong dimension.
double parse_quantity(std::string_view text, Dimension dim);

} // namespace qdk::units
