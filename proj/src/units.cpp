#include "qdynkit/units.hpp"

#include <charconv>
#include <string>

#include "qdynkit/error.hpp"

namespace qdk::units {

std::string_view to_string(Dimension d) {
    switch (d) {
    case Dimension::time: return "time";
    case Dimension::energy: return "energy";
    case Dimension::field: return "field";
    default: return "dimensionless";
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace

double parse_quantity(std::string_view text, Dimension dim) {
    const std::string_view s = trim(text);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || end == s.data())
        throw ConfigError("malformed quantity '" + std::string(text) + "'");
    const std::string_view unit = trim(std::string_view(end, static_cast<std::size_t>(s.data() + s.size() - end)));
    if (unit.empty() || unit == "au") return value;

    Dimension unit_dim = Dimension::none;
    double factor = 1.0;
    if (unit == "fs") {
        unit_dim = Dimension::time;
        factor = fs;
    } else if (unit == "cm-1" || unit == "cm^-1" || unit == "1/cm") {
        unit_dim = Dimension::energy;
        factor = cm1;
    } else if (unit == "MV/cm") {
        unit_dim = Dimension::field;
        factor = mv_per_cm;
    } else {
        throw ConfigError("unknown unit '" + std::string(unit) + "' (valid: fs, cm-1, MV/cm, au)");
    }
    if (unit_dim != dim)
        throw ConfigError("unit '" + std::string(unit) + "' measures " + std::string(to_string(unit_dim)) +
                          ", expected " + std::string(to_string(dim)));
    return value * factor;
}

} // namespace qdk::units
