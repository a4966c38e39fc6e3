#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "erpia/pia.hpp"

namespace erpia {

/// `key = value` block, one field per line, fixed order.
void write_report(const PriceReport& report, std::ostream& out);
[[nodiscard]] std::string format_report(const PriceReport& report);

/// CSV `iteration,lambda,price,wall_seconds`.
void write_trace_csv(std::span<const TraceRow> trace, std::ostream& out);

/// Shortest round-trip decimal representation, independent of locale.
[[nodiscard]] std::string format_number(double x);

} // namespace erpia
