#include "erpia/report.hpp"

#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace erpia {

std::string format_number(double x) { return fmt::format("{}", x); }

void write_report(const PriceReport& r, std::ostream& out) {
    out << "method = " << r.method << '\n';
    out << "price = " << format_number(r.price) << '\n';
    out << "stderr = " << format_number(r.stderr_) << '\n';
    out << "lower = " << format_number(r.lower) << '\n';
    out << "lower_stderr = " << format_number(r.lower_stderr) << '\n';
    if (r.has_upper) {
        out << "upper = " << format_number(r.upper) << '\n';
        out << "upper_stderr = " << format_number(r.upper_stderr) << '\n';
    }
    if (r.has_policy_lower) {
        out << "policy_lower = " << format_number(r.policy_lower) << '\n';
        out << "policy_lower_stderr = " << format_number(r.policy_lower_stderr) << '\n';
    }
    if (r.has_out_of_sample) {
        out << "out_of_sample = " << format_number(r.out_of_sample) << '\n';
        out << "out_of_sample_stderr = " << format_number(r.out_of_sample_stderr) << '\n';
    }
    out << "lambda = " << format_number(r.lambda) << '\n';
    out << "iterations = " << r.iterations << '\n';
    out << "wall_seconds = " << fmt::format("{:.3f}", r.wall_seconds) << '\n';
}

std::string format_report(const PriceReport& report) {
    std::ostringstream s;
    write_report(report, s);
    return s.str();
}

void write_trace_csv(std::span<const TraceRow> trace, std::ostream& out) {
    out << "iteration,lambda,price,wall_seconds\n";
    for (const auto& row : trace)
        out << row.iteration << ',' << format_number(row.lambda) << ',' << format_number(row.price)
            << ',' << fmt::format("{:.3f}", row.wall_seconds) << '\n';
}

} // namespace erpia
