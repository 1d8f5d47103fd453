#pragma once

// Experiment driver: one subcommand per experiment, each writing
// <out>/<command>.csv and a run summary.

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace nlshape::cli {

inline constexpr const char* kVersion = "1.0.0";

/// "16,32,64", "16..256" (unit step), "16..256:16" (arithmetic) or
/// "16..256x2" (geometric). Result must be strictly increasing.
std::vector<std::size_t> parse_integer_schedule(std::string_view text);

/// Same syntax for reals, e.g. "1e-1,1e-2" or "0.1..0.001x0.1".
/// Monotonicity is checked by the consumer.
std::vector<double> parse_real_schedule(std::string_view text);

/// Runs the driver. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlshape::cli
