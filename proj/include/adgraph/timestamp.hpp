#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace adgraph {

/// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM|+HHMM|-HHMM)`.
/// Fractional seconds are truncated. A missing zone designator is rejected.
std::optional<UnixSeconds> parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(UnixSeconds t);

}  // namespace adgraph
