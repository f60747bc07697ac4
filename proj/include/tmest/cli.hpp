#ifndef TMEST_CLI_HPP
#define TMEST_CLI_HPP

#include <cstdint>
#include <iosfwd>

#include "tmest/rng.hpp"
#include "tmest/tm.hpp"

namespace tmest {

/// p demands following the normalized power law y^alpha, scaled so the
/// largest equals `max_mbps`.
TrafficVector synth_tm(std::size_t p, double alpha, double max_mbps, Rng& rng);

/// Entry point of the `tmest` tool. Returns 0 on success, 1 on data or
/// computation errors, 2 on usage errors; diagnostics go to `err` with an
/// `error:` prefix.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmest

#endif  // TMEST_CLI_HPP
