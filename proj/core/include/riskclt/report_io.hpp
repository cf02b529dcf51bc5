#pragma once

#include <ostream>

#include "riskclt/simulation.hpp"

namespace riskclt {

/// Plain `key = value` report, one section per sample size. Doubles are
/// printed with 17 significant digits so equal reports are byte-identical.
/// Wall-clock time is emitted only when `include_timing` is set.
void write_report(std::ostream& out, const SimulationReport& report, bool include_timing = false);

/// CSV with header `n,replicate,estimate`; failed replicates print `nan`.
void write_table(std::ostream& out, const SimulationReport& report);

}  // namespace riskclt
