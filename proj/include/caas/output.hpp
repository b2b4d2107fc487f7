#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "caas/sim.hpp"

namespace caas::output {

// Writes through a temporary sibling file and renames it into place, so the
// target is either complete or absent. Throws ErrorKind::Io.
void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& body);

std::string metrics_json(const MetricsReport& report, const Scenario& scenario, Strategy strategy);
void write_events_jsonl(std::ostream& os, const EventLog& log);
void write_sweep_csv(std::ostream& os, const sim::SweepResult& result);
void write_allocations_csv(std::ostream& os, std::span<const sim::AllocationRecord> records);

}  // namespace caas::output
