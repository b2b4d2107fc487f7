#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "caas/prediction.hpp"

namespace caas::beamforming {

using constellation::GroundPoint;
using prediction::Assignment;
using prediction::InterferenceMatrix;

struct BeamAssignment {
    UeId ue_id = 0;
    SatelliteId satellite_id = 0;
    GroundPoint boresight;
    double bandwidth_share = 1.0;
};

// Boresight on the UE; full-band reuse. Throws ErrorKind::Lookup for unknown UEs.
std::vector<BeamAssignment> point_beams(std::span<const Assignment> assignments,
                                        const std::map<UeId, GroundPoint>& ue_positions);

struct PowerAllocation {
    std::vector<double> power_w;  // indexed like InterferenceMatrix columns
};

struct AllocationOptions {
    double epsilon_bps = 1.0;
    int grid_points = 32;
    double grid_span_db = 60.0;
    int max_sweeps = 100;
    double tolerance = 1e-6;  // relative utility improvement per sweep
};

struct AllocationResult {
    PowerAllocation allocation;
    // sweep_utility[0] is the equal-split utility, entry k the utility after sweep k.
    std::vector<double> sweep_utility;
    int sweeps = 0;
};

using SweepObserver = std::function<void(int sweep, const PowerAllocation&)>;

// Per-UE rates: each serving column is a separate aggregated link; other
// columns interfere.
std::vector<double> evaluate_rates(const PowerAllocation& alloc, const InterferenceMatrix& m,
                                   const channel::LinkParams& params);

// Sum of weight_u * log(rate_u + epsilon); empty weights mean all ones.
double utility(std::span<const double> rates, std::span<const double> weights, double epsilon_bps);

// Candidate powers for one beam: a logarithmic grid up to the budget, plus zero.
std::vector<double> power_grid(double budget_w, const AllocationOptions& options);

// Initial point: each satellite's budget split equally across its beams.
PowerAllocation equal_split(const InterferenceMatrix& m, const std::map<SatelliteId, double>& budgets);

// Best-response maximisation of the demand-weighted proportional-fair utility.
// Demands weight each UE by demand / mean demand; an empty span weights all UEs equally.
AllocationResult allocate_power(const InterferenceMatrix& m, const std::map<SatelliteId, double>& budgets,
                                std::span<const double> demands_bps, const channel::LinkParams& params,
                                const AllocationOptions& options = {}, const SweepObserver& observer = {});

}  // namespace caas::beamforming
