#pragma once

#include <deque>
#include <span>
#include <vector>

#include "caas/channel.hpp"

namespace caas::prediction {

using channel::CsiSample;
using channel::LinkParams;
using constellation::GroundPoint;

inline constexpr std::size_t kDefaultHistoryCapacity = 16;
inline constexpr double kDefaultTemperatureS = 2.0;

// Bounded per-link CSI history, oldest sample first.
class CsiHistory {
public:
    CsiHistory(SatelliteId sat, UeId ue, std::size_t capacity = kDefaultHistoryCapacity);

    SatelliteId satellite_id() const { return sat_; }
    UeId ue_id() const { return ue_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const std::deque<CsiSample>& samples() const { return samples_; }

    // Throws ErrorKind::Ordering unless sample.time_s exceeds the last stored time.
    void push(const CsiSample& sample);

private:
    SatelliteId sat_;
    UeId ue_;
    std::size_t capacity_;
    std::deque<CsiSample> samples_;
};

CsiHistory push_sample(CsiHistory history, const CsiSample& sample);

CsiSample predict_csi_ephemeris(const constellation::SatelliteOrbit& orbit, const GroundPoint& gp,
                                const GroundPoint& boresight, const LinkParams& params,
                                double t_future, double mask_deg = constellation::kDefaultMaskDeg,
                                UeId ue_id = 0);

// softmax(-|t_future - t_i| / tau) over the stored samples. tau = 0 puts all
// weight on the nearest sample(s).
std::vector<double> attention_weights(const CsiHistory& history, double t_future,
                                      double tau_s = kDefaultTemperatureS);

// Attention-weighted linear extrapolation of every CSI field.
CsiSample predict_csi_attention(const CsiHistory& history, double t_future,
                                double tau_s = kDefaultTemperatureS);

// ============================================================
// Interference matrix
// ============================================================

struct Assignment {
    UeId ue_id = 0;
    SatelliteId satellite_id = 0;
    bool operator==(const Assignment&) const = default;
};

// One transmitter is one beam of one satellite.
struct Transmitter {
    SatelliteId satellite_id = 0;
    UeId beam_ue = 0;
    GroundPoint boresight;
};

struct InterferenceMatrix {
    std::vector<UeId> ue_ids;
    std::vector<Transmitter> tx;
    std::vector<double> coefficients;  // row-major, rows = ue_ids, cols = tx
    std::vector<std::vector<std::size_t>> serving;  // per row: tx columns serving that UE

    std::size_t rows() const { return ue_ids.size(); }
    std::size_t cols() const { return tx.size(); }
    double at(std::size_t u, std::size_t b) const { return coefficients[u * tx.size() + b]; }
    double& at(std::size_t u, std::size_t b) { return coefficients[u * tx.size() + b]; }
};

// Satellite states sorted by id, UE positions indexed by position in ue_ids.
struct LinkGeometry {
    std::span<const constellation::SatelliteState> states;
    std::span<const UeId> ue_ids;
    std::span<const GroundPoint> ue_positions;

    const constellation::SatelliteState& state_of(SatelliteId id) const;
    const GroundPoint& position_of(UeId id) const;
};

// Linear channel gain from beam `tx` to a UE at `gp`; zero below the horizon.
double link_gain_linear(const constellation::SatelliteState& sat, const GroundPoint& boresight,
                        const GroundPoint& gp, const LinkParams& params);

// Rows cover geometry.ue_ids. Throws ErrorKind::CoverageViolation when an
// assigned satellite does not cover its UE in the snapshot (ground_point_id = UeId).
InterferenceMatrix interference_matrix(const constellation::CoverageSnapshot& snapshot,
                                       std::span<const Assignment> assignments,
                                       std::span<const GroundPoint> boresights,
                                       const LinkParams& params, const LinkGeometry& geometry);
InterferenceMatrix interference_matrix_serial(const constellation::CoverageSnapshot& snapshot,
                                              std::span<const Assignment> assignments,
                                              std::span<const GroundPoint> boresights,
                                              const LinkParams& params, const LinkGeometry& geometry);

}  // namespace caas::prediction
