#pragma once

#include <iosfwd>
#include <span>

#include "caas/constellation.hpp"

namespace caas::channel {

using constellation::GroundPoint;
using constellation::SatelliteState;

struct LinkParams {
    double carrier_frequency_hz = 2e9;
    double bandwidth_hz = 30e6;
    double tx_power_dbw = 34.0;  // per satellite
    double sat_antenna_gain_boresight_dbi = 30.0;
    double ue_antenna_gain_dbi = 0.0;
    double noise_temperature_k = 290.0;
    double beamwidth_3db_deg = 4.0;
    double spectral_efficiency_cap = 7.8;  // b/s/Hz
    double excess_loss_db = 0.0;

    void validate() const;
    double tx_power_w() const;
};

inline constexpr double kSidelobeFloorDb = 30.0;

struct CsiSample {
    double time_s = 0.0;
    SatelliteId satellite_id = 0;
    UeId ue_id = 0;
    double channel_gain_db = 0.0;
    double path_loss_db = 0.0;
    double doppler_hz = 0.0;

    bool operator==(const CsiSample&) const = default;
};

double free_space_path_loss_db(double distance_km, double frequency_hz);

// Positive while the satellite approaches the ground point.
double doppler_shift_hz(const SatelliteState& state, const GroundPoint& gp, double frequency_hz);

// Gaussian main lobe with a sidelobe floor kSidelobeFloorDb below boresight.
double beam_gain_dbi(double off_boresight_deg, const LinkParams& params);

// Angle at the satellite between the directions to `target` and `gp`.
double off_boresight_deg(const SatelliteState& state, const GroundPoint& boresight_target,
                         const GroundPoint& gp);

// Throws ErrorKind::NotVisible when the satellite is below the horizon at gp.
CsiSample csi_sample(const SatelliteState& state, const GroundPoint& gp,
                     const GroundPoint& boresight_target, const LinkParams& params, double t_s,
                     UeId ue_id = 0);

double noise_power_w(const LinkParams& params);
double noise_power_dbm(const LinkParams& params);

double sinr_db(double serving_rx_dbm, std::span<const double> interferer_rx_dbm,
               const LinkParams& params);

double achievable_rate_bps(double sinr_db, const LinkParams& params);
double achievable_rate_linear_bps(double sinr_linear, const LinkParams& params);

// CSV header time_s,sat_id,ue_id,gain_db,path_loss_db,doppler_hz.
void write_csi_csv_header(std::ostream& os);
void write_csi_csv_row(std::ostream& os, const CsiSample& s);

}  // namespace caas::channel
