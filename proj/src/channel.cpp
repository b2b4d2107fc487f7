#include "caas/channel.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace caas::channel {

void LinkParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorKind::Domain, std::string(name) + " must be positive");
    };
    positive(carrier_frequency_hz, "carrier_frequency");
    positive(bandwidth_hz, "bandwidth");
    positive(noise_temperature_k, "noise_temperature");
    positive(beamwidth_3db_deg, "beamwidth_3db");
    positive(spectral_efficiency_cap, "spectral_efficiency_cap");
    if (!std::isfinite(tx_power_dbw) || !std::isfinite(sat_antenna_gain_boresight_dbi) ||
        !std::isfinite(ue_antenna_gain_dbi) || !std::isfinite(excess_loss_db) || excess_loss_db < 0.0)
        throw Error(ErrorKind::Domain, "link gains and losses must be finite, excess loss >= 0");
}

double LinkParams::tx_power_w() const { return db_to_linear(tx_power_dbw); }

double free_space_path_loss_db(double distance_km, double frequency_hz) {
    if (!(distance_km > 0.0) || !(frequency_hz > 0.0))
        throw Error(ErrorKind::Domain, "path loss needs positive distance and frequency");
    return 32.45 + 20.0 * std::log10(distance_km) + 20.0 * std::log10(frequency_hz / 1e6);
}

double doppler_shift_hz(const SatelliteState& state, const GroundPoint& gp, double frequency_hz) {
    const Vec3 los = state.position_km - gp.ecef();
    const double range_rate = state.velocity_km_s.dot(los) / los.norm();
    return -(range_rate / kSpeedOfLightKmS) * frequency_hz;
}

double beam_gain_dbi(double off_boresight_deg, const LinkParams& params) {
    const double x = off_boresight_deg / (0.5 * params.beamwidth_3db_deg);
    const double g = params.sat_antenna_gain_boresight_dbi - 3.0 * x * x;
    return std::max(g, params.sat_antenna_gain_boresight_dbi - kSidelobeFloorDb);
}

double off_boresight_deg(const SatelliteState& state, const GroundPoint& boresight_target,
                         const GroundPoint& gp) {
    return angle_between_deg(boresight_target.ecef() - state.position_km, gp.ecef() - state.position_km);
}

CsiSample csi_sample(const SatelliteState& state, const GroundPoint& gp,
                     const GroundPoint& boresight_target, const LinkParams& params, double t_s,
                     UeId ue_id) {
    if (constellation::elevation_deg(state, gp) < 0.0)
        throw Error(ErrorKind::NotVisible, "satellite " + std::to_string(state.id) + " below horizon");
    CsiSample s;
    s.time_s = t_s;
    s.satellite_id = state.id;
    s.ue_id = ue_id;
    s.path_loss_db = free_space_path_loss_db(constellation::slant_range_km(state, gp),
                                             params.carrier_frequency_hz) +
                     params.excess_loss_db;
    s.channel_gain_db = beam_gain_dbi(off_boresight_deg(state, boresight_target, gp), params) +
                        params.ue_antenna_gain_dbi - s.path_loss_db;
    s.doppler_hz = doppler_shift_hz(state, gp, params.carrier_frequency_hz);
    return s;
}

double noise_power_w(const LinkParams& params) {
    return kBoltzmann * params.noise_temperature_k * params.bandwidth_hz;
}

double noise_power_dbm(const LinkParams& params) { return linear_to_db(noise_power_w(params)) + 30.0; }

double sinr_db(double serving_rx_dbm, std::span<const double> interferer_rx_dbm,
               const LinkParams& params) {
    double denom_mw = db_to_linear(noise_power_dbm(params));
    for (double i : interferer_rx_dbm) denom_mw += db_to_linear(i);
    return serving_rx_dbm - linear_to_db(denom_mw);
}

double achievable_rate_linear_bps(double sinr_linear, const LinkParams& params) {
    if (!(sinr_linear > 0.0)) return 0.0;
    return params.bandwidth_hz * std::min(std::log2(1.0 + sinr_linear), params.spectral_efficiency_cap);
}

double achievable_rate_bps(double sinr_db, const LinkParams& params) {
    if (sinr_db == -std::numeric_limits<double>::infinity()) return 0.0;
    return achievable_rate_linear_bps(db_to_linear(sinr_db), params);
}

void write_csi_csv_header(std::ostream& os) { os << "time_s,sat_id,ue_id,gain_db,path_loss_db,doppler_hz\n"; }

void write_csi_csv_row(std::ostream& os, const CsiSample& s) {
    os << s.time_s << ',' << s.satellite_id << ',' << s.ue_id << ',' << s.channel_gain_db << ','
       << s.path_loss_db << ',' << s.doppler_hz << '\n';
}

}  // namespace caas::channel
