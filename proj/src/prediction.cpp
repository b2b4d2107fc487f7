#include "caas/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace caas::prediction {

CsiHistory::CsiHistory(SatelliteId sat, UeId ue, std::size_t capacity)
    : sat_(sat), ue_(ue), capacity_(capacity) {
    if (capacity_ == 0) throw Error(ErrorKind::Domain, "history capacity must be positive");
}

void CsiHistory::push(const CsiSample& sample) {
    if (!samples_.empty() && !(sample.time_s > samples_.back().time_s))
        throw Error(ErrorKind::Ordering, "CSI sample time must increase");
    samples_.push_back(sample);
    if (samples_.size() > capacity_) samples_.pop_front();
}

CsiHistory push_sample(CsiHistory history, const CsiSample& sample) {
    history.push(sample);
    return history;
}

CsiSample predict_csi_ephemeris(const constellation::SatelliteOrbit& orbit, const GroundPoint& gp,
                                const GroundPoint& boresight, const LinkParams& params,
                                double t_future, double mask_deg, UeId ue_id) {
    const auto state = constellation::propagate(orbit, t_future);
    if (constellation::elevation_deg(state, gp) < mask_deg)
        throw Error(ErrorKind::NotVisible,
                    "satellite " + std::to_string(orbit.id) + " below mask at t=" + std::to_string(t_future));
    return channel::csi_sample(state, gp, boresight, params, t_future, ue_id);
}

std::vector<double> attention_weights(const CsiHistory& history, double t_future, double tau_s) {
    const auto& s = history.samples();
    if (s.empty()) throw Error(ErrorKind::InsufficientData, "attention predictor needs history");
    if (tau_s < 0.0) throw Error(ErrorKind::Domain, "temperature must be non-negative");
    std::vector<double> w(s.size());
    if (tau_s == 0.0) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& x : s) best = std::min(best, std::abs(t_future - x.time_s));
        double count = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            w[i] = std::abs(t_future - s[i].time_s) == best ? 1.0 : 0.0;
            count += w[i];
        }
        for (double& x : w) x /= count;
        return w;
    }
    // Scores are shifted by their maximum before exponentiation.
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        w[i] = -std::abs(t_future - s[i].time_s) / tau_s;
        max_score = std::max(max_score, w[i]);
    }
    double sum = 0.0;
    for (double& x : w) {
        x = std::exp(x - max_score);
        sum += x;
    }
    for (double& x : w) x /= sum;
    return w;
}

CsiSample predict_csi_attention(const CsiHistory& history, double t_future, double tau_s) {
    const auto& s = history.samples();
    if (s.empty()) throw Error(ErrorKind::InsufficientData, "attention predictor needs history");
    if (!(t_future > s.back().time_s))
        throw Error(ErrorKind::Ordering, "prediction time must follow the last sample");
    const auto w = attention_weights(history, t_future, tau_s);

    CsiSample out;
    out.time_s = t_future;
    out.satellite_id = history.satellite_id();
    out.ue_id = history.ue_id();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double lead = t_future - s[i].time_s;
        double dg = 0.0, dl = 0.0, dd = 0.0;
        if (i > 0) {
            const double dt = s[i].time_s - s[i - 1].time_s;
            dg = (s[i].channel_gain_db - s[i - 1].channel_gain_db) / dt;
            dl = (s[i].path_loss_db - s[i - 1].path_loss_db) / dt;
            dd = (s[i].doppler_hz - s[i - 1].doppler_hz) / dt;
        }
        out.channel_gain_db += w[i] * (s[i].channel_gain_db + dg * lead);
        out.path_loss_db += w[i] * (s[i].path_loss_db + dl * lead);
        out.doppler_hz += w[i] * (s[i].doppler_hz + dd * lead);
    }
    return out;
}

// ============================================================
// Interference matrix
// ============================================================

const constellation::SatelliteState& LinkGeometry::state_of(SatelliteId id) const {
    auto it = std::lower_bound(states.begin(), states.end(), id,
                               [](const constellation::SatelliteState& s, SatelliteId k) { return s.id < k; });
    if (it == states.end() || it->id != id)
        throw Error(ErrorKind::Lookup, "unknown satellite " + std::to_string(id));
    return *it;
}

const GroundPoint& LinkGeometry::position_of(UeId id) const {
    for (std::size_t i = 0; i < ue_ids.size(); ++i)
        if (ue_ids[i] == id) return ue_positions[i];
    throw Error(ErrorKind::Lookup, "unknown UE " + std::to_string(id));
}

double link_gain_linear(const constellation::SatelliteState& sat, const GroundPoint& boresight,
                        const GroundPoint& gp, const LinkParams& params) {
    const Vec3 g = gp.ecef();
    if (constellation::elevation_deg(sat.position_km, g) <= 0.0) return 0.0;
    const Vec3 to_ue = g - sat.position_km;
    const double off = angle_between_deg(boresight.ecef() - sat.position_km, to_ue);
    const double db = channel::beam_gain_dbi(off, params) + params.ue_antenna_gain_dbi -
                      channel::free_space_path_loss_db(to_ue.norm(), params.carrier_frequency_hz) -
                      params.excess_loss_db;
    return db_to_linear(db);
}

namespace {

InterferenceMatrix build_matrix(const constellation::CoverageSnapshot& snapshot,
                                std::span<const Assignment> assignments,
                                std::span<const GroundPoint> boresights, const LinkParams& params,
                                const LinkGeometry& geometry, bool parallel) {
    if (boresights.size() != assignments.size())
        throw Error(ErrorKind::Shape, "one boresight per assignment required");
    InterferenceMatrix m;
    m.ue_ids.assign(geometry.ue_ids.begin(), geometry.ue_ids.end());
    m.serving.resize(m.ue_ids.size());
    for (std::size_t b = 0; b < assignments.size(); ++b) {
        const auto& a = assignments[b];
        if (!snapshot.find(a.satellite_id, a.ue_id))
            throw Error(ErrorKind::CoverageViolation, "satellite " + std::to_string(a.satellite_id) +
                                                          " does not cover UE " + std::to_string(a.ue_id));
        m.tx.push_back({a.satellite_id, a.ue_id, boresights[b]});
        auto row = std::find(m.ue_ids.begin(), m.ue_ids.end(), a.ue_id);
        if (row == m.ue_ids.end()) throw Error(ErrorKind::Lookup, "assigned UE missing from geometry");
        m.serving[static_cast<std::size_t>(row - m.ue_ids.begin())].push_back(b);
    }
    std::vector<const constellation::SatelliteState*> tx_state(m.tx.size());
    for (std::size_t b = 0; b < m.tx.size(); ++b) tx_state[b] = &geometry.state_of(m.tx[b].satellite_id);

    m.coefficients.assign(m.rows() * m.cols(), 0.0);
    const long rows = static_cast<long>(m.rows());
#pragma omp parallel for schedule(static) if (parallel)
    for (long u = 0; u < rows; ++u) {
        const auto& gp = geometry.ue_positions[static_cast<std::size_t>(u)];
        for (std::size_t b = 0; b < m.cols(); ++b)
            m.at(static_cast<std::size_t>(u), b) = link_gain_linear(*tx_state[b], m.tx[b].boresight, gp, params);
    }
    return m;
}

}  // namespace

InterferenceMatrix interference_matrix(const constellation::CoverageSnapshot& snapshot,
                                       std::span<const Assignment> assignments,
                                       std::span<const GroundPoint> boresights,
                                       const LinkParams& params, const LinkGeometry& geometry) {
    return build_matrix(snapshot, assignments, boresights, params, geometry, true);
}

InterferenceMatrix interference_matrix_serial(const constellation::CoverageSnapshot& snapshot,
                                              std::span<const Assignment> assignments,
                                              std::span<const GroundPoint> boresights,
                                              const LinkParams& params, const LinkGeometry& geometry) {
    return build_matrix(snapshot, assignments, boresights, params, geometry, false);
}

}  // namespace caas::prediction
