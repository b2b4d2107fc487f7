#include "caas/beamforming.hpp"

#include <algorithm>
#include <cmath>

namespace caas::beamforming {

std::vector<BeamAssignment> point_beams(std::span<const Assignment> assignments,
                                        const std::map<UeId, GroundPoint>& ue_positions) {
    std::vector<BeamAssignment> beams;
    beams.reserve(assignments.size());
    for (const auto& a : assignments) {
        auto it = ue_positions.find(a.ue_id);
        if (it == ue_positions.end()) throw Error(ErrorKind::Lookup, "unknown UE " + std::to_string(a.ue_id));
        beams.push_back({a.ue_id, a.satellite_id, it->second, 1.0});
    }
    return beams;
}

namespace {

double link_rate(double signal, double interference_plus_noise, const channel::LinkParams& params) {
    return channel::achievable_rate_linear_bps(signal / interference_plus_noise, params);
}

std::vector<double> normalized_weights(std::span<const double> demands, std::size_t rows) {
    std::vector<double> w(rows, 1.0);
    if (demands.empty()) return w;
    if (demands.size() != rows) throw Error(ErrorKind::Shape, "one demand per UE row required");
    double mean = 0.0;
    for (double d : demands) mean += d;
    mean /= static_cast<double>(rows);
    if (mean > 0.0)
        for (std::size_t u = 0; u < rows; ++u) w[u] = demands[u] / mean;
    return w;
}

// Running received-power totals for incremental best response.
struct RxState {
    std::vector<double> total;  // all columns
    std::vector<double> own;    // serving columns

    void recompute(const InterferenceMatrix& m, const std::vector<double>& p) {
        total.assign(m.rows(), 0.0);
        own.assign(m.rows(), 0.0);
        for (std::size_t u = 0; u < m.rows(); ++u) {
            double t = 0.0;
            for (std::size_t b = 0; b < m.cols(); ++b) t += p[b] * m.at(u, b);
            total[u] = t;
            double o = 0.0;
            for (std::size_t b : m.serving[u]) o += p[b] * m.at(u, b);
            own[u] = o;
        }
    }
};

double ue_rate(const InterferenceMatrix& m, const std::vector<double>& p, std::size_t u, double total,
               double own, double noise, const channel::LinkParams& params) {
    const double interference = std::max(total - own, 0.0) + noise;
    double rate = 0.0;
    for (std::size_t b : m.serving[u]) rate += link_rate(p[b] * m.at(u, b), interference, params);
    return rate;
}

}  // namespace

std::vector<double> evaluate_rates(const PowerAllocation& alloc, const InterferenceMatrix& m,
                                   const channel::LinkParams& params) {
    if (alloc.power_w.size() != m.cols() || m.coefficients.size() != m.rows() * m.cols() ||
        m.serving.size() != m.rows())
        throw Error(ErrorKind::Shape, "allocation and matrix dimensions disagree");
    const double noise = channel::noise_power_w(params);
    std::vector<double> rates(m.rows(), 0.0);
    for (std::size_t u = 0; u < m.rows(); ++u) {
        double interference = noise;
        for (std::size_t b = 0; b < m.cols(); ++b) {
            const auto& sv = m.serving[u];
            if (std::find(sv.begin(), sv.end(), b) == sv.end()) interference += alloc.power_w[b] * m.at(u, b);
        }
        for (std::size_t b : m.serving[u])
            rates[u] += link_rate(alloc.power_w[b] * m.at(u, b), interference, params);
    }
    return rates;
}

double utility(std::span<const double> rates, std::span<const double> weights, double epsilon_bps) {
    double sum = 0.0;
    for (std::size_t u = 0; u < rates.size(); ++u)
        sum += (weights.empty() ? 1.0 : weights[u]) * std::log(rates[u] + epsilon_bps);
    return sum;
}

std::vector<double> power_grid(double budget_w, const AllocationOptions& options) {
    std::vector<double> grid;
    grid.push_back(0.0);
    const int n = options.grid_points;
    for (int k = 0; k < n; ++k) {
        const double below_db = n == 1 ? 0.0 : options.grid_span_db * (1.0 - static_cast<double>(k) / (n - 1));
        grid.push_back(k == n - 1 ? budget_w : budget_w * std::pow(10.0, -below_db / 10.0));
    }
    return grid;
}

PowerAllocation equal_split(const InterferenceMatrix& m, const std::map<SatelliteId, double>& budgets) {
    std::map<SatelliteId, int> beams;
    for (const auto& t : m.tx) ++beams[t.satellite_id];
    PowerAllocation a;
    a.power_w.resize(m.cols());
    for (std::size_t b = 0; b < m.cols(); ++b) {
        const auto sat = m.tx[b].satellite_id;
        auto it = budgets.find(sat);
        if (it == budgets.end()) throw Error(ErrorKind::Lookup, "no budget for satellite " + std::to_string(sat));
        if (!(it->second > 0.0)) throw Error(ErrorKind::Domain, "budgets must be positive");
        a.power_w[b] = it->second / beams[sat];
    }
    return a;
}

AllocationResult allocate_power(const InterferenceMatrix& m, const std::map<SatelliteId, double>& budgets,
                                std::span<const double> demands_bps, const channel::LinkParams& params,
                                const AllocationOptions& options, const SweepObserver& observer) {
    for (const auto& [sat, budget] : budgets)
        if (!(budget > 0.0)) throw Error(ErrorKind::Domain, "budget of satellite " + std::to_string(sat) + " not positive");
    AllocationResult result;
    if (m.cols() == 0) return result;
    if (m.coefficients.size() != m.rows() * m.cols() || m.serving.size() != m.rows())
        throw Error(ErrorKind::Shape, "malformed interference matrix");

    const auto weights = normalized_weights(demands_bps, m.rows());
    const double noise = channel::noise_power_w(params);
    const double eps = options.epsilon_bps;

    result.allocation = equal_split(m, budgets);
    auto& p = result.allocation.power_w;

    // Column -> rows it reaches, and satellite -> its columns, as dense indices.
    std::vector<std::vector<std::size_t>> reach(m.cols());
    std::vector<std::vector<char>> serves(m.cols());
    for (std::size_t b = 0; b < m.cols(); ++b) {
        for (std::size_t u = 0; u < m.rows(); ++u)
            if (m.at(u, b) > 0.0) reach[b].push_back(u);
        serves[b].resize(reach[b].size());
        for (std::size_t i = 0; i < reach[b].size(); ++i) {
            const auto& sv = m.serving[reach[b][i]];
            serves[b][i] = std::find(sv.begin(), sv.end(), b) != sv.end();
        }
    }
    std::map<SatelliteId, std::size_t> sat_index;
    for (const auto& t : m.tx) sat_index.emplace(t.satellite_id, sat_index.size());
    std::vector<std::size_t> col_sat(m.cols());
    std::vector<std::vector<std::size_t>> sat_cols(sat_index.size());
    std::vector<double> sat_budget(sat_index.size());
    std::vector<std::vector<double>> grids(sat_index.size());
    for (std::size_t b = 0; b < m.cols(); ++b) {
        col_sat[b] = sat_index.at(m.tx[b].satellite_id);
        sat_cols[col_sat[b]].push_back(b);
    }
    for (const auto& [sat, k] : sat_index) {
        sat_budget[k] = budgets.at(sat);
        grids[k] = power_grid(sat_budget[k], options);
    }

    RxState rx;
    rx.recompute(m, p);
    std::vector<double> rates(m.rows()), base_log(m.rows());
    auto refresh = [&](std::size_t u) {
        rates[u] = ue_rate(m, p, u, rx.total[u], rx.own[u], noise, params);
        base_log[u] = std::log(rates[u] + eps);
    };
    for (std::size_t u = 0; u < m.rows(); ++u) refresh(u);
    double current = utility(rates, weights, eps);
    result.sweep_utility.push_back(current);

    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        bool changed = false;
        for (std::size_t b = 0; b < m.cols(); ++b) {
            const std::size_t k = col_sat[b];
            double others = 0.0;
            for (std::size_t c : sat_cols[k])
                if (c != b) others += p[c];
            const double residual = sat_budget[k] - others;
            const double limit = residual * (1.0 + 1e-12);

            const double p_old = p[b];
            double best_gain = 0.0;
            double best_p = p_old;
            for (double cand : grids[k]) {
                if (cand > limit) break;  // grid ascends
                if (cand == p_old) continue;
                const double delta = cand - p_old;
                double gain = 0.0;
                p[b] = cand;
                for (std::size_t i = 0; i < reach[b].size(); ++i) {
                    const std::size_t u = reach[b][i];
                    const double dg = delta * m.at(u, b);
                    const double r = ue_rate(m, p, u, rx.total[u] + dg, rx.own[u] + (serves[b][i] ? dg : 0.0),
                                             noise, params);
                    gain += weights[u] * (std::log(r + eps) - base_log[u]);
                }
                p[b] = p_old;
                // Strict improvement beyond rounding keeps the recorded utility monotone.
                if (gain > best_gain + 1e-12 * (std::abs(current) + 1.0)) {
                    best_gain = gain;
                    best_p = cand;
                }
            }
            if (best_p != p_old) {
                const double delta = best_p - p_old;
                p[b] = best_p;
                for (std::size_t i = 0; i < reach[b].size(); ++i) {
                    const std::size_t u = reach[b][i];
                    const double dg = delta * m.at(u, b);
                    rx.total[u] += dg;
                    if (serves[b][i]) rx.own[u] += dg;
                    refresh(u);
                }
                current += best_gain;
                changed = true;
            }
        }
        // Fresh totals each sweep so incremental drift never accumulates.
        rx.recompute(m, p);
        for (std::size_t u = 0; u < m.rows(); ++u) refresh(u);
        const double previous = result.sweep_utility.back();
        current = utility(rates, weights, eps);
        result.sweep_utility.push_back(current);
        result.sweeps = sweep;
        if (observer) observer(sweep, result.allocation);
        if (!changed || std::abs(current - previous) < options.tolerance * std::abs(previous)) break;
    }
    return result;
}

}  // namespace caas::beamforming
