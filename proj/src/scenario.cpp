#include "caas/scenario.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace caas {

using nlohmann::json;

const char* to_string(Strategy s) { return s == Strategy::Caas ? "caas" : "standalone"; }

Strategy parse_strategy(const std::string& s) {
    if (s == "caas") return Strategy::Caas;
    if (s == "standalone") return Strategy::Standalone;
    throw Error(ErrorKind::Parse, "unknown strategy '" + s + "' (expected caas|standalone)");
}

void Scenario::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); };
    if (shells.empty()) fail("at least one shell required");
    for (const auto& s : shells) s.validate();
    area.validate();
    if (ue_count < 0) fail("ue_count must be >= 0");
    if (!(duration_s >= 0.0)) fail("duration must be >= 0");
    if (!(time_step_s > 0.0)) fail("time_step must be > 0");
    if (!(mask_deg >= 0.0 && mask_deg < 90.0)) fail("mask must lie in [0, 90)");
    if (!(demand_mean_bps > 0.0 && demand_unit_bps > 0.0)) fail("demand parameters must be positive");
    link.validate();
    handover.weights.validate();
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::Parse, path + ": " + what);
}

// Reads an object field by field; leftover keys are rejected by finish().
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) parse_fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) parse_fail(key_path(key), "missing required key");
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> fallback,
                  std::function<bool(double)> ok = nullptr, const char* range = nullptr) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!fallback) parse_fail(key_path(key), "missing required key");
            return *fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number()) parse_fail(key_path(key), "expected a number");
        const double x = v.get<double>();
        if (ok && !ok(x)) parse_fail(key_path(key), std::string("value out of range ") + (range ? range : ""));
        return x;
    }

    long integer(const std::string& key, std::optional<long> fallback, std::function<bool(long)> ok = nullptr,
                 const char* range = nullptr) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!fallback) parse_fail(key_path(key), "missing required key");
            return *fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) parse_fail(key_path(key), "expected an integer");
        const long x = v.get<long>();
        if (ok && !ok(x)) parse_fail(key_path(key), std::string("value out of range ") + (range ? range : ""));
        return x;
    }

    std::string string(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        if (!j_.at(key).is_string()) parse_fail(key_path(key), "expected a string");
        return j_.at(key).get<std::string>();
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) parse_fail(key_path(k), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

auto positive = [](double x) { return x > 0.0; };
auto non_negative = [](double x) { return x >= 0.0; };

constellation::OrbitalShell read_shell(const json& j, const std::string& path, int index) {
    ObjectReader r(j, path);
    constellation::OrbitalShell s;
    s.shell_id = index;
    s.satellite_count = static_cast<int>(r.integer("satellite_count", std::nullopt, [](long x) { return x > 0; }, "(> 0)"));
    s.plane_count = static_cast<int>(r.integer("plane_count", std::nullopt, [](long x) { return x > 0; }, "(> 0)"));
    s.inclination_deg = r.number("inclination_deg", std::nullopt, [](double x) { return x >= 0.0 && x <= 180.0; }, "[0, 180]");
    s.altitude_km = r.number("altitude_km", std::nullopt, positive, "(> 0)");
    s.phasing_factor = static_cast<int>(r.integer("phasing_factor", 1, [&](long x) { return x >= 0 && (x < s.plane_count || s.plane_count == 1); }, "[0, plane_count)"));
    const auto pattern = r.string("pattern", "auto");
    if (pattern == "auto") s.pattern = constellation::WalkerPattern::Auto;
    else if (pattern == "delta") s.pattern = constellation::WalkerPattern::Delta;
    else if (pattern == "star") s.pattern = constellation::WalkerPattern::Star;
    else parse_fail(r.key_path("pattern"), "expected auto|delta|star");
    r.finish();
    if (s.satellite_count % s.plane_count != 0)
        parse_fail(path + ".satellite_count", "not divisible by plane_count");
    return s;
}

Scenario from_json(const json& root) {
    ObjectReader r(root, "");
    Scenario sc;
    sc.name = r.string("name", "scenario");

    const auto& shells = r.get("shells");
    if (!shells.is_array() || shells.empty()) parse_fail("shells", "expected a non-empty array");
    for (std::size_t i = 0; i < shells.size(); ++i)
        sc.shells.push_back(read_shell(shells[i], "shells[" + std::to_string(i) + "]", static_cast<int>(i)));

    {
        ObjectReader a(r.get("area"), "area");
        auto lat = [](double x) { return x >= -90.0 && x <= 90.0; };
        auto lon = [](double x) { return x >= -180.0 && x <= 180.0; };
        sc.area.lat_min_deg = a.number("lat_min_deg", std::nullopt, lat, "[-90, 90]");
        sc.area.lat_max_deg = a.number("lat_max_deg", std::nullopt, lat, "[-90, 90]");
        sc.area.lon_min_deg = a.number("lon_min_deg", std::nullopt, lon, "[-180, 180]");
        sc.area.lon_max_deg = a.number("lon_max_deg", std::nullopt, lon, "[-180, 180]");
        a.finish();
        if (!(sc.area.lat_min_deg < sc.area.lat_max_deg)) parse_fail("area.lat_max_deg", "must exceed lat_min_deg");
        if (!(sc.area.lon_min_deg < sc.area.lon_max_deg)) parse_fail("area.lon_max_deg", "must exceed lon_min_deg");
    }

    sc.ue_count = static_cast<int>(r.integer("ue_count", std::nullopt, [](long x) { return x >= 0; }, "(>= 0)"));
    sc.duration_s = r.number("duration_s", std::nullopt, non_negative, "(>= 0)");
    sc.time_step_s = r.number("time_step_s", 1.0, positive, "(> 0)");
    sc.mask_deg = r.number("mask_deg", constellation::kDefaultMaskDeg, [](double x) { return x >= 0.0 && x < 90.0; }, "[0, 90)");
    sc.demand_mean_bps = r.number("demand_mean_bps", 20e6, positive, "(> 0)");
    sc.demand_unit_bps = r.number("demand_unit_bps", 1e6, positive, "(> 0)");
    sc.seed = static_cast<std::uint64_t>(r.integer("seed", 1, [](long x) { return x >= 0; }, "(>= 0)"));

    if (r.has("link")) {
        ObjectReader l(r.get("link"), "link");
        auto& p = sc.link;
        p.carrier_frequency_hz = l.number("carrier_frequency_hz", p.carrier_frequency_hz, positive, "(> 0)");
        p.bandwidth_hz = l.number("bandwidth_hz", p.bandwidth_hz, positive, "(> 0)");
        p.tx_power_dbw = l.number("tx_power_dbw", p.tx_power_dbw);
        p.sat_antenna_gain_boresight_dbi = l.number("sat_antenna_gain_dbi", p.sat_antenna_gain_boresight_dbi);
        p.ue_antenna_gain_dbi = l.number("ue_antenna_gain_dbi", p.ue_antenna_gain_dbi);
        p.noise_temperature_k = l.number("noise_temperature_k", p.noise_temperature_k, positive, "(> 0)");
        p.beamwidth_3db_deg = l.number("beamwidth_3db_deg", p.beamwidth_3db_deg, positive, "(> 0)");
        p.spectral_efficiency_cap = l.number("spectral_efficiency_cap_bps_hz", p.spectral_efficiency_cap, positive, "(> 0)");
        p.excess_loss_db = l.number("excess_loss_db", p.excess_loss_db, non_negative, "(>= 0)");
        l.finish();
    }

    if (r.has("handover")) {
        ObjectReader h(r.get("handover"), "handover");
        auto& k = sc.handover;
        auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
        k.weights.alpha = h.number("alpha", k.weights.alpha, unit, "[0, 1]");
        k.weights.beta = h.number("beta", 1.0 - k.weights.alpha, unit, "[0, 1]");
        k.delta_min_s = h.number("delta_min_s", k.delta_min_s, non_negative, "(>= 0)");
        k.guard_s = h.number("guard_s", k.guard_s, non_negative, "(>= 0)");
        k.execution_time_s = h.number("execution_time_s", k.execution_time_s, non_negative, "(>= 0)");
        k.pingpong_window_s = h.number("pingpong_window_s", k.pingpong_window_s, positive, "(> 0)");
        k.hysteresis_db = h.number("hysteresis_db", k.hysteresis_db, non_negative, "(>= 0)");
        k.time_to_trigger_steps = static_cast<int>(h.integer("time_to_trigger_steps", k.time_to_trigger_steps, [](long x) { return x >= 1; }, "(>= 1)"));
        h.finish();
        if (std::abs(k.weights.alpha + k.weights.beta - 1.0) > 1e-9) parse_fail("handover.beta", "alpha + beta must equal 1");
    }

    if (r.has("control")) {
        ObjectReader c(r.get("control"), "control");
        auto& k = sc.control;
        k.max_ues_per_region = static_cast<int>(c.integer("max_ues_per_region", k.max_ues_per_region, [](long x) { return x >= 1; }, "(>= 1)"));
        k.max_depth = static_cast<int>(c.integer("max_depth", k.max_depth, [](long x) { return x >= 0; }, "(>= 0)"));
        k.sc.slice_s = c.number("slice_s", k.sc.slice_s, positive, "(> 0)");
        k.sc.validity_s = c.number("validity_s", k.sc.validity_s, positive, "(> 0)");
        k.sc.capacity_per_satellite = static_cast<int>(c.integer("capacity_per_satellite", k.sc.capacity_per_satellite, [](long x) { return x >= 1; }, "(>= 1)"));
        k.sc.altitude_preference = c.number("altitude_preference", k.sc.altitude_preference, positive, "(> 0)");
        c.finish();
    }

    if (r.has("prediction")) {
        ObjectReader p(r.get("prediction"), "prediction");
        const auto which = p.string("predictor", "attention");
        if (which == "attention") sc.prediction.predictor = Predictor::Attention;
        else if (which == "ephemeris") sc.prediction.predictor = Predictor::Ephemeris;
        else parse_fail("prediction.predictor", "expected attention|ephemeris");
        sc.prediction.history_capacity = static_cast<std::size_t>(p.integer("history_capacity", static_cast<long>(sc.prediction.history_capacity), [](long x) { return x >= 1; }, "(>= 1)"));
        sc.prediction.tau_s = p.number("tau_s", sc.prediction.tau_s, non_negative, "(>= 0)");
        p.finish();
    }

    if (r.has("power")) {
        ObjectReader p(r.get("power"), "power");
        auto& o = sc.power;
        o.epsilon_bps = p.number("epsilon_bps", o.epsilon_bps, positive, "(> 0)");
        o.grid_points = static_cast<int>(p.integer("grid_points", o.grid_points, [](long x) { return x >= 1; }, "(>= 1)"));
        o.grid_span_db = p.number("grid_span_db", o.grid_span_db, non_negative, "(>= 0)");
        o.max_sweeps = static_cast<int>(p.integer("max_sweeps", o.max_sweeps, [](long x) { return x >= 1; }, "(>= 1)"));
        o.tolerance = p.number("tolerance", o.tolerance, non_negative, "(>= 0)");
        p.finish();
    }
    r.finish();
    try {
        sc.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
    return sc;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("<root>: malformed JSON: ") + e.what());
    }
    return from_json(root);
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

}  // namespace caas
