#include "caas/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"

namespace caas::output {

using nlohmann::json;

void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& body) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        try {
            body(os);
        } catch (...) {
            os.close();
            std::remove(tmp.c_str());
            throw;
        }
        os.flush();
        if (!os) {
            os.close();
            std::remove(tmp.c_str());
            throw Error(ErrorKind::Io, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

std::string metrics_json(const MetricsReport& r, const Scenario& sc, Strategy strategy) {
    json j;
    j["scenario"] = sc.name;
    j["strategy"] = to_string(strategy);
    j["seed"] = sc.seed;
    j["ue_count"] = sc.ue_count;
    j["duration_s"] = sc.duration_s;
    j["atr_bps"] = r.atr_bps;
    j["ho_count"] = r.ho_count;
    j["ho_per_ue"] = r.ho_per_ue;
    j["pingpong_count"] = r.pingpong_count;
    j["signaling_messages"] = r.signaling_messages;
    j["outage_fraction"] = r.outage_fraction;
    json per = json::array();
    for (const auto& u : r.per_ue)
        per.push_back({{"ue_id", u.ue_id},
                       {"atr_bps", u.atr_bps},
                       {"ho_count", u.ho_count},
                       {"pingpong_count", u.pingpong_count},
                       {"signaling_messages", u.signaling_messages},
                       {"outage_fraction", u.outage_fraction}});
    j["per_ue"] = per;
    return j.dump(2) + "\n";
}

void write_events_jsonl(std::ostream& os, const EventLog& log) {
    for (const auto& e : log.events) {
        json j;
        j["t"] = e.t;
        j["kind"] = to_string(e.kind);
        switch (e.kind) {
            case EventKind::Rate:
                j["ue_id"] = e.ue_id;
                j["rate_bps"] = e.rate_bps;
                j["serving"] = e.serving;
                break;
            case EventKind::Sc:
                j["region_id"] = e.region_id;
                j["satellite_ids"] = e.satellite_ids;
                j["uncovered_demand_points"] = e.uncovered_demand_points;
                break;
            default:
                j["ue_id"] = e.ue_id;
                j["link_id"] = e.link_id;
                j["from_sat"] = e.from_sat;
                j["to_sat"] = e.to_sat;
                break;
        }
        os << j.dump() << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const sim::SweepResult& result) {
    os << "ue_count,strategy,atr_mean_bps,atr_std,ho_per_ue_mean,ho_per_ue_std,pingpong_mean,signaling_mean\n";
    for (const auto& r : result.rows)
        os << r.ue_count << ',' << to_string(r.strategy) << ',' << r.atr_mean_bps << ',' << r.atr_std << ','
           << r.ho_per_ue_mean << ',' << r.ho_per_ue_std << ',' << r.pingpong_mean << ',' << r.signaling_mean << '\n';
}

void write_allocations_csv(std::ostream& os, std::span<const sim::AllocationRecord> records) {
    os << "time_s,region_id,sat_id,ue_id,power_w\n";
    for (const auto& r : records)
        os << r.t << ',' << r.region_id << ',' << r.satellite_id << ',' << r.ue_id << ',' << r.power_w << '\n';
}

}  // namespace caas::output
