#include "rpinfer/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rpinfer {

namespace {

using nlohmann::json;

const Step kStepOrder[] = {Step::PortCapacity, Step::RttColo, Step::MultiIxp,
                           Step::PrivateVoting};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

ReportBundle build_report(const std::vector<InferenceResult>& results,
                          const std::vector<MemberClass>& member_classes,
                          const WorldModel& world, double metro_threshold_km) {
    ReportBundle bundle;

    std::map<std::string, IxpReportRow> rows;
    std::map<std::string, std::map<Step, long>> step_counts;
    std::map<Step, long> step_total;
    for (const auto& r : results) {
        auto& row = rows[r.interface.ixp_id];
        row.ixp_id = r.interface.ixp_id;
        row.interfaces++;
        switch (r.verdict) {
            case Verdict::Local: row.local++; break;
            case Verdict::Remote: row.remote++; break;
            case Verdict::Unknown: row.unknown++; break;
        }
        if (r.step != Step::None) {
            step_counts[r.interface.ixp_id][r.step]++;
            step_total[r.step]++;
        }
    }
    for (auto& [id, row] : rows) {
        const long classified = row.local + row.remote;
        if (classified > 0) {
            row.local_share = static_cast<double>(row.local) / classified;
            row.remote_share = static_cast<double>(row.remote) / classified;
        }
        if (row.interfaces > 0) {
            row.unknown_share = static_cast<double>(row.unknown) / row.interfaces;
        }
        if (auto it = world.ixps.find(id); it != world.ixps.end()) {
            const auto verdict = classify_wide_area(it->second, world, metro_threshold_km);
            row.wide_area = verdict.is_wide_area;
            row.max_pairwise_km = verdict.max_pairwise_km;
        }
        bundle.per_ixp.push_back(row);
    }

    const auto make_step_row = [](const std::string& id,
                                  const std::map<Step, long>& counts) {
        StepReportRow row;
        row.ixp_id = id;
        long classified = 0;
        for (const auto& [step, n] : counts) classified += n;
        for (Step s : kStepOrder) {
            const long n = counts.count(s) ? counts.at(s) : 0;
            row.counts[s] = n;
            row.shares[s] = classified > 0 ? static_cast<double>(n) / classified : 0.0;
        }
        return row;
    };
    bundle.per_step.push_back(make_step_row("all", step_total));
    for (const auto& [id, counts] : step_counts) {
        bundle.per_step.push_back(make_step_row(id, counts));
    }

    std::map<std::string, long> class_counts;
    for (const auto& mc : member_classes) class_counts[to_string(mc.cls)]++;
    for (const char* name : {"Local", "Remote", "Hybrid", "Unknown"}) {
        MemberClassRow row;
        row.cls = name;
        row.count = class_counts.count(name) ? class_counts[name] : 0;
        row.share = member_classes.empty()
                        ? 0.0
                        : static_cast<double>(row.count) / member_classes.size();
        bundle.member_classes.push_back(row);
    }
    return bundle;
}

std::string per_ixp_csv(const ReportBundle& bundle) {
    std::ostringstream os;
    os << "ixp_id,interfaces,local,remote,unknown,local_share,remote_share,unknown_share,"
          "wide_area,max_pairwise_km\n";
    for (const auto& row : bundle.per_ixp) {
        os << row.ixp_id << ',' << row.interfaces << ',' << row.local << ',' << row.remote
           << ',' << row.unknown << ',' << fmt(row.local_share) << ','
           << fmt(row.remote_share) << ',' << fmt(row.unknown_share) << ','
           << (row.wide_area ? 1 : 0) << ',' << fmt(row.max_pairwise_km) << '\n';
    }
    return os.str();
}

std::string per_step_csv(const ReportBundle& bundle) {
    std::ostringstream os;
    os << "ixp_id,port_capacity,rtt_colo,multi_ixp,private_voting,"
          "port_capacity_share,rtt_colo_share,multi_ixp_share,private_voting_share\n";
    for (const auto& row : bundle.per_step) {
        os << row.ixp_id;
        for (Step s : kStepOrder) os << ',' << row.counts.at(s);
        for (Step s : kStepOrder) os << ',' << fmt(row.shares.at(s));
        os << '\n';
    }
    return os.str();
}

std::string member_class_csv(const ReportBundle& bundle) {
    std::ostringstream os;
    os << "class,count,share\n";
    for (const auto& row : bundle.member_classes) {
        os << row.cls << ',' << row.count << ',' << fmt(row.share) << '\n';
    }
    return os.str();
}

json report_json(const ReportBundle& bundle) {
    json per_ixp = json::array();
    for (const auto& row : bundle.per_ixp) {
        per_ixp.push_back(json{{"ixp_id", row.ixp_id},
                               {"interfaces", row.interfaces},
                               {"local", row.local},
                               {"remote", row.remote},
                               {"unknown", row.unknown},
                               {"local_share", row.local_share},
                               {"remote_share", row.remote_share},
                               {"unknown_share", row.unknown_share},
                               {"wide_area", row.wide_area},
                               {"max_pairwise_km", row.max_pairwise_km}});
    }
    json per_step = json::array();
    for (const auto& row : bundle.per_step) {
        json counts = json::object();
        json shares = json::object();
        for (const auto& [step, n] : row.counts) counts[to_string(step)] = n;
        for (const auto& [step, s] : row.shares) shares[to_string(step)] = s;
        per_step.push_back(
            json{{"ixp_id", row.ixp_id}, {"counts", counts}, {"shares", shares}});
    }
    json classes = json::array();
    for (const auto& row : bundle.member_classes) {
        classes.push_back(
            json{{"class", row.cls}, {"count", row.count}, {"share", row.share}});
    }
    return json{{"per_ixp", per_ixp}, {"per_step", per_step}, {"member_classes", classes}};
}

json facilities_geojson(const WorldModel& world,
                        const std::vector<InferenceResult>& results,
                        const std::string& rings_for_ixp) {
    json features = json::array();
    for (const auto& [id, fac] : world.facilities) {
        if (!fac.location) continue;
        features.push_back(json{
            {"type", "Feature"},
            {"geometry",
             json{{"type", "Point"},
                  {"coordinates",
                   json::array({fac.location->longitude, fac.location->latitude})}}},
            {"properties", json{{"facility_id", id},
                                {"hosted_ixps", fac.hosted_ixps},
                                {"tenants", fac.hosted_asns.size()}}}});
    }
    if (!rings_for_ixp.empty()) {
        for (const auto& r : results) {
            if (r.interface.ixp_id != rings_for_ixp) continue;
            if (!r.evidence.contains("d_max_km") || !r.evidence.contains("vp_id")) continue;
            const auto vp_it = world.vps.find(r.evidence.at("vp_id").get<std::string>());
            if (vp_it == world.vps.end()) continue;
            const auto center = world.vp_point(vp_it->second);
            if (!center) continue;
            const double radius_km = r.evidence.at("d_max_km").get<double>();
            json coords = json::array();
            for (int k = 0; k <= 64; ++k) {
                const double theta = 2.0 * M_PI * k / 64;
                // Small-circle approximation, fine for overlay purposes.
                const double dlat = radius_km / 111.32 * std::cos(theta);
                const double dlon = radius_km /
                                    (111.32 * std::cos(center->latitude * M_PI / 180.0)) *
                                    std::sin(theta);
                coords.push_back(json::array(
                    {center->longitude + dlon, center->latitude + dlat}));
            }
            features.push_back(json{
                {"type", "Feature"},
                {"geometry",
                 json{{"type", "Polygon"}, {"coordinates", json::array({coords})}}},
                {"properties", json{{"interface", r.interface.ip.str()},
                                    {"verdict", to_string(r.verdict)},
                                    {"d_max_km", radius_km}}}});
        }
    }
    return json{{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace rpinfer
