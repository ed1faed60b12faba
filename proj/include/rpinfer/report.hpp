#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpinfer/inference.hpp"
#include "rpinfer/world.hpp"

namespace rpinfer {

struct IxpReportRow {
    std::string ixp_id;
    long interfaces = 0;
    long local = 0;
    long remote = 0;
    long unknown = 0;
    double local_share = 0.0;    // of classified interfaces
    double remote_share = 0.0;
    double unknown_share = 0.0;  // of all interfaces
    bool wide_area = false;      // fabric spans multiple metros
    double max_pairwise_km = 0.0;
};

struct StepReportRow {
    std::string ixp_id;  // "all" for the aggregate row
    std::map<Step, long> counts;
    std::map<Step, double> shares;  // of classified interfaces; sums to 1
};

struct MemberClassRow {
    std::string cls;
    long count = 0;
    double share = 0.0;
};

struct ReportBundle {
    std::vector<IxpReportRow> per_ixp;
    std::vector<StepReportRow> per_step;
    std::vector<MemberClassRow> member_classes;
};

ReportBundle build_report(const std::vector<InferenceResult>& results,
                          const std::vector<MemberClass>& member_classes,
                          const WorldModel& world, double metro_threshold_km = 50.0);

// Stable column orders; golden-tested.
std::string per_ixp_csv(const ReportBundle& bundle);
std::string per_step_csv(const ReportBundle& bundle);
std::string member_class_csv(const ReportBundle& bundle);

nlohmann::json report_json(const ReportBundle& bundle);

// Facilities as points; optionally one ring polygon per classified
// interface of the named exchange (from its evidence), for map overlays.
nlohmann::json facilities_geojson(const WorldModel& world,
                                  const std::vector<InferenceResult>& results,
                                  const std::string& rings_for_ixp = "");

}  // namespace rpinfer
