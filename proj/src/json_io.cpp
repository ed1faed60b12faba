#include "rpinfer/json_io.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rpinfer {

using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string digest_file(const std::string& path) {
    return fnv1a_hex(read_text_file(path));
}

std::int64_t manifest_timestamp() {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        return std::strtoll(epoch, nullptr, 10);
    }
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

json manifest_json(const RunManifest& manifest) {
    return json{{"tool", kToolName},
                {"version", kToolVersion},
                {"command", manifest.command},
                {"created_unix", manifest.created_unix},
                {"config", manifest.config},
                {"inputs", manifest.input_digests}};
}

json world_to_json(const WorldModel& world) {
    json ixps = json::array();
    for (const auto& [id, ixp] : world.ixps) {
        json rec{{"ixp_id", id}, {"name", ixp.name}};
        json prefixes = json::array();
        for (const auto& p : ixp.prefixes) prefixes.push_back(p.str());
        rec["prefixes"] = std::move(prefixes);
        rec["facility_ids"] = ixp.facility_ids;
        if (ixp.min_physical_capacity_mbps) {
            rec["min_physical_capacity_mbps"] = *ixp.min_physical_capacity_mbps;
        }
        if (!ixp.capacity_options_mbps.empty()) {
            rec["capacity_options_mbps"] = ixp.capacity_options_mbps;
        }
        ixps.push_back(std::move(rec));
    }

    json interfaces = json::array();
    for (const auto& [ip, iface] : world.interfaces) {
        json rec{{"ip", ip.str()},
                 {"asn", iface.asn},
                 {"ixp_id", iface.ixp_id},
                 {"source", to_string(iface.source)}};
        if (iface.port_capacity_mbps) rec["port_capacity_mbps"] = *iface.port_capacity_mbps;
        interfaces.push_back(std::move(rec));
    }

    json facilities = json::array();
    for (const auto& [id, fac] : world.facilities) {
        json rec{{"facility_id", id},
                 {"name", fac.name},
                 {"hosted_asns", fac.hosted_asns},
                 {"hosted_ixps", fac.hosted_ixps},
                 {"source", to_string(fac.source)}};
        if (fac.location) {
            rec["latitude"] = fac.location->latitude;
            rec["longitude"] = fac.location->longitude;
        }
        facilities.push_back(std::move(rec));
    }

    json vps = json::array();
    for (const auto& [id, vp] : world.vps) {
        json rec{{"vp_id", id},
                 {"kind", to_string(vp.kind)},
                 {"ixp_id", vp.ixp_id},
                 {"rtt_resolution", to_string(vp.rtt_resolution)}};
        if (vp.location) {
            rec["latitude"] = vp.location->latitude;
            rec["longitude"] = vp.location->longitude;
        }
        if (vp.facility_id) rec["facility_id"] = *vp.facility_id;
        if (vp.route_server_ip) rec["route_server_ip"] = vp.route_server_ip->str();
        vps.push_back(std::move(rec));
    }

    json routing = json::array();
    for (const auto& [prefix, asn] : world.routing) {
        routing.push_back(json{{"prefix", prefix.str()}, {"asn", asn}});
    }

    json labels = json::array();
    for (const auto& label : world.labels) {
        json rec{{"ixp_id", label.ixp_id},
                 {"label", to_string(label.label)},
                 {"provenance", to_string(label.provenance)}};
        if (label.ip) rec["ip"] = label.ip->str();
        if (label.asn) rec["asn"] = *label.asn;
        labels.push_back(std::move(rec));
    }

    json quarantine = json::array();
    for (const auto& q : world.quarantine) {
        quarantine.push_back(json{{"kind", q.kind},
                                  {"key", q.key},
                                  {"reason", q.reason},
                                  {"source", q.source}});
    }

    return json{{"ixps", std::move(ixps)},
                {"interfaces", std::move(interfaces)},
                {"facilities", std::move(facilities)},
                {"vps", std::move(vps)},
                {"routing", std::move(routing)},
                {"labels", std::move(labels)},
                {"quarantine", std::move(quarantine)}};
}

WorldModel world_from_json(const json& body) {
    WorldModel world;
    for (const auto& rec : body.at("ixps")) {
        IxpRecord ixp;
        ixp.ixp_id = rec.at("ixp_id").get<std::string>();
        ixp.name = rec.value("name", "");
        for (const auto& p : rec.value("prefixes", json::array())) {
            ixp.prefixes.push_back(Prefix::parse(p.get<std::string>()));
        }
        for (const auto& f : rec.value("facility_ids", json::array())) {
            ixp.facility_ids.insert(f.get<std::string>());
        }
        if (rec.contains("min_physical_capacity_mbps")) {
            ixp.min_physical_capacity_mbps =
                rec.at("min_physical_capacity_mbps").get<double>();
        }
        if (rec.contains("capacity_options_mbps")) {
            ixp.capacity_options_mbps =
                rec.at("capacity_options_mbps").get<std::vector<double>>();
        }
        world.ixps.emplace(ixp.ixp_id, std::move(ixp));
    }
    for (const auto& rec : body.at("interfaces")) {
        MemberInterface iface;
        iface.ip = Ipv4::parse(rec.at("ip").get<std::string>());
        iface.asn = rec.at("asn").get<Asn>();
        iface.ixp_id = rec.at("ixp_id").get<std::string>();
        if (rec.contains("port_capacity_mbps")) {
            iface.port_capacity_mbps = rec.at("port_capacity_mbps").get<double>();
        }
        iface.source = source_tag_from_string(rec.value("source", "Custom"));
        world.interfaces.emplace(iface.ip, std::move(iface));
    }
    for (const auto& rec : body.at("facilities")) {
        FacilityRecord fac;
        fac.facility_id = rec.at("facility_id").get<std::string>();
        fac.name = rec.value("name", "");
        if (rec.contains("latitude")) {
            fac.location =
                GeoPoint{rec.at("latitude").get<double>(), rec.at("longitude").get<double>()};
        }
        for (const auto& a : rec.value("hosted_asns", json::array())) {
            fac.hosted_asns.insert(a.get<Asn>());
        }
        for (const auto& x : rec.value("hosted_ixps", json::array())) {
            fac.hosted_ixps.insert(x.get<std::string>());
        }
        fac.source = source_tag_from_string(rec.value("source", "Custom"));
        world.facilities.emplace(fac.facility_id, std::move(fac));
    }
    for (const auto& rec : body.at("vps")) {
        VantagePoint vp;
        vp.vp_id = rec.at("vp_id").get<std::string>();
        vp.kind = rec.value("kind", "LookingGlass") == std::string("AtlasProbe")
                      ? VpKind::AtlasProbe
                      : VpKind::LookingGlass;
        vp.ixp_id = rec.at("ixp_id").get<std::string>();
        if (rec.contains("latitude")) {
            vp.location =
                GeoPoint{rec.at("latitude").get<double>(), rec.at("longitude").get<double>()};
        }
        if (rec.contains("facility_id")) {
            vp.facility_id = rec.at("facility_id").get<std::string>();
        }
        vp.rtt_resolution =
            rec.value("rtt_resolution", "IntegerRoundedUp") == std::string("SubMillisecond")
                ? RttResolution::SubMillisecond
                : RttResolution::IntegerRoundedUp;
        if (rec.contains("route_server_ip")) {
            vp.route_server_ip = Ipv4::parse(rec.at("route_server_ip").get<std::string>());
        }
        world.vps.emplace(vp.vp_id, std::move(vp));
    }
    for (const auto& rec : body.at("routing")) {
        world.routing.emplace_back(Prefix::parse(rec.at("prefix").get<std::string>()),
                                   rec.at("asn").get<Asn>());
    }
    for (const auto& rec : body.at("labels")) {
        ValidationLabel label;
        label.ixp_id = rec.at("ixp_id").get<std::string>();
        if (rec.contains("ip")) label.ip = Ipv4::parse(rec.at("ip").get<std::string>());
        if (rec.contains("asn")) label.asn = rec.at("asn").get<Asn>();
        label.label = rec.at("label").get<std::string>() == "Remote" ? LabelClass::Remote
                                                                     : LabelClass::Local;
        label.provenance = rec.value("provenance", "Operator") == std::string("Website")
                               ? LabelProvenance::Website
                               : LabelProvenance::Operator;
        world.labels.push_back(std::move(label));
    }
    for (const auto& rec : body.value("quarantine", json::array())) {
        world.quarantine.push_back({rec.at("kind").get<std::string>(),
                                    rec.at("key").get<std::string>(),
                                    rec.at("reason").get<std::string>(),
                                    rec.value("source", "")});
    }
    world.finalize();
    return world;
}

json ingest_report_json(const IngestReport& report) {
    json sources = json::object();
    for (const auto& [source, kinds] : report.sources) {
        json per_kind = json::object();
        for (const auto& [kind, counts] : kinds) {
            per_kind[kind] = json{{"total", counts.total},
                                  {"unique", counts.unique},
                                  {"conflicts", counts.conflicts}};
        }
        sources[source] = std::move(per_kind);
    }
    json quarantine = json::array();
    for (const auto& q : report.quarantine) {
        quarantine.push_back(json{{"kind", q.kind},
                                  {"key", q.key},
                                  {"reason", q.reason},
                                  {"source", q.source}});
    }
    return json{{"sources", std::move(sources)},
                {"quarantine", std::move(quarantine)},
                {"warnings", report.warnings}};
}

json results_to_json(const PipelineOutput& output, const RunManifest& manifest) {
    json results = json::array();
    for (const auto& r : output.results) {
        results.push_back(json{{"ip", r.interface.ip.str()},
                               {"asn", r.interface.asn},
                               {"ixp_id", r.interface.ixp_id},
                               {"verdict", to_string(r.verdict)},
                               {"step", to_string(r.step)},
                               {"evidence", r.evidence}});
    }
    json classes = json::array();
    for (const auto& mc : output.member_classes) {
        classes.push_back(json{{"asn", mc.asn}, {"class", to_string(mc.cls)}});
    }
    json baseline = json::array();
    for (const auto& b : output.baseline) {
        baseline.push_back(json{{"ip", b.key.ip.str()},
                                {"ixp_id", b.key.ixp_id},
                                {"verdict", to_string(b.verdict)}});
    }
    return json{{"manifest", manifest_json(manifest)},
                {"results", std::move(results)},
                {"member_classes", std::move(classes)},
                {"baseline", std::move(baseline)},
                {"dropped_vps", output.dropped_vps},
                {"warnings", output.warnings}};
}

LoadedResults results_from_json(const json& body) {
    LoadedResults out;
    for (const auto& rec : body.at("results")) {
        InferenceResult r;
        r.interface.ip = Ipv4::parse(rec.at("ip").get<std::string>());
        r.interface.asn = rec.at("asn").get<Asn>();
        r.interface.ixp_id = rec.at("ixp_id").get<std::string>();
        r.verdict = verdict_from_string(rec.at("verdict").get<std::string>());
        r.step = step_from_string(rec.at("step").get<std::string>());
        r.evidence = rec.value("evidence", json::object());
        out.results.push_back(std::move(r));
    }
    for (const auto& rec : body.value("baseline", json::array())) {
        BaselineResult b;
        b.key.ip = Ipv4::parse(rec.at("ip").get<std::string>());
        b.key.ixp_id = rec.at("ixp_id").get<std::string>();
        b.verdict = verdict_from_string(rec.at("verdict").get<std::string>());
        out.baseline.push_back(std::move(b));
    }
    for (const auto& rec : body.value("member_classes", json::array())) {
        MemberClass mc;
        mc.asn = rec.at("asn").get<Asn>();
        const auto text = rec.at("class").get<std::string>();
        mc.cls = text == "Local"    ? MemberClassKind::Local
                 : text == "Remote" ? MemberClassKind::Remote
                 : text == "Hybrid" ? MemberClassKind::Hybrid
                                    : MemberClassKind::Unknown;
        out.member_classes.push_back(mc);
    }
    return out;
}

json metrics_report_json(const MetricsReport& m) {
    json out = json::object();
    if (m.cov) out["cov"] = *m.cov;
    if (m.fpr) out["fpr"] = *m.fpr;
    if (m.fnr) out["fnr"] = *m.fnr;
    if (m.pre) out["pre"] = *m.pre;
    if (m.acc) out["acc"] = *m.acc;
    out["counts"] = json{{"vd", m.n_vd},
                         {"inf", m.n_inf},
                         {"inf_and_vd", m.n_inf_and_vd},
                         {"inf_and_vd_l", m.n_inf_and_vd_l},
                         {"inf_and_vd_r", m.n_inf_and_vd_r},
                         {"inf_r_and_vd", m.n_inf_r_and_vd},
                         {"inf_r_vd_r", m.n_inf_r_vd_r},
                         {"inf_r_vd_l", m.n_inf_r_vd_l},
                         {"inf_l_vd_r", m.n_inf_l_vd_r},
                         {"inf_l_vd_l", m.n_inf_l_vd_l}};
    return out;
}

json metrics_to_json(const PerStepMetrics& per_step,
                     const std::optional<MetricsReport>& baseline,
                     const RunManifest& manifest) {
    json steps = json::object();
    for (const auto& [step, report] : per_step.steps) {
        steps[to_string(step)] = metrics_report_json(report);
    }
    json out{{"manifest", manifest_json(manifest)},
             {"combined", metrics_report_json(per_step.combined)},
             {"per_step", std::move(steps)}};
    if (baseline) out["baseline"] = metrics_report_json(*baseline);
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw DataError("cannot write " + path);
    outf << body;
}

nlohmann::json load_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_json_file(const std::string& path, const json& body) {
    write_text_file(path, body.dump(2) + "\n");
}

}  // namespace rpinfer
