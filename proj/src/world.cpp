#include "rpinfer/world.hpp"

#include <algorithm>

namespace rpinfer {

int precedence_rank(SourceTag tag, ConflictDomain domain) {
    switch (tag) {
        case SourceTag::Website: return 0;
        case SourceTag::HE: return 1;
        case SourceTag::PDB: return 2;
        case SourceTag::PCH: return 3;
        case SourceTag::Inflect:
            return domain == ConflictDomain::FacilityCoordinates ? 0 : 4;
        case SourceTag::Custom: return 5;
    }
    return 5;
}

std::string to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::Website: return "Website";
        case SourceTag::HE: return "HE";
        case SourceTag::PDB: return "PDB";
        case SourceTag::PCH: return "PCH";
        case SourceTag::Inflect: return "Inflect";
        case SourceTag::Custom: return "Custom";
    }
    return "Custom";
}

SourceTag source_tag_from_string(const std::string& name) {
    if (name == "Website") return SourceTag::Website;
    if (name == "HE") return SourceTag::HE;
    if (name == "PDB") return SourceTag::PDB;
    if (name == "PCH") return SourceTag::PCH;
    if (name == "Inflect") return SourceTag::Inflect;
    if (name == "Custom") return SourceTag::Custom;
    throw ParseError("unknown source tag: '" + name + "'");
}

std::string to_string(LabelClass c) {
    return c == LabelClass::Local ? "Local" : "Remote";
}

std::string to_string(LabelProvenance p) {
    return p == LabelProvenance::Operator ? "Operator" : "Website";
}

std::string to_string(VpKind k) {
    return k == VpKind::LookingGlass ? "LookingGlass" : "AtlasProbe";
}

std::string to_string(RttResolution r) {
    return r == RttResolution::SubMillisecond ? "SubMillisecond" : "IntegerRoundedUp";
}

void WorldModel::finalize() {
    routing_table = PrefixTable{};
    std::sort(routing.begin(), routing.end());
    routing.erase(std::unique(routing.begin(), routing.end()), routing.end());
    for (const auto& [prefix, asn] : routing) routing_table.add(prefix, asn);

    ixp_lan_table = PrefixTable{};
    ixp_index_to_id.clear();
    for (const auto& [id, ixp] : ixps) {
        const auto index = static_cast<std::uint32_t>(ixp_index_to_id.size());
        ixp_index_to_id.push_back(id);
        for (const auto& prefix : ixp.prefixes) ixp_lan_table.add(prefix, index);
    }

    memberships.clear();
    for (const auto& [ip, iface] : interfaces) {
        memberships.emplace(iface.ixp_id, iface.asn);
    }
}

std::optional<std::string> WorldModel::ixp_of_ip(Ipv4 ip) const {
    if (auto index = ixp_lan_table.lookup(ip)) return ixp_index_to_id.at(*index);
    return std::nullopt;
}

std::optional<Asn> WorldModel::asn_of_ip(Ipv4 ip) const {
    if (auto it = interfaces.find(ip); it != interfaces.end()) return it->second.asn;
    return routing_table.lookup(ip);
}

bool WorldModel::is_member(const std::string& ixp_id, Asn asn) const {
    return memberships.count({ixp_id, asn}) > 0;
}

std::optional<GeoPoint> WorldModel::facility_point(const std::string& facility_id) const {
    auto it = facilities.find(facility_id);
    if (it == facilities.end()) return std::nullopt;
    return it->second.location;
}

std::optional<GeoPoint> WorldModel::vp_point(const VantagePoint& vp) const {
    if (vp.location) return vp.location;
    if (vp.facility_id) return facility_point(*vp.facility_id);
    return std::nullopt;
}

std::set<std::string> WorldModel::facilities_of_ixp(const std::string& ixp_id) const {
    std::set<std::string> out;
    if (auto it = ixps.find(ixp_id); it != ixps.end()) {
        out = it->second.facility_ids;
    }
    for (const auto& [fid, fac] : facilities) {
        if (fac.hosted_ixps.count(ixp_id)) out.insert(fid);
    }
    return out;
}

std::set<std::string> WorldModel::facilities_of_asn(Asn asn) const {
    std::set<std::string> out;
    for (const auto& [fid, fac] : facilities) {
        if (fac.hosted_asns.count(asn)) out.insert(fid);
    }
    return out;
}

std::vector<GeoPoint> WorldModel::facility_points(const std::set<std::string>& ids) const {
    std::vector<GeoPoint> out;
    for (const auto& id : ids) {
        if (auto p = facility_point(id)) out.push_back(*p);
    }
    return out;
}

WideAreaVerdict classify_wide_area(const IxpRecord& ixp, const WorldModel& world,
                                   double metro_threshold_km) {
    WideAreaVerdict verdict;
    verdict.ixp_id = ixp.ixp_id;

    std::vector<GeoPoint> points;
    for (const auto& fid : world.facilities_of_ixp(ixp.ixp_id)) {
        if (auto p = world.facility_point(fid)) {
            points.push_back(*p);
        } else {
            verdict.facilities_without_coordinates.push_back(fid);
        }
    }
    if (points.size() < 2) return verdict;

    const auto matrix = distance_matrix_km(points);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            verdict.max_pairwise_km = std::max(verdict.max_pairwise_km, matrix[i][j]);
        }
    }
    verdict.is_wide_area = verdict.max_pairwise_km > metro_threshold_km;
    return verdict;
}

}  // namespace rpinfer
