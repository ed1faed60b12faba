#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rpinfer/geo.hpp"
#include "rpinfer/net.hpp"

namespace rpinfer {

// Data sources ordered by trust. Website data comes straight from the
// exchange operators and wins every conflict; Inflect is only elevated
// for facility coordinates, which it verifies independently.
enum class SourceTag { Website, HE, PDB, PCH, Inflect, Custom };

enum class ConflictDomain { General, FacilityCoordinates };

int precedence_rank(SourceTag tag, ConflictDomain domain = ConflictDomain::General);

std::string to_string(SourceTag tag);
SourceTag source_tag_from_string(const std::string& name);

struct IxpRecord {
    std::string ixp_id;
    std::string name;
    std::vector<Prefix> prefixes;        // peering LANs, non-overlapping
    std::set<std::string> facility_ids;  // sites hosting this exchange's fabric
    std::optional<double> min_physical_capacity_mbps;  // smallest physical port sold
    std::vector<double> capacity_options_mbps;

    bool operator==(const IxpRecord&) const = default;
};

struct MemberInterface {
    Ipv4 ip;
    Asn asn = 0;
    std::string ixp_id;
    std::optional<double> port_capacity_mbps;
    SourceTag source = SourceTag::Custom;

    bool operator==(const MemberInterface&) const = default;
};

struct FacilityRecord {
    std::string facility_id;
    std::string name;
    std::optional<GeoPoint> location;
    std::set<Asn> hosted_asns;
    std::set<std::string> hosted_ixps;
    SourceTag source = SourceTag::Custom;

    bool operator==(const FacilityRecord&) const = default;
};

enum class LabelClass { Local, Remote };
enum class LabelProvenance { Operator, Website };

std::string to_string(LabelClass c);
std::string to_string(LabelProvenance p);

struct ValidationLabel {
    std::string ixp_id;
    std::optional<Asn> asn;   // member-level label
    std::optional<Ipv4> ip;   // interface-level label
    LabelClass label = LabelClass::Local;
    LabelProvenance provenance = LabelProvenance::Operator;

    bool operator==(const ValidationLabel&) const = default;
};

enum class VpKind { LookingGlass, AtlasProbe };

// Looking glasses often round RTTs up to whole milliseconds; the
// distance bounds must account for that.
enum class RttResolution { SubMillisecond, IntegerRoundedUp };

std::string to_string(VpKind k);
std::string to_string(RttResolution r);

struct VantagePoint {
    std::string vp_id;
    VpKind kind = VpKind::LookingGlass;
    std::string ixp_id;
    std::optional<GeoPoint> location;
    std::optional<std::string> facility_id;  // location fallback
    RttResolution rtt_resolution = RttResolution::IntegerRoundedUp;
    std::optional<Ipv4> route_server_ip;

    bool operator==(const VantagePoint&) const = default;
};

struct QuarantineEntry {
    std::string kind;
    std::string key;
    std::string reason;
    std::string source;

    bool operator==(const QuarantineEntry&) const = default;
};

// Merged, cross-source view of all static datasets. Immutable after
// construction; safe to share across threads.
struct WorldModel {
    std::map<std::string, IxpRecord> ixps;
    std::map<Ipv4, MemberInterface> interfaces;
    std::map<std::string, FacilityRecord> facilities;
    std::map<std::string, VantagePoint> vps;
    std::vector<std::pair<Prefix, Asn>> routing;  // routed prefixes, sorted
    std::vector<ValidationLabel> labels;
    std::vector<QuarantineEntry> quarantine;

    // Derived lookup structures; rebuilt by finalize().
    PrefixTable routing_table;
    PrefixTable ixp_lan_table;           // payload indexes ixp_index_to_id
    std::vector<std::string> ixp_index_to_id;
    std::set<std::pair<std::string, Asn>> memberships;  // (ixp_id, asn)

    void finalize();

    std::optional<std::string> ixp_of_ip(Ipv4 ip) const;
    // Interface table first, routed prefixes second.
    std::optional<Asn> asn_of_ip(Ipv4 ip) const;
    bool is_member(const std::string& ixp_id, Asn asn) const;
    std::optional<GeoPoint> facility_point(const std::string& facility_id) const;
    std::optional<GeoPoint> vp_point(const VantagePoint& vp) const;

    // All facilities hosting the exchange / the AS (set membership only;
    // facilities without coordinates still count here).
    std::set<std::string> facilities_of_ixp(const std::string& ixp_id) const;
    std::set<std::string> facilities_of_asn(Asn asn) const;
    std::vector<GeoPoint> facility_points(const std::set<std::string>& ids) const;
};

struct WideAreaVerdict {
    std::string ixp_id;
    bool is_wide_area = false;
    double max_pairwise_km = 0.0;
    std::vector<std::string> facilities_without_coordinates;
};

// An exchange is wide-area when at least two of its sites sit in
// different metropolitan areas, i.e. more than metro_threshold_km apart.
WideAreaVerdict classify_wide_area(const IxpRecord& ixp, const WorldModel& world,
                                   double metro_threshold_km = 50.0);

}  // namespace rpinfer
